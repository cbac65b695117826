#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "powermap/matrix.hpp"
#include "powermap/rng.hpp"
#include "powermap/special_math.hpp"

namespace powermap {

struct singular_fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct degenerate_test_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Design specification
// ---------------------------------------------------------------------------

struct ColumnSpec {
    enum class Kind { kNormal, kCategorical, kProduct };
    Kind kind = Kind::kNormal;
    double mu = 0.0, sigma = 1.0;         // kNormal
    std::vector<double> levels;           // kCategorical
    std::size_t factor_a = 0, factor_b = 0;  // kProduct, 1-based column indices

    static ColumnSpec normal(double mu, double sigma) {
        ColumnSpec c;
        c.kind = Kind::kNormal;
        c.mu = mu;
        c.sigma = sigma;
        return c;
    }
    static ColumnSpec categorical(std::vector<double> levels) {
        ColumnSpec c;
        c.kind = Kind::kCategorical;
        c.levels = std::move(levels);
        return c;
    }
    static ColumnSpec product(std::size_t i, std::size_t j) {
        ColumnSpec c;
        c.kind = Kind::kProduct;
        c.factor_a = i;
        c.factor_b = j;
        return c;
    }
};

struct DesignSpec {
    std::vector<ColumnSpec> columns;
    std::string name = "custom";

    std::size_t num_predictors() const { return columns.size(); }

    void validate() const {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const auto& c = columns[j];
            if (c.kind == ColumnSpec::Kind::kProduct) {
                if (c.factor_a == 0 || c.factor_b == 0 || c.factor_a > j || c.factor_b > j)
                    throw std::invalid_argument(
                        "DesignSpec: product column " + std::to_string(j + 1) +
                        " must reference strictly lower 1-based indices");
            }
            if (c.kind == ColumnSpec::Kind::kCategorical && c.levels.empty())
                throw std::invalid_argument("DesignSpec: categorical column without levels");
            if (c.kind == ColumnSpec::Kind::kNormal && c.sigma < 0.0)
                throw std::invalid_argument("DesignSpec: negative sigma");
        }
    }
};

// The stock 20-column feature distribution used for the linear / RMANOVA
// families; truncation keeps the first k columns.
inline DesignSpec design_d_o(std::size_t k) {
    using C = ColumnSpec;
    std::vector<ColumnSpec> all = {
        C::categorical({-1, 1}), C::normal(0, 1), C::product(1, 2),  C::normal(0, 2),
        C::product(4, 2),        C::categorical({0, 1, 2}),          C::normal(0, 2),
        C::product(6, 7),        C::normal(0, 1), C::product(2, 6),  C::normal(0, 3),
        C::normal(0, 1),         C::product(1, 11),                  C::normal(0, 2),
        C::product(11, 12),      C::normal(0, 2), C::normal(0, 2),   C::product(11, 14),
        C::normal(0, 1),         C::product(6, 16)};
    if (k == 0 || k > all.size())
        throw std::invalid_argument("design_d_o: k must be in 1..20");
    DesignSpec spec;
    spec.columns.assign(all.begin(), all.begin() + static_cast<long>(k));
    spec.name = "D_O";
    spec.validate();
    return spec;
}

// Alternate feature distribution (non-linear families and transfer tests).
inline DesignSpec design_d_a(std::size_t k) {
    using C = ColumnSpec;
    std::vector<ColumnSpec> all = {
        C::normal(0, 1),    C::categorical({-1, 1}), C::normal(0, 1),  C::normal(0, 1),
        C::product(2, 1),   C::product(2, 3),        C::product(2, 4), C::normal(0, 1),
        C::normal(0, 1),    C::product(2, 8),        C::normal(0, 3),  C::normal(0, 1),
        C::product(1, 11),  C::normal(0, 2),         C::product(11, 12),
        C::normal(0, 2),    C::normal(0, 2),         C::product(11, 14),
        C::normal(0, 1),    C::product(6, 16)};
    if (k == 0 || k > all.size())
        throw std::invalid_argument("design_d_a: k must be in 1..20");
    DesignSpec spec;
    spec.columns.assign(all.begin(), all.begin() + static_cast<long>(k));
    spec.name = "D_A";
    spec.validate();
    return spec;
}

inline DesignSpec design_by_name(const std::string& name, std::size_t k) {
    if (name == "D_O") return design_d_o(k);
    if (name == "D_A") return design_d_a(k);
    throw std::invalid_argument("design_by_name: unknown design '" + name + "'");
}

// ---------------------------------------------------------------------------
// Hypothesis and model family
// ---------------------------------------------------------------------------

struct Hypothesis {
    enum class Test { kPartialF, kWald, kRmAnovaF, kT };
    std::set<std::size_t> tested_indices;  // 1-based coefficient indices
    Test test = Test::kPartialF;

    void validate(std::size_t k) const {
        if (tested_indices.empty())
            throw std::invalid_argument("Hypothesis: tested_indices must be nonempty");
        for (auto i : tested_indices)
            if (i == 0 || i > k)
                throw std::invalid_argument("Hypothesis: tested index out of range");
        if (test == Test::kT && tested_indices.size() != 1)
            throw std::invalid_argument("Hypothesis: t-test requires a single index");
    }
};

struct ModelFamily {
    enum class Tag { kReg, kLogit, kRmAnova };
    Tag tag = Tag::kReg;
    std::size_t levels_a = 2, levels_b = 2;  // RMANOVA within-subject factors

    std::size_t conditions() const { return levels_a * levels_b; }

    static ModelFamily reg() { return {Tag::kReg}; }
    static ModelFamily logit() { return {Tag::kLogit}; }
    static ModelFamily rmanova(std::size_t a = 2, std::size_t b = 2) {
        ModelFamily f;
        f.tag = Tag::kRmAnova;
        f.levels_a = a;
        f.levels_b = b;
        return f;
    }
};

inline ModelFamily family_by_name(const std::string& name) {
    if (name == "REG") return ModelFamily::reg();
    if (name == "LOGIT") return ModelFamily::logit();
    if (name == "RMANOVA") return ModelFamily::rmanova();
    throw std::invalid_argument("family_by_name: unknown family '" + name + "'");
}

inline std::string family_name(const ModelFamily& f) {
    switch (f.tag) {
        case ModelFamily::Tag::kReg: return "REG";
        case ModelFamily::Tag::kLogit: return "LOGIT";
        case ModelFamily::Tag::kRmAnova: return "RMANOVA";
    }
    return "REG";
}

// ---------------------------------------------------------------------------
// Data generation
// ---------------------------------------------------------------------------

inline Matrix generate_design(const DesignSpec& spec, std::size_t n, RngStream& rng) {
    spec.validate();
    const std::size_t k = spec.num_predictors();
    Matrix x(n, k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto& c = spec.columns[j];
        switch (c.kind) {
            case ColumnSpec::Kind::kNormal: {
                auto v = sample_normal(c.mu, c.sigma, n, rng);
                for (std::size_t i = 0; i < n; ++i) x(i, j) = v[i];
                break;
            }
            case ColumnSpec::Kind::kCategorical: {
                auto v = sample_categorical(c.levels, n, rng);
                for (std::size_t i = 0; i < n; ++i) x(i, j) = v[i];
                break;
            }
            case ColumnSpec::Kind::kProduct:
                for (std::size_t i = 0; i < n; ++i)
                    x(i, j) = x(i, c.factor_a - 1) * x(i, c.factor_b - 1);
                break;
        }
    }
    return x;
}

// Linear response y = X beta + e with configurable error scale.
inline std::vector<double> generate_linear_response(const Matrix& x,
                                                    const std::vector<double>& beta,
                                                    RngStream& rng,
                                                    double error_sigma = 1.0) {
    if (x.cols() != beta.size())
        throw std::invalid_argument("generate_linear_response: dimension mismatch");
    auto y = linalg::multiply(x, beta);
    for (auto& v : y) v += error_sigma * rng.next_normal();
    return y;
}

inline std::vector<double> generate_logit_response(const Matrix& x,
                                                   const std::vector<double>& beta,
                                                   RngStream& rng) {
    if (x.cols() != beta.size())
        throw std::invalid_argument("generate_logit_response: dimension mismatch");
    auto eta = linalg::multiply(x, beta);
    std::vector<double> y(eta.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-eta[i]));
        y[i] = rng.next_uniform() < p ? 1.0 : 0.0;
    }
    return y;
}

// Condition design rows for the within-subject layout: column 1 carries the
// factor-A level code, column 2 the factor-B code, product columns multiply
// the referenced entries, and remaining normal columns sit at their mean 0.
// Level codes are evenly spaced on [-1, 1].
inline Matrix rmanova_condition_rows(const DesignSpec& spec, const ModelFamily& family) {
    const std::size_t k = spec.num_predictors();
    if (k < 2) throw std::invalid_argument("rmanova_condition_rows: need k >= 2");
    auto codes = [](std::size_t levels) {
        std::vector<double> c(levels);
        if (levels == 1) {
            c[0] = 0.0;
            return c;
        }
        for (std::size_t i = 0; i < levels; ++i)
            c[i] = -1.0 + 2.0 * static_cast<double>(i) / (levels - 1);
        return c;
    };
    const auto code_a = codes(family.levels_a);
    const auto code_b = codes(family.levels_b);
    Matrix rows(family.conditions(), k);
    std::size_t r = 0;
    for (std::size_t ia = 0; ia < family.levels_a; ++ia) {
        for (std::size_t ib = 0; ib < family.levels_b; ++ib, ++r) {
            rows(r, 0) = code_a[ia];
            if (k >= 2) rows(r, 1) = code_b[ib];
            for (std::size_t j = 2; j < k; ++j) {
                const auto& c = spec.columns[j];
                if (c.kind == ColumnSpec::Kind::kProduct)
                    rows(r, j) = rows(r, c.factor_a - 1) * rows(r, c.factor_b - 1);
                else
                    rows(r, j) = 0.0;
            }
        }
    }
    return rows;
}

// Subjects x conditions response table: cell mean from the condition row,
// plus a per-subject random intercept and i.i.d. noise.
inline Matrix generate_rmanova_response(const DesignSpec& spec, const ModelFamily& family,
                                        const std::vector<double>& beta, std::size_t subjects,
                                        RngStream& rng, double error_sigma = 1.0) {
    if (spec.num_predictors() != beta.size())
        throw std::invalid_argument("generate_rmanova_response: dimension mismatch");
    const Matrix cond = rmanova_condition_rows(spec, family);
    const auto cell_means = linalg::multiply(cond, beta);
    Matrix y(subjects, cond.rows());
    for (std::size_t i = 0; i < subjects; ++i) {
        const double u = rng.next_normal();  // subject intercept
        for (std::size_t c = 0; c < cond.rows(); ++c)
            y(i, c) = cell_means[c] + u + error_sigma * rng.next_normal();
    }
    return y;
}

// ---------------------------------------------------------------------------
// Ordinary least squares
// ---------------------------------------------------------------------------

struct OlsFit {
    std::vector<double> coefficients;  // [intercept, b_1..b_k]
    Matrix covariance;
    double rss = 0.0;
    double sigma2 = 0.0;
    double df_residual = 0.0;
};

// Least squares with an always-included intercept column.
inline OlsFit fit_ols(const Matrix& x, const std::vector<double>& y) {
    const std::size_t n = x.rows(), k = x.cols();
    if (y.size() != n) throw std::invalid_argument("fit_ols: y length mismatch");
    if (n <= k + 1) throw std::invalid_argument("fit_ols: need N > k + 1");
    Matrix xd(n, k + 1);
    for (std::size_t i = 0; i < n; ++i) {
        xd(i, 0) = 1.0;
        for (std::size_t j = 0; j < k; ++j) xd(i, j + 1) = x(i, j);
    }
    const Matrix xtx = linalg::gram(xd);
    const auto xty = linalg::tmultiply(xd, y);
    Matrix lower;
    if (!linalg::cholesky(xtx, lower))
        throw singular_fit_error("fit_ols: rank-deficient design");
    OlsFit fit;
    fit.coefficients = linalg::cholesky_solve(lower, xty);
    const auto yhat = linalg::multiply(xd, fit.coefficients);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - yhat[i];
        fit.rss += r * r;
    }
    fit.df_residual = static_cast<double>(n - (k + 1));
    fit.sigma2 = fit.rss / fit.df_residual;
    Matrix xtx_inv;
    if (!linalg::spd_inverse(xtx, xtx_inv))
        throw singular_fit_error("fit_ols: rank-deficient design");
    fit.covariance = Matrix(k + 1, k + 1);
    for (std::size_t i = 0; i <= k; ++i)
        for (std::size_t j = 0; j <= k; ++j) fit.covariance(i, j) = fit.sigma2 * xtx_inv(i, j);
    return fit;
}

// Nested-model F-test; `q` tested coefficients dropped from the full model.
inline double partial_f_test(const OlsFit& full, const OlsFit& reduced, std::size_t q) {
    if (q == 0) throw std::invalid_argument("partial_f_test: q must be >= 1");
    if (full.rss <= 0.0) return 0.0;  // perfect fit
    const double f = ((reduced.rss - full.rss) / static_cast<double>(q)) /
                     (full.rss / full.df_residual);
    if (f <= 0.0) return 1.0;
    return 1.0 - f_cdf(f, static_cast<double>(q), full.df_residual);
}

// Two-sided coefficient t-test; `index` is the 1-based predictor index.
inline double coefficient_t_test(const OlsFit& fit, std::size_t index) {
    if (index == 0 || index >= fit.coefficients.size())
        throw std::invalid_argument("coefficient_t_test: index out of range");
    const double se = std::sqrt(fit.covariance(index, index));
    if (se == 0.0) return fit.coefficients[index] == 0.0 ? 1.0 : 0.0;
    const double t = fit.coefficients[index] / se;
    return 2.0 * (1.0 - t_cdf(std::fabs(t), fit.df_residual));
}

// ---------------------------------------------------------------------------
// Logistic regression (IRLS)
// ---------------------------------------------------------------------------

struct LogisticFit {
    std::vector<double> coefficients;  // [intercept, b_1..b_k]
    Matrix covariance;                 // inverse Fisher information
    bool converged = false;
    int iterations = 0;
};

inline LogisticFit fit_logistic_irls(const Matrix& x, const std::vector<double>& y,
                                     int max_iter = 50, double tol = 1e-8) {
    const std::size_t n = x.rows(), k = x.cols();
    if (y.size() != n) throw std::invalid_argument("fit_logistic_irls: y length mismatch");
    for (double v : y)
        if (v != 0.0 && v != 1.0)
            throw std::invalid_argument("fit_logistic_irls: y must be binary");
    Matrix xd(n, k + 1);
    for (std::size_t i = 0; i < n; ++i) {
        xd(i, 0) = 1.0;
        for (std::size_t j = 0; j < k; ++j) xd(i, j + 1) = x(i, j);
    }
    LogisticFit fit;
    fit.coefficients.assign(k + 1, 0.0);
    Matrix info(k + 1, k + 1);
    for (int it = 0; it < max_iter; ++it) {
        fit.iterations = it + 1;
        auto eta = linalg::multiply(xd, fit.coefficients);
        info = Matrix(k + 1, k + 1);
        std::vector<double> grad(k + 1, 0.0);
        double wsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = 1.0 / (1.0 + std::exp(-eta[i]));
            const double w = p * (1.0 - p);
            wsum += w;
            const double r = y[i] - p;
            for (std::size_t a = 0; a <= k; ++a) {
                grad[a] += xd(i, a) * r;
                for (std::size_t b = a; b <= k; ++b) info(a, b) += w * xd(i, a) * xd(i, b);
            }
        }
        for (std::size_t a = 0; a <= k; ++a)
            for (std::size_t b = 0; b < a; ++b) info(a, b) = info(b, a);
        // Weights collapsing toward zero signals (quasi-)separation.
        if (wsum < 1e-8 * static_cast<double>(n)) return fit;
        std::vector<double> step;
        if (!linalg::spd_solve(info, grad, step)) return fit;
        double max_change = 0.0;
        for (std::size_t a = 0; a <= k; ++a) {
            fit.coefficients[a] += step[a];
            max_change = std::max(max_change, std::fabs(step[a]));
        }
        if (!std::isfinite(max_change) || std::fabs(fit.coefficients[0]) > 1e4) return fit;
        if (max_change < tol) {
            fit.converged = true;
            break;
        }
    }
    if (!fit.converged) return fit;
    if (!linalg::spd_inverse(info, fit.covariance)) fit.converged = false;
    return fit;
}

// ---------------------------------------------------------------------------
// Wald test
// ---------------------------------------------------------------------------

// W = b^T Sigma_b^{-1} b over the tested coefficient subvector; coefficient
// layout is [intercept, b_1..b_k] so a 1-based predictor index maps directly.
inline double wald_test(const std::vector<double>& coefficients, const Matrix& covariance,
                        const std::set<std::size_t>& tested_indices) {
    if (tested_indices.empty()) throw std::invalid_argument("wald_test: empty index set");
    const std::size_t q = tested_indices.size();
    std::vector<std::size_t> idx(tested_indices.begin(), tested_indices.end());
    std::vector<double> b(q);
    Matrix sub(q, q);
    for (std::size_t a = 0; a < q; ++a) {
        if (idx[a] >= coefficients.size())
            throw std::invalid_argument("wald_test: index out of range");
        b[a] = coefficients[idx[a]];
        for (std::size_t c = 0; c < q; ++c) sub(a, c) = covariance(idx[a], idx[c]);
    }
    std::vector<double> solved;
    if (!linalg::spd_solve(sub, b, solved))
        throw degenerate_test_error("wald_test: singular covariance submatrix");
    double w = 0.0;
    for (std::size_t a = 0; a < q; ++a) w += b[a] * solved[a];
    if (w < 0.0) w = 0.0;
    return 1.0 - chisq_cdf(w, static_cast<double>(q));
}

// ---------------------------------------------------------------------------
// Within-subjects two-factor RMANOVA
// ---------------------------------------------------------------------------

struct RmAnovaResult {
    double p_factor_a = 1.0;
    double p_factor_b = 1.0;
    double p_interaction = 1.0;
    double f_factor_a = 0.0;
    double f_factor_b = 0.0;
    double f_interaction = 0.0;
};

// Classical within-subjects decomposition: each effect is tested against
// its own effect-by-subject interaction mean square.
inline RmAnovaResult rmanova_f_test(const Matrix& responses, std::size_t levels_a,
                                    std::size_t levels_b) {
    const std::size_t n = responses.rows();
    const std::size_t m = responses.cols();
    if (m != levels_a * levels_b)
        throw std::invalid_argument("rmanova_f_test: layout does not match columns");
    if (n < 2) throw std::invalid_argument("rmanova_f_test: need at least 2 subjects");
    const double a = static_cast<double>(levels_a), b = static_cast<double>(levels_b);
    const double nn = static_cast<double>(n);

    // Cell layout: column index c = ia * levels_b + ib.
    double grand = 0.0;
    std::vector<double> mean_a(levels_a, 0.0), mean_b(levels_b, 0.0), mean_s(n, 0.0);
    Matrix mean_ab(levels_a, levels_b);
    Matrix mean_as(levels_a, n), mean_bs(levels_b, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t ia = 0; ia < levels_a; ++ia) {
            for (std::size_t ib = 0; ib < levels_b; ++ib) {
                const double v = responses(i, ia * levels_b + ib);
                grand += v;
                mean_a[ia] += v;
                mean_b[ib] += v;
                mean_s[i] += v;
                mean_ab(ia, ib) += v;
                mean_as(ia, i) += v;
                mean_bs(ib, i) += v;
            }
        }
    }
    grand /= (nn * a * b);
    for (auto& v : mean_a) v /= (nn * b);
    for (auto& v : mean_b) v /= (nn * a);
    for (auto& v : mean_s) v /= (a * b);
    for (std::size_t ia = 0; ia < levels_a; ++ia)
        for (std::size_t ib = 0; ib < levels_b; ++ib) mean_ab(ia, ib) /= nn;
    for (std::size_t ia = 0; ia < levels_a; ++ia)
        for (std::size_t i = 0; i < n; ++i) mean_as(ia, i) /= b;
    for (std::size_t ib = 0; ib < levels_b; ++ib)
        for (std::size_t i = 0; i < n; ++i) mean_bs(ib, i) /= a;

    double ss_a = 0.0, ss_b = 0.0, ss_ab = 0.0, ss_as = 0.0, ss_bs = 0.0, ss_abs = 0.0;
    for (std::size_t ia = 0; ia < levels_a; ++ia) {
        const double d = mean_a[ia] - grand;
        ss_a += nn * b * d * d;
    }
    for (std::size_t ib = 0; ib < levels_b; ++ib) {
        const double d = mean_b[ib] - grand;
        ss_b += nn * a * d * d;
    }
    for (std::size_t ia = 0; ia < levels_a; ++ia)
        for (std::size_t ib = 0; ib < levels_b; ++ib) {
            const double d = mean_ab(ia, ib) - mean_a[ia] - mean_b[ib] + grand;
            ss_ab += nn * d * d;
        }
    for (std::size_t ia = 0; ia < levels_a; ++ia)
        for (std::size_t i = 0; i < n; ++i) {
            const double d = mean_as(ia, i) - mean_a[ia] - mean_s[i] + grand;
            ss_as += b * d * d;
        }
    for (std::size_t ib = 0; ib < levels_b; ++ib)
        for (std::size_t i = 0; i < n; ++i) {
            const double d = mean_bs(ib, i) - mean_b[ib] - mean_s[i] + grand;
            ss_bs += a * d * d;
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ia = 0; ia < levels_a; ++ia)
            for (std::size_t ib = 0; ib < levels_b; ++ib) {
                const double d = responses(i, ia * levels_b + ib) - mean_ab(ia, ib) -
                                 mean_as(ia, i) - mean_bs(ib, i) + mean_a[ia] + mean_b[ib] +
                                 mean_s[i] - grand;
                ss_abs += d * d;
            }

    const double df_a = a - 1.0, df_b = b - 1.0, df_ab = (a - 1.0) * (b - 1.0);
    const double df_as = df_a * (nn - 1.0), df_bs = df_b * (nn - 1.0);
    const double df_abs = df_ab * (nn - 1.0);

    RmAnovaResult out;
    auto f_and_p = [](double ss_eff, double df_eff, double ss_err, double df_err, double& f) {
        const double ms_err = ss_err / df_err;
        if (ss_eff <= 0.0) {
            f = 0.0;
            return 1.0;  // no condition effect at all
        }
        if (ms_err <= 0.0) {
            f = std::numeric_limits<double>::infinity();
            return 0.0;  // zero error mean square under a nonzero effect
        }
        f = (ss_eff / df_eff) / ms_err;
        return 1.0 - f_cdf(f, df_eff, df_err);
    };
    out.p_factor_a = f_and_p(ss_a, df_a, ss_as, df_as, out.f_factor_a);
    out.p_factor_b = f_and_p(ss_b, df_b, ss_bs, df_bs, out.f_factor_b);
    out.p_interaction = f_and_p(ss_ab, df_ab, ss_abs, df_abs, out.f_interaction);
    return out;
}

// Which within-subject effect a tested coefficient maps to, derived from
// the factors its design column depends on (column 1 -> A, column 2 -> B,
// products of both -> interaction).
enum class RmEffect { kFactorA, kFactorB, kInteraction };

inline RmEffect rmanova_effect_for_index(const DesignSpec& spec, std::size_t index) {
    if (index == 1) return RmEffect::kFactorA;
    if (index == 2) return RmEffect::kFactorB;
    const auto& col = spec.columns.at(index - 1);
    if (col.kind == ColumnSpec::Kind::kProduct) {
        auto depends = [&spec](std::size_t idx, auto&& self) -> std::pair<bool, bool> {
            if (idx == 1) return {true, false};
            if (idx == 2) return {false, true};
            const auto& c = spec.columns.at(idx - 1);
            if (c.kind != ColumnSpec::Kind::kProduct) return {false, false};
            const auto l = self(c.factor_a, self);
            const auto r = self(c.factor_b, self);
            return {l.first || r.first, l.second || r.second};
        };
        const auto [on_a, on_b] = depends(index, depends);
        if (on_a && on_b) return RmEffect::kInteraction;
        if (on_a) return RmEffect::kFactorA;
        if (on_b) return RmEffect::kFactorB;
    }
    throw std::invalid_argument(
        "rmanova hypothesis index " + std::to_string(index) +
        " does not map onto a within-subject factor effect");
}

// Bonferroni-corrected min-p over the effects targeted by the hypothesis.
inline double rmanova_hypothesis_p(const RmAnovaResult& result, const DesignSpec& spec,
                                   const std::set<std::size_t>& tested_indices) {
    std::set<RmEffect> effects;
    for (auto idx : tested_indices) effects.insert(rmanova_effect_for_index(spec, idx));
    double pmin = 1.0;
    for (auto e : effects) {
        switch (e) {
            case RmEffect::kFactorA: pmin = std::min(pmin, result.p_factor_a); break;
            case RmEffect::kFactorB: pmin = std::min(pmin, result.p_factor_b); break;
            case RmEffect::kInteraction: pmin = std::min(pmin, result.p_interaction); break;
        }
    }
    return std::min(1.0, pmin * static_cast<double>(effects.size()));
}

}  // namespace powermap
