#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "powermap/rng.hpp"

namespace powermap {

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

inline std::vector<double> sample_normal(double mu, double sigma, std::size_t n,
                                         RngStream& rng) {
    if (sigma < 0.0) throw std::invalid_argument("sample_normal: sigma must be >= 0");
    std::vector<double> out(n);
    if (sigma == 0.0) {
        for (auto& v : out) v = mu;
        return out;
    }
    for (auto& v : out) v = mu + sigma * rng.next_normal();
    return out;
}

inline std::vector<double> sample_categorical(const std::vector<double>& levels,
                                              std::size_t n, RngStream& rng) {
    if (levels.empty()) throw std::invalid_argument("sample_categorical: empty levels");
    std::vector<double> out(n);
    for (auto& v : out) v = levels[rng.next_index(levels.size())];
    return out;
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

// Lanczos approximation (g = 7, 9 terms), accurate to ~1e-15 for x > 0.
inline double log_gamma(double x) {
    static const double coef[9] = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x <= 0.0) throw std::invalid_argument("log_gamma: requires x > 0");
    if (x < 0.5) {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
    }
    x -= 1.0;
    double a = coef[0];
    const double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += coef[i] / (x + i);
    return 0.5 * std::log(2.0 * M_PI) + (x + 0.5) * std::log(t) - t + std::log(a);
}

namespace detail {

inline constexpr int kMaxLentzIter = 300;

// Continued fraction for the regularized incomplete beta, modified Lentz.
inline double ibeta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxLentzIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

// Lower regularized incomplete gamma P(a, x), series expansion.
inline double igamma_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Upper regularized incomplete gamma Q(a, x), continued fraction (Lentz).
inline double igamma_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxLentzIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double inc_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("inc_beta: a, b must be > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::ibeta_cf(a, b, x) / a;
    }
    return 1.0 - front * detail::ibeta_cf(b, a, 1.0 - x) / b;
}

// Lower regularized incomplete gamma P(a, x).
inline double inc_gamma_lower(double a, double x) {
    if (a <= 0.0) throw std::invalid_argument("inc_gamma_lower: a must be > 0");
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return detail::igamma_series(a, x);
    return 1.0 - detail::igamma_cf(a, x);
}

// ---------------------------------------------------------------------------
// Central distributions
// ---------------------------------------------------------------------------

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double t_cdf(double x, double df) {
    if (df <= 0.0) throw std::invalid_argument("t_cdf: df must be > 0");
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    const double ib = inc_beta(0.5 * df, 0.5, df / (df + x * x));
    return x >= 0.0 ? 1.0 - 0.5 * ib : 0.5 * ib;
}

inline double f_cdf(double x, double df1, double df2) {
    if (df1 <= 0.0 || df2 <= 0.0) throw std::invalid_argument("f_cdf: df must be > 0");
    if (x < 0.0) throw std::invalid_argument("f_cdf: x must be >= 0");
    if (x == 0.0) return 0.0;
    return inc_beta(0.5 * df1, 0.5 * df2, df1 * x / (df1 * x + df2));
}

inline double chisq_cdf(double x, double df) {
    if (df <= 0.0) throw std::invalid_argument("chisq_cdf: df must be > 0");
    if (x < 0.0) throw std::invalid_argument("chisq_cdf: x must be >= 0");
    return inc_gamma_lower(0.5 * df, 0.5 * x);
}

inline double chisq_pdf(double x, double df) {
    if (x <= 0.0) return 0.0;
    const double h = 0.5 * df;
    return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * std::log(2.0) - log_gamma(h));
}

namespace detail {

// Bisection inverse of a monotone CDF on [lo, hi].
template <typename Cdf>
double invert_cdf(Cdf cdf, double p, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline double t_quantile(double p, double df) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("t_quantile: p in (0,1)");
    return detail::invert_cdf([df](double x) { return t_cdf(x, df); }, p, -1e8, 1e8);
}

inline double f_quantile(double p, double df1, double df2) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("f_quantile: p in (0,1)");
    return detail::invert_cdf([df1, df2](double x) { return f_cdf(x, df1, df2); }, p, 0.0, 1e8);
}

inline double chisq_quantile(double p, double df) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("chisq_quantile: p in (0,1)");
    return detail::invert_cdf([df](double x) { return chisq_cdf(x, df); }, p, 0.0, 1e8);
}

// ---------------------------------------------------------------------------
// Noncentral distributions (power oracle only; the engine simulates)
// ---------------------------------------------------------------------------

// CDF of the noncentral F via the Poisson-weighted incomplete-beta series.
inline double noncentral_f_cdf(double x, double df1, double df2, double lambda) {
    if (df1 <= 0.0 || df2 <= 0.0) throw std::invalid_argument("noncentral_f_cdf: df must be > 0");
    if (lambda < 0.0) throw std::invalid_argument("noncentral_f_cdf: lambda must be >= 0");
    if (x <= 0.0) return 0.0;
    if (lambda == 0.0) return f_cdf(x, df1, df2);
    const double y = df1 * x / (df1 * x + df2);
    const double half_lam = 0.5 * lambda;
    // Start at the Poisson mode and sweep outwards in both directions.
    const long k0 = static_cast<long>(half_lam);
    auto log_pois = [half_lam](long k) {
        return -half_lam + k * std::log(half_lam) - log_gamma(k + 1.0);
    };
    double sum = 0.0;
    const double tail_tol = 1e-14;
    for (long k = k0; k >= 0; --k) {
        const double w = std::exp(log_pois(k));
        const double term = w * inc_beta(0.5 * df1 + k, 0.5 * df2, y);
        sum += term;
        if (term < tail_tol && k < k0) break;
    }
    for (long k = k0 + 1; k < k0 + 10000; ++k) {
        const double w = std::exp(log_pois(k));
        const double term = w * inc_beta(0.5 * df1 + k, 0.5 * df2, y);
        sum += term;
        if (w < tail_tol) break;
    }
    return std::min(sum, 1.0);
}

namespace detail {

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Legendre nodes by Newton iteration from Chebyshev initial guesses.
inline const GaussLegendreRule& gauss_legendre_96() {
    static const GaussLegendreRule rule = [] {
        const int n = 96;
        GaussLegendreRule r;
        r.nodes.resize(n);
        r.weights.resize(n);
        for (int i = 0; i < n; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (z * p0 - p1) / (z * z - 1.0);
                const double z1 = z;
                z = z1 - p0 / pp;
                if (std::fabs(z - z1) < 1e-15) break;
            }
            r.nodes[i] = z;
            r.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        }
        return r;
    }();
    return rule;
}

}  // namespace detail

// CDF of the noncentral t by integrating the conditional normal probability
// over the chi-square scale variable: T = (Z + delta) / sqrt(V / df).
inline double noncentral_t_cdf(double x, double df, double delta) {
    if (df <= 0.0) throw std::invalid_argument("noncentral_t_cdf: df must be > 0");
    // P(T <= x) = E_V[ Phi(x sqrt(V/df) - delta) ], V ~ chi2_df.
    const double qlo = chisq_quantile(1e-13, df);
    const double qhi = chisq_quantile(1.0 - 1e-13, df);
    const auto& rule = detail::gauss_legendre_96();
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double v = 0.5 * (qhi - qlo) * rule.nodes[i] + 0.5 * (qhi + qlo);
        const double w = 0.5 * (qhi - qlo) * rule.weights[i];
        acc += w * normal_cdf(x * std::sqrt(v / df) - delta) * chisq_pdf(v, df);
    }
    return std::min(std::max(acc, 0.0), 1.0);
}

enum class TestKind { kT, kF };

// Exact rejection probability of the two-sided t-test / upper-tail F-test
// under the noncentral alternative.
inline double analytic_power_oracle(TestKind test, double df1, double df2,
                                    double noncentrality, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("analytic_power_oracle: alpha in (0,1)");
    if (noncentrality < 0.0)
        throw std::invalid_argument("analytic_power_oracle: noncentrality >= 0");
    if (test == TestKind::kF) {
        const double fcrit = f_quantile(1.0 - alpha, df1, df2);
        return 1.0 - noncentral_f_cdf(fcrit, df1, df2, noncentrality);
    }
    const double df = df2;  // df1 unused for the t-test
    const double tcrit = t_quantile(1.0 - 0.5 * alpha, df);
    if (noncentrality == 0.0) return alpha;
    return 1.0 - noncentral_t_cdf(tcrit, df, noncentrality) +
           noncentral_t_cdf(-tcrit, df, noncentrality);
}

// Unconditional power of the coefficient t-test in a one-predictor linear
// model with a standardized normal regressor and intercept: the design
// sum-of-squares is chi-square with N-1 df, so average the noncentral-t
// power over its distribution.
inline double reg1_ttest_power(double beta, std::size_t n_samples, double alpha) {
    if (n_samples < 4) throw std::invalid_argument("reg1_ttest_power: need N >= 4");
    const double df_chi = static_cast<double>(n_samples) - 1.0;
    const double df_t = static_cast<double>(n_samples) - 2.0;
    const int n_nodes = 64;
    double acc = 0.0;
    // Equal-probability stratification of the chi-square scale variable.
    for (int i = 0; i < n_nodes; ++i) {
        const double p = (i + 0.5) / n_nodes;
        const double w = chisq_quantile(p, df_chi);
        acc += analytic_power_oracle(TestKind::kT, 1.0, df_t,
                                     std::fabs(beta) * std::sqrt(w), alpha);
    }
    return acc / n_nodes;
}

}  // namespace powermap
