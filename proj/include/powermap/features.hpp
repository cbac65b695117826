#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "powermap/matrix.hpp"
#include "powermap/power_engine.hpp"

namespace powermap {

// N * sqrt(sum of squared coefficients); the engineered feature with the
// strongest raw correlation to power.
inline double scaled_weight(const std::vector<double>& beta, double n) {
    double ss = 0.0;
    for (double b : beta) ss += b * b;
    return n * std::sqrt(ss);
}

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

struct PcaModel {
    std::vector<double> means;
    std::vector<double> stds;            // constant columns carry std 1
    Matrix components;                   // p x r, orthonormal columns
    std::vector<double> explained_ratios;  // length r, nonincreasing
    double variance_target = 0.99;

    std::size_t input_width() const { return means.size(); }
    std::size_t retained() const { return components.cols(); }
};

inline PcaModel pca_fit(const Matrix& x, double variance_target) {
    if (x.rows() < 2 || x.cols() == 0)
        throw std::invalid_argument("pca_fit: need at least 2 rows and 1 column");
    if (variance_target <= 0.0 || variance_target > 1.0)
        throw std::invalid_argument("pca_fit: variance_target in (0,1]");
    const std::size_t n = x.rows(), p = x.cols();
    PcaModel model;
    model.variance_target = variance_target;
    model.means.resize(p);
    model.stds.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += x(i, j);
        m /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x(i, j) - m;
            ss += d * d;
        }
        model.means[j] = m;
        const double sd = std::sqrt(ss / static_cast<double>(n));
        model.stds[j] = sd > 0.0 ? sd : 1.0;
    }
    Matrix z(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            z(i, j) = (x(i, j) - model.means[j]) / model.stds[j];
    Matrix cov = linalg::gram(z);
    for (auto& v : cov.data()) v /= static_cast<double>(n - 1);
    auto eig = linalg::jacobi_eigen(cov);
    // Numerical floor: tiny negative eigenvalues are zero variance.
    double total = 0.0;
    for (auto& v : eig.values) {
        if (v < 0.0) v = 0.0;
        total += v;
    }
    if (total <= 0.0) total = 1.0;
    std::size_t r = p;
    double cum = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        cum += eig.values[j] / total;
        if (cum >= variance_target - 1e-12) {
            r = j + 1;
            break;
        }
    }
    model.components = Matrix(p, r);
    model.explained_ratios.resize(r);
    for (std::size_t j = 0; j < r; ++j) {
        model.explained_ratios[j] = eig.values[j] / total;
        // Deterministic sign: largest-magnitude entry positive.
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            if (std::fabs(eig.vectors(i, j)) > best) {
                best = std::fabs(eig.vectors(i, j));
                arg = i;
            }
        }
        const double sign = eig.vectors(arg, j) >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < p; ++i) model.components(i, j) = sign * eig.vectors(i, j);
    }
    return model;
}

inline Matrix pca_transform(const PcaModel& model, const Matrix& x) {
    if (x.cols() != model.input_width())
        throw std::invalid_argument("pca_transform: column width mismatch");
    const std::size_t n = x.rows(), p = x.cols(), r = model.retained();
    Matrix out(n, r);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < p; ++c)
                s += (x(i, c) - model.means[c]) / model.stds[c] * model.components(c, j);
            out(i, j) = s;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Surrogate feature assembly
// ---------------------------------------------------------------------------

// Base feature block {beta_1..k, N, N*sigma} for PCA fitting and transforms.
inline Matrix base_features(const std::vector<PowerRecord>& records) {
    if (records.empty()) throw std::invalid_argument("base_features: empty records");
    const std::size_t k = records[0].point.beta.size();
    Matrix x(records.size(), k + 2);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& p = records[i].point;
        if (p.beta.size() != k)
            throw std::invalid_argument("base_features: inconsistent predictor count");
        for (std::size_t j = 0; j < k; ++j) x(i, j) = p.beta[j];
        x(i, k) = static_cast<double>(p.sample_size);
        x(i, k + 1) = scaled_weight(p.beta, static_cast<double>(p.sample_size));
    }
    return x;
}

struct FeatureBundle {
    Matrix features;              // n x (k + 2 + r): {beta, N, Nsigma, PC}
    std::vector<double> powers;   // regression labels
    std::vector<int> labels;      // classification labels at `boundary`
    PcaModel pca;
    std::size_t num_predictors = 0;
    double boundary = 0.8;
};

inline std::vector<std::string> feature_names(std::size_t k, std::size_t r) {
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= k; ++j) names.push_back("beta_" + std::to_string(j));
    names.push_back("N");
    names.push_back("scaled_weight");
    for (std::size_t j = 1; j <= r; ++j) names.push_back("pc_" + std::to_string(j));
    return names;
}

// Well-powered is strictly "power > boundary".
inline int classify_power(double power, double boundary) {
    return power > boundary ? 1 : 0;
}

// Assemble {beta, N, Nsigma, PC} rows for every record, with the PCA fit on
// the base features of `pca_fit_rows` only (the training split) so held-out
// rows never leak into the standardization or the components.
inline FeatureBundle assemble_features(const std::vector<PowerRecord>& records,
                                       const std::vector<std::size_t>& pca_fit_rows,
                                       double boundary, double variance_target = 0.99) {
    if (records.empty()) throw std::invalid_argument("assemble_features: empty records");
    if (pca_fit_rows.empty())
        throw std::invalid_argument("assemble_features: empty PCA fit split");
    const Matrix base = base_features(records);
    Matrix train(pca_fit_rows.size(), base.cols());
    for (std::size_t i = 0; i < pca_fit_rows.size(); ++i) {
        if (pca_fit_rows[i] >= records.size())
            throw std::invalid_argument("assemble_features: split index out of range");
        for (std::size_t j = 0; j < base.cols(); ++j) train(i, j) = base(pca_fit_rows[i], j);
    }
    FeatureBundle out;
    out.pca = pca_fit(train, variance_target);
    out.num_predictors = records[0].point.beta.size();
    out.boundary = boundary;
    const Matrix pcs = pca_transform(out.pca, base);
    out.features = Matrix(records.size(), base.cols() + pcs.cols());
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = 0; j < base.cols(); ++j) out.features(i, j) = base(i, j);
        for (std::size_t j = 0; j < pcs.cols(); ++j)
            out.features(i, base.cols() + j) = pcs(i, j);
    }
    out.powers.resize(records.size());
    out.labels.resize(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        out.powers[i] = records[i].power;
        out.labels[i] = classify_power(records[i].power, boundary);
    }
    return out;
}

// Same assembly against a previously fitted PCA (e.g. scoring new rows).
inline FeatureBundle assemble_features(const std::vector<PowerRecord>& records,
                                       const PcaModel& pca, double boundary) {
    if (records.empty()) throw std::invalid_argument("assemble_features: empty records");
    const Matrix base = base_features(records);
    const Matrix pcs = pca_transform(pca, base);
    FeatureBundle out;
    out.pca = pca;
    out.num_predictors = records[0].point.beta.size();
    out.boundary = boundary;
    out.features = Matrix(records.size(), base.cols() + pcs.cols());
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = 0; j < base.cols(); ++j) out.features(i, j) = base(i, j);
        for (std::size_t j = 0; j < pcs.cols(); ++j)
            out.features(i, base.cols() + j) = pcs(i, j);
    }
    out.powers.resize(records.size());
    out.labels.resize(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        out.powers[i] = records[i].power;
        out.labels[i] = classify_power(records[i].power, boundary);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Correlation report
// ---------------------------------------------------------------------------

struct FeatureCorrelation {
    std::string name;
    double r = 0.0;
    bool degenerate = false;  // zero-variance feature
};

inline double pearson_r(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("pearson_r: need two equal-length vectors");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

// Pearson correlation of every feature column against the true power.
inline std::vector<FeatureCorrelation> correlation_report(const FeatureBundle& bundle) {
    if (bundle.powers.size() < 3)
        throw std::invalid_argument("correlation_report: need at least 3 rows");
    const std::size_t k = bundle.num_predictors;
    const std::size_t r = bundle.features.cols() - k - 2;
    const auto names = feature_names(k, r);
    std::vector<FeatureCorrelation> report;
    report.reserve(names.size());
    for (std::size_t j = 0; j < bundle.features.cols(); ++j) {
        FeatureCorrelation fc;
        fc.name = names[j];
        const auto col = bundle.features.col(j);
        double var = 0.0;
        const double mean =
            std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
        for (double v : col) var += (v - mean) * (v - mean);
        if (var <= 0.0) {
            fc.degenerate = true;
            fc.r = 0.0;
        } else {
            fc.r = pearson_r(col, bundle.powers);
        }
        report.push_back(fc);
    }
    return report;
}

}  // namespace powermap
