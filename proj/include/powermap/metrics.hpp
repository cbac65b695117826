#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "powermap/features.hpp"
#include "powermap/json_text.hpp"
#include "powermap/rng.hpp"

namespace powermap {

// ---------------------------------------------------------------------------
// Classification scores
// ---------------------------------------------------------------------------

inline double f1_score(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw std::invalid_argument("f1_score: need equal nonempty label vectors");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == 1 && truth[i] == 1) ++tp;
        if (predicted[i] == 1 && truth[i] == 0) ++fp;
        if (predicted[i] == 0 && truth[i] == 1) ++fn;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    if (denom == 0.0) return 0.0;
    return 2.0 * static_cast<double>(tp) / denom;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw std::invalid_argument("accuracy: need equal nonempty label vectors");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

// ---------------------------------------------------------------------------
// Divergences
// ---------------------------------------------------------------------------

// Normalize raw power values into a probability vector.
inline std::vector<double> power_vector_to_distribution(const std::vector<double>& powers) {
    if (powers.empty())
        throw std::invalid_argument("power_vector_to_distribution: empty vector");
    std::vector<double> out(powers.size());
    double total = 0.0;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        out[i] = powers[i] + 1e-12;
        total += out[i];
    }
    for (auto& v : out) v /= total;
    return out;
}

inline double kl_divergence(const std::vector<double>& a, const std::vector<double>& b,
                            double epsilon = 1e-12) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("kl_divergence: need equal nonempty vectors");
    // Epsilon-smooth both sides so disjoint supports stay finite.
    const double n_eps = epsilon * static_cast<double>(a.size());
    double kl = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = (a[i] + epsilon) / (1.0 + n_eps);
        const double bi = (b[i] + epsilon) / (1.0 + n_eps);
        if (ai > 0.0) kl += ai * std::log(ai / bi);
    }
    return kl;
}

// Symmetrized KL, the published formula; not bounded by ln 2.
inline double js_divergence(const std::vector<double>& a, const std::vector<double>& b,
                            double epsilon = 1e-12) {
    return 0.5 * (kl_divergence(a, b, epsilon) + kl_divergence(b, a, epsilon));
}

// Midpoint-mixture form, bounded by ln 2; available behind this call.
inline double js_divergence_midpoint(const std::vector<double>& a, const std::vector<double>& b,
                                     double epsilon = 1e-12) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("js_divergence_midpoint: need equal nonempty vectors");
    std::vector<double> mid(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
    return 0.5 * (kl_divergence(a, mid, epsilon) + kl_divergence(b, mid, epsilon));
}

// ---------------------------------------------------------------------------
// Confidence intervals (percentile bootstrap)
// ---------------------------------------------------------------------------

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

namespace detail {

inline double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(values.size() - 1, lo + 1);
    const double frac = pos - std::floor(pos);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace detail

// 95% percentile bootstrap of the mean of `samples` (1000 resamples).
inline Interval confidence_interval_95(const std::vector<double>& samples, RngStream& rng,
                                       int resamples = 1000) {
    if (samples.size() < 2)
        throw std::invalid_argument("confidence_interval_95: need >= 2 samples");
    std::vector<double> means(resamples);
    for (int r = 0; r < resamples; ++r) {
        double acc = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i)
            acc += samples[rng.next_index(samples.size())];
        means[r] = acc / static_cast<double>(samples.size());
    }
    return {detail::percentile(means, 0.025), detail::percentile(means, 0.975)};
}

// Bootstrap CI for a label metric: resamples (prediction, truth) pairs.
template <typename MetricFn>
inline Interval bootstrap_label_ci(const std::vector<int>& predicted,
                                   const std::vector<int>& truth, MetricFn metric,
                                   RngStream& rng, int resamples = 1000) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw std::invalid_argument("bootstrap_label_ci: need equal nonempty vectors");
    std::vector<double> values(resamples);
    std::vector<int> p(predicted.size()), t(truth.size());
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            const std::size_t j = rng.next_index(predicted.size());
            p[i] = predicted[j];
            t[i] = truth[j];
        }
        values[r] = metric(p, t);
    }
    return {detail::percentile(values, 0.025), detail::percentile(values, 0.975)};
}

// Same, for real-valued prediction/truth pairs (regression metrics).
template <typename MetricFn>
inline Interval bootstrap_real_ci(const std::vector<double>& predicted,
                                  const std::vector<double>& truth, MetricFn metric,
                                  RngStream& rng, int resamples = 1000) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw std::invalid_argument("bootstrap_real_ci: need equal nonempty vectors");
    std::vector<double> values(resamples);
    std::vector<double> p(predicted.size()), t(truth.size());
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            const std::size_t j = rng.next_index(predicted.size());
            p[i] = predicted[j];
            t[i] = truth[j];
        }
        values[r] = metric(p, t);
    }
    return {detail::percentile(values, 0.025), detail::percentile(values, 0.975)};
}

// ---------------------------------------------------------------------------
// Evaluation reports
// ---------------------------------------------------------------------------

struct MetricValue {
    double value = 0.0;
    Interval ci;
    bool has_ci = false;
};

struct EvalReport {
    std::string task;       // "classify" | "regress" | "cascade-c1" | ...
    std::string predictor;  // "pnn", "transfer", "rand", "cluster", ...
    std::map<std::string, MetricValue> metrics;
    std::uint64_t compute_calls_used = 0;  // simulation calls behind the training rows
    std::uint64_t compute_calls_full = 0;  // calls to map the full grid brute force
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    double boundary = 0.8;
    double train_fraction = 0.0;
    std::uint64_t seed = 0;
    std::string dataset_id;
    std::string config_hash;
    bool degenerate = false;  // e.g. an empty cascade stage

    double call_ratio() const {
        return compute_calls_full == 0
                   ? 0.0
                   : static_cast<double>(compute_calls_used) /
                         static_cast<double>(compute_calls_full);
    }
};

inline std::string report_to_json(const EvalReport& r) {
    std::string out = "{\n";
    out += "  \"task\": " + jsontext::quote(r.task) + ",\n";
    out += "  \"predictor\": " + jsontext::quote(r.predictor) + ",\n";
    out += "  \"metrics\": {";
    bool first = true;
    for (const auto& [name, mv] : r.metrics) {
        if (!first) out += ", ";
        first = false;
        out += jsontext::quote(name) + ": {\"value\": " + jsontext::g17(mv.value);
        if (mv.has_ci)
            out += ", \"ci95\": [" + jsontext::g17(mv.ci.lo) + "," + jsontext::g17(mv.ci.hi) +
                   "]";
        out += "}";
    }
    out += "},\n";
    out += "  \"compute_calls_used\": " + std::to_string(r.compute_calls_used) + ",\n";
    out += "  \"compute_calls_full\": " + std::to_string(r.compute_calls_full) + ",\n";
    out += "  \"call_ratio\": " + jsontext::g17(r.call_ratio()) + ",\n";
    out += "  \"train_rows\": " + std::to_string(r.train_rows) + ",\n";
    out += "  \"test_rows\": " + std::to_string(r.test_rows) + ",\n";
    out += "  \"boundary\": " + jsontext::g17(r.boundary) + ",\n";
    out += "  \"train_fraction\": " + jsontext::g17(r.train_fraction) + ",\n";
    out += "  \"seed\": " + std::to_string(r.seed) + ",\n";
    out += "  \"dataset_id\": " + jsontext::quote(r.dataset_id) + ",\n";
    out += "  \"config_hash\": " + jsontext::quote(r.config_hash) + ",\n";
    out += "  \"degenerate\": " + std::string(r.degenerate ? "true" : "false") + "\n";
    out += "}\n";
    return out;
}

// ---------------------------------------------------------------------------
// Cascade evaluation
// ---------------------------------------------------------------------------

struct CascadeResult {
    EvalReport c1;  // scored on the full test set at the high boundary
    EvalReport c2;  // scored on rows C1 predicted non-high, at the low boundary
    std::vector<std::size_t> c2_rows;
};

// C1 finds power > hi_boundary on everything; C2 is scored only where C1
// said "not high". Reports stay separate.
inline CascadeResult cascade_evaluate(const std::vector<int>& c1_predictions,
                                      const std::vector<int>& c2_predictions,
                                      const std::vector<double>& true_powers,
                                      double hi_boundary, double lo_boundary,
                                      RngStream& rng) {
    if (c1_predictions.size() != true_powers.size() ||
        c2_predictions.size() != true_powers.size())
        throw std::invalid_argument("cascade_evaluate: length mismatch");
    CascadeResult out;
    std::vector<int> truth_hi(true_powers.size());
    for (std::size_t i = 0; i < true_powers.size(); ++i)
        truth_hi[i] = classify_power(true_powers[i], hi_boundary);
    out.c1.task = "cascade-c1";
    out.c1.boundary = hi_boundary;
    out.c1.test_rows = true_powers.size();
    MetricValue f1;
    f1.value = f1_score(c1_predictions, truth_hi);
    RngStream ci_rng = rng.child(1);
    f1.ci = bootstrap_label_ci(c1_predictions, truth_hi,
                               [](const auto& p, const auto& t) { return f1_score(p, t); },
                               ci_rng);
    f1.has_ci = true;
    out.c1.metrics["f1"] = f1;
    MetricValue acc;
    acc.value = accuracy(c1_predictions, truth_hi);
    out.c1.metrics["accuracy"] = acc;

    for (std::size_t i = 0; i < c1_predictions.size(); ++i)
        if (c1_predictions[i] == 0) out.c2_rows.push_back(i);
    out.c2.task = "cascade-c2";
    out.c2.boundary = lo_boundary;
    out.c2.test_rows = out.c2_rows.size();
    if (out.c2_rows.empty()) {
        out.c2.degenerate = true;
        return out;
    }
    std::vector<int> p2, t2;
    p2.reserve(out.c2_rows.size());
    t2.reserve(out.c2_rows.size());
    for (auto i : out.c2_rows) {
        p2.push_back(c2_predictions[i]);
        t2.push_back(classify_power(true_powers[i], lo_boundary));
    }
    MetricValue f1b;
    f1b.value = f1_score(p2, t2);
    if (p2.size() >= 2) {
        RngStream ci2 = rng.child(2);
        f1b.ci = bootstrap_label_ci(
            p2, t2, [](const auto& p, const auto& t) { return f1_score(p, t); }, ci2);
        f1b.has_ci = true;
    }
    out.c2.metrics["f1"] = f1b;
    MetricValue acc2;
    acc2.value = accuracy(p2, t2);
    out.c2.metrics["accuracy"] = acc2;
    return out;
}

}  // namespace powermap
