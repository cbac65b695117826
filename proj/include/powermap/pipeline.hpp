#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "powermap/baselines.hpp"
#include "powermap/dataset_io.hpp"
#include "powermap/features.hpp"
#include "powermap/metrics.hpp"
#include "powermap/run_config.hpp"
#include "powermap/surrogate.hpp"

namespace powermap {

// ---------------------------------------------------------------------------
// Split protocol shared by train / transfer / baseline / eval
// ---------------------------------------------------------------------------

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Seeded shuffle split; the split seed is independent of the simulation seed
// so splits can vary while the dataset stays fixed.
inline SplitIndices split_rows(std::size_t n, double fraction, std::uint64_t split_seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw std::invalid_argument("split_rows: fraction in (0,1)");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RngStream rng = RngStream(split_seed).child(0);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next_index(i)]);
    std::size_t train_count = static_cast<std::size_t>(fraction * static_cast<double>(n));
    train_count = std::max<std::size_t>(1, std::min(train_count, n - 1));
    SplitIndices split;
    split.train.assign(order.begin(), order.begin() + static_cast<long>(train_count));
    split.test.assign(order.begin() + static_cast<long>(train_count), order.end());
    return split;
}

namespace detail {

inline Matrix rows_of(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.set_row(i, m.row(rows[i]));
    return out;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& v, const std::vector<std::size_t>& rows) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (auto i : rows) out.push_back(v[i]);
    return out;
}

inline void fill_classification_metrics(EvalReport& report, const std::vector<int>& pred,
                                        const std::vector<int>& truth, RngStream& ci_rng) {
    MetricValue f1;
    f1.value = f1_score(pred, truth);
    f1.ci = bootstrap_label_ci(
        pred, truth, [](const auto& p, const auto& t) { return f1_score(p, t); }, ci_rng);
    f1.has_ci = true;
    report.metrics["f1"] = f1;
    MetricValue acc;
    acc.value = accuracy(pred, truth);
    report.metrics["accuracy"] = acc;
}

inline void fill_regression_metrics(EvalReport& report, const std::vector<double>& pred,
                                    const std::vector<double>& truth, RngStream& ci_rng) {
    auto js_of = [](const std::vector<double>& p, const std::vector<double>& t) {
        return js_divergence(power_vector_to_distribution(p),
                             power_vector_to_distribution(t));
    };
    MetricValue js;
    js.value = js_of(pred, truth);
    js.ci = bootstrap_real_ci(pred, truth, js_of, ci_rng);
    js.has_ci = true;
    report.metrics["js"] = js;
    MetricValue mse;
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        acc += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    mse.value = acc / static_cast<double>(pred.size());
    report.metrics["mse"] = mse;
}

inline void require_both_classes(const std::vector<int>& labels, double boundary) {
    int lo = 0, hi = 0;
    for (int l : labels) (l == 1 ? hi : lo) += 1;
    if (lo == 0 || hi == 0)
        throw std::runtime_error(
            "training split contains a single class at boundary " +
            std::to_string(boundary) + "; adjust the split seed or the sampler domain");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Train
// ---------------------------------------------------------------------------

struct TrainOutcome {
    NetworkCheckpoint checkpoint;
    EvalReport report;
    FeatureBundle bundle;
    SplitIndices split;
};

inline TrainOutcome run_train(const std::vector<PowerRecord>& records, const RunConfig& cfg) {
    if (records.size() < 10) throw std::runtime_error("train: dataset too small");
    TrainOutcome out;
    out.split = split_rows(records.size(), cfg.train_fraction, cfg.split_seed);
    out.bundle = assemble_features(records, out.split.train, cfg.boundary,
                                   cfg.variance_target);
    const FeatureSchema schema{out.bundle.num_predictors, out.bundle.pca.retained()};
    const Matrix train_x = detail::rows_of(out.bundle.features, out.split.train);
    std::vector<double> train_y;
    if (cfg.task == TaskKind::kClassify) {
        const auto labels = detail::gather(out.bundle.labels, out.split.train);
        detail::require_both_classes(labels, cfg.boundary);
        train_y.assign(labels.begin(), labels.end());
    } else {
        train_y = detail::gather(out.bundle.powers, out.split.train);
    }
    const TrainConfig tc = cfg.train_config();
    out.checkpoint = cfg.lr_sweep
                         ? train_pnn_lr_sweep(schema, train_x, train_y, tc, RngStream(cfg.seed))
                         : train_pnn(schema, train_x, train_y, tc, RngStream(cfg.seed));
    out.checkpoint.has_pca = true;
    out.checkpoint.pca = out.bundle.pca;

    out.report.task = cfg.task == TaskKind::kClassify ? "classify" : "regress";
    out.report.predictor = "pnn";
    const Matrix test_x = detail::rows_of(out.bundle.features, out.split.test);
    RngStream ci_rng = RngStream(cfg.seed).child(9001);
    if (cfg.task == TaskKind::kClassify) {
        const auto pred = predict_labels(out.checkpoint, test_x);
        const auto truth = detail::gather(out.bundle.labels, out.split.test);
        detail::fill_classification_metrics(out.report, pred, truth, ci_rng);
    } else {
        const auto pred = predict(out.checkpoint, test_x);
        const auto truth = detail::gather(out.bundle.powers, out.split.test);
        detail::fill_regression_metrics(out.report, pred, truth, ci_rng);
    }
    out.report.compute_calls_used = out.split.train.size();
    out.report.compute_calls_full = records.size();
    out.report.train_rows = out.split.train.size();
    out.report.test_rows = out.split.test.size();
    out.report.boundary = cfg.boundary;
    out.report.train_fraction = cfg.train_fraction;
    out.report.seed = cfg.seed;
    out.report.config_hash = cfg.config_hash;
    return out;
}

// ---------------------------------------------------------------------------
// Transfer (with a fresh-trained control on the identical split)
// ---------------------------------------------------------------------------

struct TransferOutcome {
    NetworkCheckpoint checkpoint;  // fine-tuned transfer network
    EvalReport report;             // transfer and control metrics side by side
    SplitIndices split;
    FeatureBundle bundle;
};

inline TransferOutcome run_transfer(const std::vector<PowerRecord>& records,
                                    const NetworkCheckpoint& parent, const RunConfig& cfg,
                                    const std::string& parent_id) {
    TransferOutcome out;
    out.split = split_rows(records.size(), cfg.train_fraction, cfg.split_seed);
    out.bundle = assemble_features(records, out.split.train, cfg.boundary,
                                   cfg.variance_target);
    const FeatureSchema child_schema{out.bundle.num_predictors, out.bundle.pca.retained()};
    const Matrix train_x = detail::rows_of(out.bundle.features, out.split.train);
    std::vector<double> train_y;
    if (cfg.task == TaskKind::kClassify) {
        const auto labels = detail::gather(out.bundle.labels, out.split.train);
        detail::require_both_classes(labels, cfg.boundary);
        train_y.assign(labels.begin(), labels.end());
    } else {
        train_y = detail::gather(out.bundle.powers, out.split.train);
    }

    NetworkCheckpoint transferred = transfer_init(parent, child_schema, parent_id);
    const TrainConfig tc = cfg.train_config();
    if (cfg.epochs > 0)
        transferred = fine_tune(std::move(transferred), train_x, train_y, tc,
                                RngStream(cfg.seed).child(1));
    transferred.meta.source = "transfer:" + parent_id;
    transferred.has_pca = true;
    transferred.pca = out.bundle.pca;
    out.checkpoint = transferred;

    // Fresh control on the identical split; meaningful only when the
    // transfer run actually fine-tunes.
    NetworkCheckpoint control;
    const bool has_control = cfg.epochs > 0;
    if (has_control) control = train_pnn(child_schema, train_x, train_y, tc, RngStream(cfg.seed));

    out.report.task = cfg.task == TaskKind::kClassify ? "classify" : "regress";
    out.report.predictor = "transfer";
    const Matrix test_x = detail::rows_of(out.bundle.features, out.split.test);
    RngStream ci_rng = RngStream(cfg.seed).child(9002);
    if (cfg.task == TaskKind::kClassify) {
        const auto truth = detail::gather(out.bundle.labels, out.split.test);
        const auto pred_t = predict_labels(out.checkpoint, test_x);
        MetricValue f1t;
        f1t.value = f1_score(pred_t, truth);
        f1t.ci = bootstrap_label_ci(
            pred_t, truth, [](const auto& p, const auto& t) { return f1_score(p, t); },
            ci_rng);
        f1t.has_ci = true;
        out.report.metrics["f1_transfer"] = f1t;
        out.report.metrics["accuracy_transfer"] = {accuracy(pred_t, truth), {}, false};
        if (has_control) {
            const auto pred_c = predict_labels(control, test_x);
            out.report.metrics["f1_control"] = {f1_score(pred_c, truth), {}, false};
            out.report.metrics["accuracy_control"] = {accuracy(pred_c, truth), {}, false};
        }
    } else {
        const auto truth = detail::gather(out.bundle.powers, out.split.test);
        auto js_of = [](const std::vector<double>& p, const std::vector<double>& t) {
            return js_divergence(power_vector_to_distribution(p),
                                 power_vector_to_distribution(t));
        };
        out.report.metrics["js_transfer"] = {js_of(predict(out.checkpoint, test_x), truth),
                                             {},
                                             false};
        if (has_control)
            out.report.metrics["js_control"] = {js_of(predict(control, test_x), truth),
                                                {},
                                                false};
    }
    out.report.compute_calls_used = out.split.train.size();
    out.report.compute_calls_full = records.size();
    out.report.train_rows = out.split.train.size();
    out.report.test_rows = out.split.test.size();
    out.report.boundary = cfg.boundary;
    out.report.train_fraction = cfg.train_fraction;
    out.report.seed = cfg.seed;
    out.report.config_hash = cfg.config_hash;
    return out;
}

// ---------------------------------------------------------------------------
// Baselines under the identical split protocol
// ---------------------------------------------------------------------------

enum class BaselineKind { kRand, kCluster, kKneighbors, kLabelProp };

inline BaselineKind baseline_by_name(const std::string& name) {
    if (name == "rand") return BaselineKind::kRand;
    if (name == "cluster") return BaselineKind::kCluster;
    if (name == "kneighbors") return BaselineKind::kKneighbors;
    if (name == "labelprop") return BaselineKind::kLabelProp;
    throw config_error("unknown baseline '" + name +
                       "' (expected rand|cluster|kneighbors|labelprop)");
}

struct BaselineOutcome {
    EvalReport report;
    // Cluster plot series (axes + assignment + power), populated for kCluster.
    std::vector<std::array<double, 4>> cluster_rows;
};

inline BaselineOutcome run_baseline(const std::vector<PowerRecord>& records,
                                    const RunConfig& cfg, BaselineKind which) {
    BaselineOutcome out;
    const SplitIndices split = split_rows(records.size(), cfg.train_fraction, cfg.split_seed);
    const auto bundle =
        assemble_features(records, split.train, cfg.boundary, cfg.variance_target);
    const auto truth = detail::gather(bundle.labels, split.test);
    std::vector<int> pred;
    std::uint64_t calls_used = split.train.size();

    switch (which) {
        case BaselineKind::kRand: {
            RngStream rng = RngStream(cfg.seed).child(71);
            pred = p_rand(split.test.size(), rng);
            calls_used = 0;  // consumes no simulated labels
            out.report.predictor = "rand";
            break;
        }
        case BaselineKind::kCluster: {
            RngStream rng = RngStream(cfg.seed).child(72);
            const auto model = power_cluster(records, cfg.variance_target,
                                             cfg.baseline.clusters, rng,
                                             cfg.baseline.cluster_full_pca);
            // Majority true label per cluster, computed on the evaluation
            // split only; reported as an optimistic bound.
            std::map<std::size_t, std::pair<int, int>> votes;
            for (std::size_t ti = 0; ti < split.test.size(); ++ti) {
                auto& v = votes[model.assignment[split.test[ti]]];
                (truth[ti] == 1 ? v.second : v.first) += 1;
            }
            pred.resize(split.test.size());
            for (std::size_t ti = 0; ti < split.test.size(); ++ti) {
                const auto& v = votes[model.assignment[split.test[ti]]];
                pred[ti] = v.second > v.first ? 1 : 0;
            }
            calls_used = 0;  // clustering itself never reads power labels
            out.report.predictor = "cluster";
            const Matrix base = base_features(records);
            const PcaModel pca = pca_fit(base, cfg.variance_target);
            const Matrix pcs = pca_transform(pca, base);
            const std::size_t ns_col = base.cols() - 1;
            out.cluster_rows.reserve(records.size());
            for (std::size_t i = 0; i < records.size(); ++i)
                out.cluster_rows.push_back({base(i, ns_col), pcs(i, 0),
                                            static_cast<double>(model.assignment[i]),
                                            records[i].power});
            break;
        }
        case BaselineKind::kKneighbors: {
            const Matrix train_x = detail::rows_of(bundle.features, split.train);
            const Matrix test_x = detail::rows_of(bundle.features, split.test);
            const auto train_labels = detail::gather(bundle.labels, split.train);
            const std::size_t k =
                std::min(cfg.baseline.n_neighbors, split.train.size());
            pred = kneighbors_classify(train_x, train_labels, test_x, k);
            out.report.predictor = "kneighbors";
            break;
        }
        case BaselineKind::kLabelProp: {
            const auto train_labels = detail::gather(bundle.labels, split.train);
            const auto model = label_propagation(
                bundle.features, split.train, train_labels, cfg.baseline.gamma,
                cfg.baseline.labelprop_max_iter, cfg.baseline.labelprop_tol);
            pred.resize(split.test.size());
            for (std::size_t ti = 0; ti < split.test.size(); ++ti)
                pred[ti] = model.labels[split.test[ti]];
            out.report.predictor = "labelprop";
            break;
        }
    }

    out.report.task = "classify";
    RngStream ci_rng = RngStream(cfg.seed).child(9003);
    detail::fill_classification_metrics(out.report, pred, truth, ci_rng);
    out.report.compute_calls_used = calls_used;
    out.report.compute_calls_full = records.size();
    out.report.train_rows = split.train.size();
    out.report.test_rows = split.test.size();
    out.report.boundary = cfg.boundary;
    out.report.train_fraction = cfg.train_fraction;
    out.report.seed = cfg.seed;
    out.report.config_hash = cfg.config_hash;
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint evaluation on a full dataset
// ---------------------------------------------------------------------------

inline EvalReport run_eval(const std::vector<PowerRecord>& records,
                           const NetworkCheckpoint& checkpoint, const RunConfig& cfg) {
    if (!checkpoint.has_pca)
        throw std::runtime_error("eval: checkpoint carries no feature transform");
    const auto bundle = assemble_features(records, checkpoint.pca, checkpoint.boundary);
    EvalReport report;
    report.predictor = "pnn";
    RngStream ci_rng = RngStream(cfg.seed).child(9004);
    if (checkpoint.task == TaskKind::kClassify) {
        report.task = "classify";
        const auto pred = predict_labels(checkpoint, bundle.features);
        detail::fill_classification_metrics(report, pred, bundle.labels, ci_rng);
    } else {
        report.task = "regress";
        const auto pred = predict(checkpoint, bundle.features);
        detail::fill_regression_metrics(report, pred, bundle.powers, ci_rng);
    }
    report.compute_calls_full = records.size();
    report.test_rows = records.size();
    report.boundary = checkpoint.boundary;
    report.seed = cfg.seed;
    report.config_hash = cfg.config_hash;
    return report;
}

}  // namespace powermap
