// powermap: config-driven pipeline for mapping statistical power manifolds.
//
//   sample    draw a parameter space with the local-Gaussian sampler
//   simulate  Monte Carlo power for every sampled point (resumable)
//   train     fit the neural surrogate on a split and score the rest
//   transfer  initialize from a wider pretrained checkpoint, fine-tune
//   baseline  rand | cluster | kneighbors | labelprop on the same split
//   eval      score a saved checkpoint against a dataset
//   plot      manifold | cluster | trend | cost as SVG + CSV pairs

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "powermap/powermap.hpp"

namespace fs = std::filesystem;
using namespace powermap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string sibling_path(const std::string& path, const std::string& suffix) {
    fs::path p(path);
    fs::path out = p.parent_path() / (p.stem().string() + suffix);
    return out.string();
}

// Relative output paths land under the configured output directory.
std::string resolve_out(const RunConfig& cfg, const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute() || cfg.output_dir == "." ||
        cfg.output_dir.empty())
        return path;
    fs::create_directories(cfg.output_dir);
    return (fs::path(cfg.output_dir) / path).string();
}

std::string manifest_path(const std::string& dataset_path) {
    return sibling_path(dataset_path, ".manifest.json");
}

DatasetManifest manifest_for(const RunConfig& cfg) {
    DatasetManifest m;
    m.family = family_name(cfg.family);
    m.design = cfg.design;
    m.hypothesis = cfg.hypothesis;
    m.alpha = cfg.alpha;
    m.sims = cfg.sims;
    m.seed = cfg.seed;
    m.error_sigma = cfg.error_sigma;
    m.rmanova_levels_a = cfg.family.levels_a;
    m.rmanova_levels_b = cfg.family.levels_b;
    return m;
}

int cmd_sample(const RunConfig& cfg, const std::string& out_path) {
    RngStream rng = RngStream(cfg.seed).child(100);
    const auto points = p_sampler(cfg.sampler, rng);
    write_points_csv(points, cfg.design.num_predictors(), out_path);
    DatasetManifest m = manifest_for(cfg);
    m.n_points = points.size();
    save_text(manifest_to_json(m), manifest_path(out_path));
    std::printf("sampled %zu points -> %s\n", points.size(), out_path.c_str());
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const std::string& points_path,
                 const std::string& out_path) {
    const auto points = read_points_csv(points_path);
    const std::size_t k = cfg.design.num_predictors();
    const SimulationContext ctx = cfg.simulation_context();

    std::size_t done = dataset_rows_on_disk(out_path);
    if (done > points.size())
        throw std::runtime_error("simulate: existing output has more rows than points");
    std::ofstream out;
    if (done == 0) {
        out.open(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("simulate: cannot open " + out_path);
        out << dataset_header(k, 0) << "\n";
    } else {
        out.open(out_path, std::ios::binary | std::ios::app);
        if (!out) throw std::runtime_error("simulate: cannot open " + out_path);
        std::fprintf(stderr, "resuming at row %zu of %zu\n", done, points.size());
    }
    // Chunked so an interrupt loses at most one chunk; per-point streams are
    // index-derived, so the resumed file is byte-identical.
    const std::size_t chunk = 200;
    for (std::size_t start = done; start < points.size(); start += chunk) {
        const std::size_t stop = std::min(points.size(), start + chunk);
        std::vector<ParameterPoint> slice(points.begin() + static_cast<long>(start),
                                          points.begin() + static_cast<long>(stop));
        const auto records =
            generate_training_data(ctx, slice, cfg.seed, cfg.threads, start);
        for (const auto& rec : records) out << dataset_row(rec) << "\n";
        out.flush();
    }
    DatasetManifest m = manifest_for(cfg);
    m.n_points = points.size();
    m.call_count = points.size();  // one power call per row in the file
    m.feature_width = k + 2;
    save_text(manifest_to_json(m), manifest_path(out_path));
    std::printf("simulated %zu points (%zu sims each) -> %s\n", points.size(), cfg.sims,
                out_path.c_str());
    return kExitOk;
}

std::string dataset_id_for(const std::string& dataset_path) {
    return fnv1a_hex(load_text(dataset_path));
}

int cmd_train(const RunConfig& cfg, const std::string& dataset_path,
              const std::string& checkpoint_path, const std::string& report_path,
              const std::string& features_path) {
    const auto data = read_dataset_csv(dataset_path);
    auto outcome = run_train(data.records, cfg);
    outcome.report.dataset_id = dataset_id_for(dataset_path);
    save_checkpoint(outcome.checkpoint, checkpoint_path);
    save_text(report_to_json(outcome.report), report_path);
    if (!features_path.empty()) {
        write_feature_csv(outcome.bundle, features_path);
        DatasetManifest fm = manifest_for(cfg);
        fm.n_points = data.records.size();
        fm.call_count = data.records.size();
        fm.has_pca = true;
        fm.pca = outcome.bundle.pca;
        fm.feature_width = outcome.bundle.features.cols();
        save_text(manifest_to_json(fm), manifest_path(features_path));
    }
    const auto& metrics = outcome.report.metrics;
    if (cfg.task == TaskKind::kClassify)
        std::printf("train: f1=%.4f [%.4f, %.4f] on %zu test rows (calls %zu/%zu)\n",
                    metrics.at("f1").value, metrics.at("f1").ci.lo, metrics.at("f1").ci.hi,
                    outcome.report.test_rows, outcome.report.compute_calls_used,
                    outcome.report.compute_calls_full);
    else
        std::printf("train: js=%.6f mse=%.6f on %zu test rows\n", metrics.at("js").value,
                    metrics.at("mse").value, outcome.report.test_rows);
    return kExitOk;
}

int cmd_transfer(const RunConfig& cfg, const std::string& parent_path,
                 const std::string& dataset_path, const std::string& checkpoint_path,
                 const std::string& report_path) {
    const auto parent = load_checkpoint(parent_path);
    const auto data = read_dataset_csv(dataset_path);
    // The parent id is a content hash, stable across file locations.
    auto outcome = run_transfer(data.records, parent, cfg, fnv1a_hex(load_text(parent_path)));
    outcome.report.dataset_id = dataset_id_for(dataset_path);
    save_checkpoint(outcome.checkpoint, checkpoint_path);
    save_text(report_to_json(outcome.report), report_path);
    const auto& m = outcome.report.metrics;
    if (cfg.task == TaskKind::kClassify)
        std::printf("transfer: f1=%.4f%s\n", m.at("f1_transfer").value,
                    m.count("f1_control")
                        ? (" vs control f1=" +
                           std::to_string(m.at("f1_control").value)).c_str()
                        : " (no fine-tuning, no control)");
    else
        std::printf("transfer: js=%.6f%s\n", m.at("js_transfer").value,
                    m.count("js_control")
                        ? (" vs control js=" +
                           std::to_string(m.at("js_control").value)).c_str()
                        : " (no fine-tuning, no control)");
    return kExitOk;
}

int cmd_baseline(const RunConfig& cfg, const std::string& dataset_path,
                 const std::string& which, const std::string& report_path) {
    const auto data = read_dataset_csv(dataset_path);
    const BaselineKind kind = baseline_by_name(which);
    auto outcome = run_baseline(data.records, cfg, kind);
    outcome.report.dataset_id = dataset_id_for(dataset_path);
    save_text(report_to_json(outcome.report), report_path);
    if (kind == BaselineKind::kCluster) {
        const std::string cluster_csv = sibling_path(report_path, "_cluster.csv");
        std::ofstream out(cluster_csv, std::ios::binary);
        out << "scaled_weight,pc_1,cluster,power\n";
        for (const auto& row : outcome.cluster_rows)
            out << jsontext::g10(row[0]) << "," << jsontext::g10(row[1]) << ","
                << static_cast<long>(row[2]) << "," << jsontext::g10(row[3]) << "\n";
    }
    std::printf("baseline %s: f1=%.4f on %zu test rows\n", which.c_str(),
                outcome.report.metrics.at("f1").value, outcome.report.test_rows);
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
             const std::string& dataset_path, const std::string& report_path,
             const std::string& cascade_checkpoint_path) {
    const auto checkpoint = load_checkpoint(checkpoint_path);
    const auto data = read_dataset_csv(dataset_path);
    EvalReport report = run_eval(data.records, checkpoint, cfg);
    report.dataset_id = dataset_id_for(dataset_path);
    save_text(report_to_json(report), report_path);
    if (!cascade_checkpoint_path.empty()) {
        const auto c2 = load_checkpoint(cascade_checkpoint_path);
        if (!c2.has_pca) throw std::runtime_error("eval: cascade checkpoint lacks PCA");
        const auto b1 = assemble_features(data.records, checkpoint.pca, checkpoint.boundary);
        const auto b2 = assemble_features(data.records, c2.pca, c2.boundary);
        const auto pred1 = predict_labels(checkpoint, b1.features);
        const auto pred2 = predict_labels(c2, b2.features);
        RngStream rng = RngStream(cfg.seed).child(9005);
        auto cascade = cascade_evaluate(pred1, pred2, b1.powers, checkpoint.boundary,
                                        c2.boundary, rng);
        cascade.c1.dataset_id = report.dataset_id;
        cascade.c2.dataset_id = report.dataset_id;
        save_text(report_to_json(cascade.c1), sibling_path(report_path, "_c1.json"));
        save_text(report_to_json(cascade.c2), sibling_path(report_path, "_c2.json"));
        std::printf("cascade: c1 f1=%.4f, c2 %s\n", cascade.c1.metrics.at("f1").value,
                    cascade.c2.degenerate
                        ? "degenerate (empty stage)"
                        : ("f1=" + std::to_string(cascade.c2.metrics.at("f1").value)).c_str());
    }
    if (report.metrics.count("f1"))
        std::printf("eval: f1=%.4f on %zu rows\n", report.metrics.at("f1").value,
                    report.test_rows);
    else
        std::printf("eval: js=%.6f on %zu rows\n", report.metrics.at("js").value,
                    report.test_rows);
    return kExitOk;
}

struct SeriesPoint {
    double x;
    double y;
};

int cmd_plot(const RunConfig& cfg, const std::string& kind, const std::string& dataset_path,
             const std::vector<std::string>& report_paths, const std::string& metric,
             const std::string& out_svg) {
    const std::string out_csv = sibling_path(out_svg, ".csv");
    PlotSpec spec;
    std::string csv;
    if (kind == "manifold" || kind == "cluster") {
        if (dataset_path.empty()) throw config_error("plot: --dataset is required for " + kind);
        const auto data = read_dataset_csv(dataset_path);
        if (kind == "manifold") {
            spec.title = "Power manifold";
            spec.x_label = "scaled weight";
            spec.y_label = "pc_1";
            csv = "scaled_weight,pc_1,power\n";
            if (!data.records.empty()) {
                const Matrix base = base_features(data.records);
                const auto pca = pca_fit(base, cfg.variance_target);
                const Matrix pcs = pca_transform(pca, base);
                for (std::size_t i = 0; i < data.records.size(); ++i) {
                    const double ns = base(i, base.cols() - 1);
                    spec.points.push_back({ns, pcs(i, 0), data.records[i].power, -1});
                    csv += jsontext::g10(ns) + "," + jsontext::g10(pcs(i, 0)) + "," +
                           jsontext::g10(data.records[i].power) + "\n";
                }
            }
        } else {
            spec.title = "Power clusters";
            spec.x_label = "scaled weight";
            spec.y_label = "pc_1";
            csv = "scaled_weight,pc_1,cluster\n";
            if (!data.records.empty()) {
                RngStream rng = RngStream(cfg.seed).child(73);
                const auto model = power_cluster(data.records, cfg.variance_target,
                                                 cfg.baseline.clusters, rng,
                                                 cfg.baseline.cluster_full_pca);
                const Matrix base = base_features(data.records);
                const auto pca = pca_fit(base, cfg.variance_target);
                const Matrix pcs = pca_transform(pca, base);
                for (std::size_t i = 0; i < data.records.size(); ++i) {
                    const double ns = base(i, base.cols() - 1);
                    spec.points.push_back({ns, pcs(i, 0), 0.0,
                                           static_cast<long>(model.assignment[i])});
                    csv += jsontext::g10(ns) + "," + jsontext::g10(pcs(i, 0)) + "," +
                           std::to_string(model.assignment[i]) + "\n";
                }
            }
        }
    } else if (kind == "trend" || kind == "cost") {
        if (report_paths.empty()) throw config_error("plot: --report files required for " + kind);
        std::vector<SeriesPoint> series;
        for (const auto& path : report_paths) {
            const auto j = nlohmann::json::parse(load_text(path));
            const double y = j.at("metrics").at(metric).at("value").get<double>();
            const double x = kind == "trend"
                                 ? j.at("train_fraction").get<double>()
                                 : j.at("compute_calls_used").get<double>();
            series.push_back({x, y});
        }
        std::sort(series.begin(), series.end(),
                  [](const SeriesPoint& a, const SeriesPoint& b) { return a.x < b.x; });
        spec.title = kind == "trend" ? metric + " vs training fraction"
                                     : metric + " vs compute calls";
        spec.x_label = kind == "trend" ? "training fraction" : "compute calls";
        spec.y_label = metric;
        spec.connect = true;
        csv = (kind == "trend" ? "train_fraction," : "compute_calls,") + metric + "\n";
        for (const auto& p : series) {
            spec.points.push_back({p.x, p.y, 0.5, -1});
            csv += jsontext::g10(p.x) + "," + jsontext::g10(p.y) + "\n";
        }
    } else {
        throw config_error("plot: unknown kind '" + kind +
                           "' (expected manifold|cluster|trend|cost)");
    }
    write_svg(spec, out_svg);
    save_text(csv, out_csv);
    std::printf("plot %s -> %s, %s\n", kind.c_str(), out_svg.c_str(), out_csv.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"power manifold mapping toolkit"};
    app.require_subcommand(1);

    std::string config_path, points_path, dataset_path, out_path, report_path;
    std::string checkpoint_path, parent_path, features_path, which, kind = "manifold";
    std::string metric = "f1", cascade_path;
    std::vector<std::string> report_paths;

    auto add_config = [&config_path](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration (JSON)")->required();
    };

    auto* sample = app.add_subcommand("sample", "draw a parameter space");
    add_config(sample);
    sample->add_option("--out", out_path, "points CSV to write")->required();

    auto* simulate = app.add_subcommand("simulate", "compute power for sampled points");
    add_config(simulate);
    simulate->add_option("--points", points_path, "points CSV from `sample`")->required();
    simulate->add_option("--out", out_path, "dataset CSV to write")->required();

    auto* train = app.add_subcommand("train", "train the neural surrogate");
    add_config(train);
    train->add_option("--dataset", dataset_path, "dataset CSV from `simulate`")->required();
    train->add_option("--out", checkpoint_path, "checkpoint JSON to write")->required();
    train->add_option("--report", report_path, "evaluation report to write")->required();
    train->add_option("--features", features_path, "optional PCA-augmented feature CSV");

    auto* transfer = app.add_subcommand("transfer", "fine-tune from a wider parent");
    add_config(transfer);
    transfer->add_option("--parent", parent_path, "pretrained checkpoint")->required();
    transfer->add_option("--dataset", dataset_path, "child dataset CSV")->required();
    transfer->add_option("--out", checkpoint_path, "checkpoint JSON to write")->required();
    transfer->add_option("--report", report_path, "evaluation report to write")->required();

    auto* baseline = app.add_subcommand("baseline", "run a comparison predictor");
    add_config(baseline);
    baseline->add_option("--dataset", dataset_path, "dataset CSV")->required();
    baseline->add_option("--which", which, "rand|cluster|kneighbors|labelprop")->required();
    baseline->add_option("--report", report_path, "evaluation report to write")->required();

    auto* eval = app.add_subcommand("eval", "score a checkpoint against a dataset");
    add_config(eval);
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
    eval->add_option("--dataset", dataset_path, "dataset CSV")->required();
    eval->add_option("--report", report_path, "evaluation report to write")->required();
    eval->add_option("--cascade-checkpoint", cascade_path,
                     "second-stage classifier for the two-boundary cascade");

    auto* plot = app.add_subcommand("plot", "render SVG + CSV pairs");
    add_config(plot);
    plot->add_option("--kind", kind, "manifold|cluster|trend|cost")->required();
    plot->add_option("--dataset", dataset_path, "dataset CSV (manifold/cluster)");
    plot->add_option("--report", report_paths, "report JSONs (trend/cost)");
    plot->add_option("--metric", metric, "metric key for trend/cost (default f1)");
    plot->add_option("--out", out_path, "SVG path to write")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = load_run_config(config_path);
        out_path = resolve_out(cfg, out_path);
        report_path = resolve_out(cfg, report_path);
        features_path = resolve_out(cfg, features_path);
        if (sample->parsed()) return cmd_sample(cfg, out_path);
        if (simulate->parsed()) return cmd_simulate(cfg, points_path, out_path);
        if (train->parsed())
            return cmd_train(cfg, dataset_path, resolve_out(cfg, checkpoint_path),
                             report_path, features_path);
        if (transfer->parsed())
            return cmd_transfer(cfg, parent_path, dataset_path,
                                resolve_out(cfg, checkpoint_path), report_path);
        if (baseline->parsed()) return cmd_baseline(cfg, dataset_path, which, report_path);
        if (eval->parsed())
            return cmd_eval(cfg, checkpoint_path, dataset_path, report_path, cascade_path);
        if (plot->parsed())
            return cmd_plot(cfg, kind, dataset_path, report_paths, metric, out_path);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
