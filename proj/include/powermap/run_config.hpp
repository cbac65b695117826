#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "powermap/dataset_io.hpp"
#include "powermap/power_engine.hpp"
#include "powermap/surrogate.hpp"

namespace powermap {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BaselineConfig {
    std::size_t n_neighbors = 5;
    double gamma = 20.0;
    int labelprop_max_iter = 1000;
    double labelprop_tol = 1e-3;
    std::size_t clusters = 2;
    bool cluster_full_pca = false;
};

struct RunConfig {
    ModelFamily family;
    DesignSpec design;
    Hypothesis hypothesis;
    double alpha = 0.05;
    std::size_t sims = 1000;
    double error_sigma = 1.0;
    SamplerConfig sampler;
    double train_fraction = 0.10;
    double boundary = 0.8;
    TaskKind task = TaskKind::kClassify;
    double variance_target = 0.99;
    std::uint64_t seed = 42;
    std::uint64_t split_seed = 1;  // split shuffling is seeded separately
    unsigned threads = 1;
    std::size_t epochs = 500;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    bool lr_sweep = false;
    bool early_stopping = false;
    BaselineConfig baseline;
    std::string output_dir = ".";
    std::string config_hash;

    TrainConfig train_config() const {
        TrainConfig tc;
        tc.epochs = epochs;
        tc.learning_rate = learning_rate;
        tc.batch_size = batch_size;
        tc.task = task;
        tc.boundary = boundary;
        tc.loss = task == TaskKind::kClassify ? LossKind::kBce : LossKind::kMse;
        tc.early_stopping = early_stopping;
        return tc;
    }

    SimulationContext simulation_context() const {
        SimulationContext ctx;
        ctx.family = family;
        ctx.design = design;
        ctx.hypothesis = hypothesis;
        ctx.alpha = alpha;
        ctx.sims = sims;
        ctx.error_sigma = error_sigma;
        return ctx;
    }
};

// The stock experiment configuration for a family at k predictors: the
// domain keeps the sampled manifold inside the power transition zone so
// both classes are populated at the 0.8 / 0.6 boundaries.
inline RunConfig default_run_config(ModelFamily::Tag family, std::size_t k) {
    RunConfig cfg;
    cfg.hypothesis.tested_indices = {1, 3};
    cfg.sampler.total_points = 2000;
    cfg.sampler.local_points = 4;
    cfg.sampler.local_sigma = 0.05;
    switch (family) {
        case ModelFamily::Tag::kReg:
            cfg.family = ModelFamily::reg();
            cfg.design = design_d_o(k);
            cfg.hypothesis.test = Hypothesis::Test::kPartialF;
            // Tested weights sweep the transition zone; untested weights
            // stay small so the scaled weight tracks the tested effect.
            cfg.sampler.beta_domain.assign(k, {0.0, 0.1});
            cfg.sampler.beta_domain[0] = {0.0, 0.5};
            if (k >= 3) cfg.sampler.beta_domain[2] = {0.0, 0.5};
            cfg.sampler.n_domain = {static_cast<double>(k) + 5.0, 100.0};
            break;
        case ModelFamily::Tag::kLogit:
            cfg.family = ModelFamily::logit();
            cfg.design = design_d_a(k);
            cfg.hypothesis.test = Hypothesis::Test::kWald;
            // Logistic information is ~N/4 at small effects; double the span.
            cfg.sampler.beta_domain.assign(k, {0.0, 0.2});
            cfg.sampler.beta_domain[0] = {0.0, 0.9};
            if (k >= 3) cfg.sampler.beta_domain[2] = {0.0, 0.9};
            cfg.sampler.n_domain = {std::max(20.0, static_cast<double>(k) + 5.0), 180.0};
            break;
        case ModelFamily::Tag::kRmAnova:
            cfg.family = ModelFamily::rmanova();
            cfg.design = design_d_o(k);
            cfg.hypothesis.test = Hypothesis::Test::kRmAnovaF;
            cfg.sampler.beta_domain.assign(k, {0.0, 0.1});
            cfg.sampler.beta_domain[0] = {0.0, 0.45};
            if (k >= 3) cfg.sampler.beta_domain[2] = {0.0, 0.45};
            cfg.sampler.n_domain = {5.0, 60.0};
            break;
    }
    return cfg;
}

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (j.contains(key)) return j.at(key).get<T>();
    return fallback;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        cfg.family = family_by_name(detail::get_or<std::string>(j, "family", "REG"));
        if (j.contains("rmanova_levels")) {
            cfg.family.levels_a = j.at("rmanova_levels").at(0).get<std::size_t>();
            cfg.family.levels_b = j.at("rmanova_levels").at(1).get<std::size_t>();
        }
        if (!j.contains("design")) throw config_error("config: missing field 'design'");
        try {
            cfg.design = design_from_json(j.at("design"));
        } catch (const std::invalid_argument& e) {
            throw config_error(std::string("config: design: ") + e.what());
        }
        if (j.contains("hypothesis")) {
            cfg.hypothesis = hypothesis_from_json(j.at("hypothesis"));
        } else {
            cfg.hypothesis.tested_indices = {1, 3};
            cfg.hypothesis.test = cfg.family.tag == ModelFamily::Tag::kLogit
                                      ? Hypothesis::Test::kWald
                                  : cfg.family.tag == ModelFamily::Tag::kRmAnova
                                      ? Hypothesis::Test::kRmAnovaF
                                      : Hypothesis::Test::kPartialF;
        }
        try {
            cfg.hypothesis.validate(cfg.design.num_predictors());
        } catch (const std::invalid_argument& e) {
            throw config_error(std::string("config: hypothesis: ") + e.what());
        }
        cfg.alpha = detail::get_or(j, "alpha", 0.05);
        if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0)
            throw config_error("config: field 'alpha' must be in (0,1)");
        cfg.sims = detail::get_or<std::size_t>(j, "sims", 1000);
        if (cfg.sims < 1) throw config_error("config: field 'sims' must be >= 1");
        cfg.error_sigma = detail::get_or(j, "error_sigma", 1.0);
        if (j.contains("sampler")) {
            const auto& s = j.at("sampler");
            cfg.sampler.total_points = detail::get_or<std::size_t>(s, "total_points", 2000);
            cfg.sampler.local_points = detail::get_or<std::size_t>(s, "local_points", 4);
            cfg.sampler.local_sigma = detail::get_or(s, "local_sigma", 0.05);
            if (!s.contains("beta_domain"))
                throw config_error("config: sampler.beta_domain is required");
            for (const auto& d : s.at("beta_domain"))
                cfg.sampler.beta_domain.emplace_back(d.at(0).get<double>(),
                                                     d.at(1).get<double>());
            if (cfg.sampler.beta_domain.size() != cfg.design.num_predictors())
                throw config_error("config: sampler.beta_domain must list one [lo,hi] per "
                                   "predictor (got " +
                                   std::to_string(cfg.sampler.beta_domain.size()) + ", need " +
                                   std::to_string(cfg.design.num_predictors()) + ")");
            if (!s.contains("n_domain"))
                throw config_error("config: sampler.n_domain is required");
            cfg.sampler.n_domain = {s.at("n_domain").at(0).get<double>(),
                                    s.at("n_domain").at(1).get<double>()};
            try {
                cfg.sampler.validate();
            } catch (const std::invalid_argument& e) {
                throw config_error(std::string("config: sampler: ") + e.what());
            }
        } else {
            cfg.sampler = default_run_config(cfg.family.tag,
                                             cfg.design.num_predictors()).sampler;
        }
        cfg.train_fraction = detail::get_or(j, "train_fraction", 0.10);
        if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
            throw config_error("config: field 'train_fraction' must be in (0,1)");
        cfg.boundary = detail::get_or(j, "boundary", 0.8);
        cfg.task = detail::get_or<std::string>(j, "task", "classify") == "regress"
                       ? TaskKind::kRegress
                       : TaskKind::kClassify;
        cfg.variance_target = detail::get_or(j, "variance_target", 0.99);
        cfg.seed = detail::get_or<std::uint64_t>(j, "seed", 42);
        cfg.split_seed = detail::get_or<std::uint64_t>(j, "split_seed", 1);
        cfg.threads = detail::get_or<unsigned>(j, "threads", 1);
        cfg.epochs = detail::get_or<std::size_t>(j, "epochs", 500);
        cfg.learning_rate = detail::get_or(j, "learning_rate", 1e-3);
        cfg.batch_size = detail::get_or<std::size_t>(j, "batch_size", 32);
        cfg.lr_sweep = detail::get_or(j, "lr_sweep", false);
        cfg.early_stopping = detail::get_or(j, "early_stopping", false);
        if (j.contains("baseline")) {
            const auto& b = j.at("baseline");
            cfg.baseline.n_neighbors = detail::get_or<std::size_t>(b, "n_neighbors", 5);
            cfg.baseline.gamma = detail::get_or(b, "gamma", 20.0);
            cfg.baseline.labelprop_max_iter = detail::get_or(b, "labelprop_max_iter", 1000);
            cfg.baseline.labelprop_tol = detail::get_or(b, "labelprop_tol", 1e-3);
            cfg.baseline.clusters = detail::get_or<std::size_t>(b, "clusters", 2);
            cfg.baseline.cluster_full_pca = detail::get_or(b, "cluster_full_pca", false);
        }
        cfg.output_dir = detail::get_or<std::string>(j, "output_dir", ".");
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    // Environment overrides, restricted to seed and output directory.
    if (const char* env_seed = std::getenv("POWERMAP_SEED"))
        cfg.seed = std::strtoull(env_seed, nullptr, 10);
    if (const char* env_dir = std::getenv("POWERMAP_OUTPUT_DIR")) cfg.output_dir = env_dir;
    cfg.config_hash = fnv1a_hex(text + "|seed=" + std::to_string(cfg.seed));
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::string text;
    try {
        text = load_text(path);
    } catch (const std::runtime_error& e) {
        throw config_error(e.what());
    }
    return parse_run_config(text);
}

}  // namespace powermap
