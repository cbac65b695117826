#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "powermap/rng.hpp"
#include "powermap/stat_models.hpp"

namespace powermap {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct ParameterPoint {
    std::vector<double> beta;
    long sample_size = 0;  // N: observations (REG/LOGIT) or subjects (RMANOVA)
};

struct PowerRecord {
    ParameterPoint point;
    double power = 0.0;
    std::size_t sims = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;
};

struct SamplerConfig {
    std::size_t total_points = 2000;      // N_s
    std::size_t local_points = 4;         // n_s neighbors per centroid
    double local_sigma = 0.05;            // sigma_l
    std::vector<std::pair<double, double>> beta_domain;  // per predictor
    std::pair<double, double> n_domain{10.0, 100.0};

    void validate() const {
        if (local_sigma <= 0.0) throw std::invalid_argument("SamplerConfig: sigma_l must be > 0");
        for (const auto& [lo, hi] : beta_domain)
            if (!(lo < hi)) throw std::invalid_argument("SamplerConfig: need lo < hi per dimension");
        if (!(n_domain.first < n_domain.second))
            throw std::invalid_argument("SamplerConfig: need lo < hi for the N domain");
    }
};

struct SimulationContext {
    ModelFamily family;
    DesignSpec design;
    Hypothesis hypothesis;
    double alpha = 0.05;
    std::size_t sims = 1000;
    double error_sigma = 1.0;
};

// ---------------------------------------------------------------------------
// Call accounting
// ---------------------------------------------------------------------------

namespace detail {
inline std::atomic<std::uint64_t> g_power_calls{0};
}

inline std::uint64_t call_count() { return detail::g_power_calls.load(); }
inline void reset_call_count() { detail::g_power_calls.store(0); }

// ---------------------------------------------------------------------------
// Power computation (Monte Carlo)
// ---------------------------------------------------------------------------

namespace detail {

inline bool reg_trial_rejects(const SimulationContext& ctx, const ParameterPoint& point,
                              RngStream& rng) {
    const std::size_t n = static_cast<std::size_t>(point.sample_size);
    const Matrix x = generate_design(ctx.design, n, rng);
    const auto y = generate_linear_response(x, point.beta, rng, ctx.error_sigma);
    OlsFit full;
    try {
        full = fit_ols(x, y);
    } catch (const singular_fit_error&) {
        return false;  // counted as a non-rejection
    }
    double p = 1.0;
    if (ctx.hypothesis.test == Hypothesis::Test::kT) {
        p = coefficient_t_test(full, *ctx.hypothesis.tested_indices.begin());
    } else {
        // Reduced model: drop the tested columns.
        const std::size_t k = x.cols();
        std::vector<std::size_t> keep;
        for (std::size_t j = 1; j <= k; ++j)
            if (ctx.hypothesis.tested_indices.count(j) == 0) keep.push_back(j);
        Matrix xr(n, keep.size());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < keep.size(); ++j) xr(i, j) = x(i, keep[j] - 1);
        OlsFit reduced;
        try {
            reduced = fit_ols(xr, y);
        } catch (const singular_fit_error&) {
            return false;
        }
        p = partial_f_test(full, reduced, ctx.hypothesis.tested_indices.size());
    }
    return p <= ctx.alpha;
}

inline bool logit_trial_rejects(const SimulationContext& ctx, const ParameterPoint& point,
                                RngStream& rng) {
    const std::size_t n = static_cast<std::size_t>(point.sample_size);
    // Non-converged fits discard the draw; after 5 redraws count non-rejection.
    for (int attempt = 0; attempt <= 5; ++attempt) {
        const Matrix x = generate_design(ctx.design, n, rng);
        const auto y = generate_logit_response(x, point.beta, rng);
        const LogisticFit fit = fit_logistic_irls(x, y);
        if (!fit.converged) continue;
        try {
            const double p = wald_test(fit.coefficients, fit.covariance,
                                       ctx.hypothesis.tested_indices);
            return p <= ctx.alpha;
        } catch (const degenerate_test_error&) {
            continue;
        }
    }
    return false;
}

inline bool rmanova_trial_rejects(const SimulationContext& ctx, const ParameterPoint& point,
                                  RngStream& rng) {
    const std::size_t subjects = static_cast<std::size_t>(point.sample_size);
    const Matrix y = generate_rmanova_response(ctx.design, ctx.family, point.beta, subjects,
                                               rng, ctx.error_sigma);
    const RmAnovaResult res =
        rmanova_f_test(y, ctx.family.levels_a, ctx.family.levels_b);
    const double p = rmanova_hypothesis_p(res, ctx.design, ctx.hypothesis.tested_indices);
    return p <= ctx.alpha;
}

inline void validate_point(const SimulationContext& ctx, const ParameterPoint& point) {
    if (point.beta.size() != ctx.design.num_predictors())
        throw std::invalid_argument("compute_power: beta length does not match design");
    const long k = static_cast<long>(ctx.design.num_predictors());
    const long min_n = ctx.family.tag == ModelFamily::Tag::kRmAnova ? 2 : k + 3;
    if (point.sample_size < min_n)
        throw std::invalid_argument("compute_power: sample size too small for family");
}

}  // namespace detail

// One Monte Carlo power estimate. Each replicate runs on the substream
// point_stream.child(sim_index), so estimates are identical under any
// parallel schedule. Increments the global call counter by exactly one.
inline PowerRecord compute_power(const SimulationContext& ctx, const ParameterPoint& point,
                                 const RngStream& point_stream) {
    if (ctx.sims < 1) throw std::invalid_argument("compute_power: sims must be >= 1");
    if (ctx.alpha <= 0.0 || ctx.alpha >= 1.0)
        throw std::invalid_argument("compute_power: alpha in (0,1)");
    ctx.hypothesis.validate(ctx.design.num_predictors());
    detail::validate_point(ctx, point);
    detail::g_power_calls.fetch_add(1, std::memory_order_relaxed);

    std::size_t rejections = 0;
    for (std::size_t t = 0; t < ctx.sims; ++t) {
        RngStream trial = point_stream.child(t);
        bool reject = false;
        switch (ctx.family.tag) {
            case ModelFamily::Tag::kReg:
                reject = detail::reg_trial_rejects(ctx, point, trial);
                break;
            case ModelFamily::Tag::kLogit:
                reject = detail::logit_trial_rejects(ctx, point, trial);
                break;
            case ModelFamily::Tag::kRmAnova:
                reject = detail::rmanova_trial_rejects(ctx, point, trial);
                break;
        }
        if (reject) ++rejections;
    }
    PowerRecord rec;
    rec.point = point;
    rec.power = static_cast<double>(rejections) / static_cast<double>(ctx.sims);
    rec.sims = ctx.sims;
    rec.alpha = ctx.alpha;
    rec.seed = point_stream.master_seed();
    return rec;
}

// One PowerRecord per point, order preserved. Points run on the substreams
// master.child(point_index); with threads > 1 the result is bit-identical
// to the sequential run.
inline std::vector<PowerRecord> generate_training_data(const SimulationContext& ctx,
                                                       const std::vector<ParameterPoint>& points,
                                                       std::uint64_t master_seed,
                                                       unsigned threads = 1,
                                                       std::size_t first_index = 0) {
    std::vector<PowerRecord> records(points.size());
    const RngStream master(master_seed);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            records[i] = compute_power(ctx, points[i], master.child(first_index + i));
    };
    if (threads <= 1 || points.size() < 2) {
        work(0, points.size());
        return records;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned n_threads = hw == 0 ? threads : std::min(threads, hw);
    std::vector<std::thread> pool;
    const std::size_t chunk = (points.size() + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(points.size(), begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
    return records;
}

// ---------------------------------------------------------------------------
// High-dimensional parameter sampling
// ---------------------------------------------------------------------------

// Uniform centroids with Gaussian neighbor clouds. Neighbor betas may leave
// the domain (power is defined for any real weight vector); the N coordinate
// is rounded to the nearest integer and clamped into its domain.
inline std::vector<ParameterPoint> p_sampler(const SamplerConfig& config, RngStream& rng) {
    config.validate();
    const std::size_t k = config.beta_domain.size();
    std::vector<ParameterPoint> points;
    points.reserve(config.total_points + config.local_points);

    auto clamp_n = [&config](double v) {
        const double r = std::round(v);
        return static_cast<long>(std::min(std::max(r, config.n_domain.first),
                                          config.n_domain.second));
    };

    while (points.size() < config.total_points) {
        ParameterPoint centroid;
        centroid.beta.resize(k);
        for (std::size_t j = 0; j < k; ++j)
            centroid.beta[j] =
                rng.next_uniform(config.beta_domain[j].first, config.beta_domain[j].second);
        const double n_raw = rng.next_uniform(config.n_domain.first, config.n_domain.second);
        centroid.sample_size = clamp_n(n_raw);
        points.push_back(centroid);
        for (std::size_t s = 0; s < config.local_points; ++s) {
            ParameterPoint nb;
            nb.beta.resize(k);
            for (std::size_t j = 0; j < k; ++j)
                nb.beta[j] = centroid.beta[j] + config.local_sigma * rng.next_normal();
            nb.sample_size = clamp_n(n_raw + config.local_sigma * rng.next_normal());
            points.push_back(nb);
        }
    }
    points.resize(config.total_points);  // the final iteration may overshoot
    return points;
}

}  // namespace powermap
