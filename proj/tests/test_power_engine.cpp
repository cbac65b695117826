#include <catch_amalgamated.hpp>

#include <cmath>

#include "powermap/power_engine.hpp"
#include "powermap/special_math.hpp"

using namespace powermap;

namespace {

SimulationContext reg3_context(std::size_t sims) {
    SimulationContext ctx;
    ctx.family = ModelFamily::reg();
    ctx.design = design_d_o(3);
    ctx.hypothesis = {{1, 3}, Hypothesis::Test::kPartialF};
    ctx.sims = sims;
    return ctx;
}

}  // namespace

TEST_CASE("null point estimates power near alpha") {
    const auto ctx = reg3_context(2000);
    const auto rec = compute_power(ctx, {{0, 0, 0}, 40}, RngStream(11).child(0));
    REQUIRE(rec.power > 0.035);
    REQUIRE(rec.power < 0.065);
}

TEST_CASE("single-predictor t-test power matches the analytic oracle") {
    SimulationContext ctx;
    ctx.family = ModelFamily::reg();
    ctx.design.columns = {ColumnSpec::normal(0.0, 1.0)};
    ctx.hypothesis = {{1}, Hypothesis::Test::kT};
    ctx.sims = 2000;
    const auto rec = compute_power(ctx, {{0.5}, 50}, RngStream(12).child(0));
    const double oracle = reg1_ttest_power(0.5, 50, 0.05);
    REQUIRE(std::fabs(rec.power - oracle) <= 0.03);
}

TEST_CASE("overwhelming effect saturates power") {
    const auto ctx = reg3_context(1000);
    const auto rec = compute_power(ctx, {{10, 0, 10}, 200}, RngStream(13).child(0));
    REQUIRE(rec.power >= 0.999);
}

TEST_CASE("compute_power is deterministic given the stream") {
    const auto ctx = reg3_context(200);
    const ParameterPoint pt{{0.2, 0.05, 0.3}, 60};
    const auto a = compute_power(ctx, pt, RngStream(99).child(4));
    const auto b = compute_power(ctx, pt, RngStream(99).child(4));
    REQUIRE(a.power == b.power);
}

TEST_CASE("power record invariants") {
    const auto ctx = reg3_context(250);
    const auto rec = compute_power(ctx, {{0.3, 0.0, 0.2}, 50}, RngStream(7).child(0));
    REQUIRE(rec.sims == 250);
    // power is a multiple of 1/sims
    const double scaled = rec.power * 250.0;
    REQUIRE(scaled == Catch::Approx(std::round(scaled)).margin(1e-9));
}

TEST_CASE("call counter accounting") {
    reset_call_count();
    REQUIRE(call_count() == 0);
    const auto ctx = reg3_context(50);
    std::vector<ParameterPoint> points(10, ParameterPoint{{0.1, 0.0, 0.1}, 30});
    const auto recs = generate_training_data(ctx, points, 5);
    REQUIRE(call_count() == 10);
    REQUIRE(recs.size() == 10);

    const auto empty = generate_training_data(ctx, {}, 5);
    REQUIRE(empty.empty());
    REQUIRE(call_count() == 10);
}

TEST_CASE("duplicated point with the same per-point stream gives identical power") {
    const auto ctx = reg3_context(100);
    const ParameterPoint pt{{0.25, 0.0, 0.25}, 45};
    const RngStream master(31);
    const auto a = compute_power(ctx, pt, master.child(2));
    const auto b = compute_power(ctx, pt, master.child(2));
    REQUIRE(a.power == b.power);
}

TEST_CASE("parallel simulation is bit-identical to sequential") {
    const auto ctx = reg3_context(60);
    RngStream sampler_rng(77);
    SamplerConfig cfg;
    cfg.total_points = 24;
    cfg.local_points = 3;
    cfg.local_sigma = 0.05;
    cfg.beta_domain = {{0.0, 0.45}, {0.0, 0.1}, {0.0, 0.45}};
    cfg.n_domain = {10, 90};
    const auto points = p_sampler(cfg, sampler_rng);
    const auto seq = generate_training_data(ctx, points, 123, 1);
    const auto par = generate_training_data(ctx, points, 123, 4);
    REQUIRE(seq.size() == par.size());
    for (std::size_t i = 0; i < seq.size(); ++i) REQUIRE(seq[i].power == par[i].power);
}

TEST_CASE("power grows with sample size for a nonzero effect") {
    const auto ctx = reg3_context(1000);
    const auto lo = compute_power(ctx, {{0.3, 0.0, 0.3}, 25}, RngStream(41).child(0));
    const auto hi = compute_power(ctx, {{0.3, 0.0, 0.3}, 200}, RngStream(41).child(1));
    REQUIRE(hi.power >= lo.power - 0.02);
}

TEST_CASE("estimates across disjoint seed groups agree within binomial noise") {
    const auto ctx = reg3_context(1000);
    const ParameterPoint pt{{0.3, 0.05, 0.2}, 60};
    const auto a = compute_power(ctx, pt, RngStream(1001).child(0));
    const auto b = compute_power(ctx, pt, RngStream(2002).child(0));
    const double p = 0.5 * (a.power + b.power);
    const double bound = 3.0 * std::sqrt(std::max(p * (1.0 - p), 1e-4) / 1000.0);
    REQUIRE(std::fabs(a.power - b.power) <= bound);
}

TEST_CASE("logit and rmanova families run under the engine") {
    SimulationContext logit;
    logit.family = ModelFamily::logit();
    logit.design = design_d_a(3);
    logit.hypothesis = {{1, 3}, Hypothesis::Test::kWald};
    logit.sims = 400;
    const auto lr = compute_power(logit, {{0.9, 0.0, 0.9}, 120}, RngStream(5).child(0));
    REQUIRE(lr.power > 0.5);

    SimulationContext rm;
    rm.family = ModelFamily::rmanova();
    rm.design = design_d_o(3);
    rm.hypothesis = {{1, 3}, Hypothesis::Test::kRmAnovaF};
    rm.sims = 400;
    const auto rr = compute_power(rm, {{0.5, 0.0, 0.5}, 30}, RngStream(6).child(0));
    REQUIRE(rr.power > 0.5);
}

TEST_CASE("sampler with no neighbors stays inside the domain") {
    SamplerConfig cfg;
    cfg.total_points = 200;
    cfg.local_points = 0;
    cfg.local_sigma = 0.1;
    cfg.beta_domain = {{-0.5, 0.5}, {0.0, 1.0}};
    cfg.n_domain = {20, 80};
    RngStream rng(91);
    const auto pts = p_sampler(cfg, rng);
    REQUIRE(pts.size() == 200);
    for (const auto& p : pts) {
        REQUIRE(p.beta[0] >= -0.5);
        REQUIRE(p.beta[0] <= 0.5);
        REQUIRE(p.beta[1] >= 0.0);
        REQUIRE(p.beta[1] <= 1.0);
        REQUIRE(p.sample_size >= 20);
        REQUIRE(p.sample_size <= 80);
    }
}

TEST_CASE("sampler emits exactly N_s points") {
    SamplerConfig cfg;
    cfg.total_points = 10;
    cfg.local_points = 4;
    cfg.local_sigma = 0.1;
    cfg.beta_domain = {{0.0, 1.0}};
    cfg.n_domain = {10, 50};
    RngStream rng(92);
    REQUIRE(p_sampler(cfg, rng).size() == 10);  // 2 iterations x (1 + 4)

    cfg.total_points = 11;  // overshoot truncated
    RngStream rng2(92);
    REQUIRE(p_sampler(cfg, rng2).size() == 11);
}

TEST_CASE("neighbor spread matches the local sigma") {
    SamplerConfig cfg;
    cfg.total_points = 10001;
    cfg.local_points = 10000;
    cfg.local_sigma = 0.25;
    cfg.beta_domain = {{0.0, 1.0}};
    cfg.n_domain = {10, 2000};
    RngStream rng(93);
    const auto pts = p_sampler(cfg, rng);
    const double center = pts[0].beta[0];
    double ss = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double d = pts[i].beta[0] - center;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(pts.size() - 2));
    REQUIRE(sd == Catch::Approx(0.25).epsilon(0.05));
}

TEST_CASE("every neighbor's centroid is in the output") {
    SamplerConfig cfg;
    cfg.total_points = 50;
    cfg.local_points = 4;
    cfg.local_sigma = 0.05;
    cfg.beta_domain = {{0.0, 1.0}, {0.0, 1.0}};
    cfg.n_domain = {10, 90};
    RngStream rng(94);
    const auto pts = p_sampler(cfg, rng);
    // Emission order is centroid-first per group of 1 + n_s.
    for (std::size_t g = 0; g + 5 <= pts.size(); g += 5) {
        for (std::size_t j = 1; j < 5; ++j) {
            double d = 0.0;
            for (std::size_t c = 0; c < 2; ++c)
                d = std::max(d, std::fabs(pts[g + j].beta[c] - pts[g].beta[c]));
            REQUIRE(d < 0.05 * 6.0);  // neighbors stay within 6 sigma of the centroid
        }
    }
}

TEST_CASE("rmanova runs on wider predictor spaces") {
    SimulationContext rm;
    rm.family = ModelFamily::rmanova();
    rm.design = design_d_o(10);
    rm.hypothesis = {{1, 3}, Hypothesis::Test::kRmAnovaF};
    rm.sims = 500;
    const auto null_rec = compute_power(rm, {std::vector<double>(10, 0.0), 20},
                                        RngStream(23).child(0));
    REQUIRE(null_rec.power > 0.02);
    REQUIRE(null_rec.power < 0.09);
    std::vector<double> strong(10, 0.0);
    strong[0] = strong[2] = 0.6;
    const auto rec = compute_power(rm, {strong, 30}, RngStream(23).child(1));
    REQUIRE(rec.power > 0.9);
}

TEST_CASE("alternative hypothesis over indices {1,7,8} runs on wider designs") {
    SimulationContext reg;
    reg.family = ModelFamily::reg();
    reg.design = design_d_o(10);
    reg.hypothesis = {{1, 7, 8}, Hypothesis::Test::kPartialF};
    reg.sims = 400;
    const auto null_rec = compute_power(reg, {std::vector<double>(10, 0.0), 60},
                                        RngStream(21).child(0));
    REQUIRE(null_rec.power < 0.12);
    std::vector<double> strong(10, 0.0);
    strong[0] = strong[6] = strong[7] = 0.8;
    const auto power_rec = compute_power(reg, {strong, 120}, RngStream(21).child(1));
    REQUIRE(power_rec.power > 0.9);

    SimulationContext logit;
    logit.family = ModelFamily::logit();
    logit.design = design_d_a(10);
    logit.hypothesis = {{1, 7, 8}, Hypothesis::Test::kWald};
    logit.sims = 200;
    const auto lrec = compute_power(logit, {std::vector<double>(10, 0.0), 150},
                                    RngStream(22).child(0));
    REQUIRE(lrec.power < 0.15);
}

TEST_CASE("engine validates inputs") {
    const auto ctx = reg3_context(10);
    REQUIRE_THROWS_AS(compute_power(ctx, {{0.1, 0.2}, 40}, RngStream(1).child(0)),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(compute_power(ctx, {{0.1, 0.2, 0.3}, 4}, RngStream(1).child(0)),
                      std::invalid_argument);
    SimulationContext bad = ctx;
    bad.sims = 0;
    REQUIRE_THROWS_AS(compute_power(bad, {{0.1, 0.2, 0.3}, 40}, RngStream(1).child(0)),
                      std::invalid_argument);
}
