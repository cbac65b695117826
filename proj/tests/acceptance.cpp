// Acceptance suite: one test case per criterion, each printing a single
// [PASS]/[FAIL] line with the measured values.

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "powermap/powermap.hpp"

using namespace powermap;
namespace fs = std::filesystem;

namespace {

unsigned worker_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 4 : hw;
}

void line(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
}

RunConfig reg3_config() {
    RunConfig cfg = default_run_config(ModelFamily::Tag::kReg, 3);
    cfg.sims = 200;
    cfg.seed = 42;
    cfg.split_seed = 1;
    cfg.threads = worker_threads();
    cfg.config_hash = "acceptance-reg3";
    return cfg;
}

// Shared REG-3 dataset: 2000 points at 200 sims (desk scale).
const std::vector<PowerRecord>& reg3_dataset() {
    static const std::vector<PowerRecord> records = [] {
        RunConfig cfg = reg3_config();
        RngStream rng = RngStream(cfg.seed).child(100);
        const auto points = p_sampler(cfg.sampler, rng);
        return generate_training_data(cfg.simulation_context(), points, cfg.seed,
                                      worker_threads());
    }();
    return records;
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

}  // namespace

TEST_CASE("criterion 1: null calibration across families") {
    const double alpha = 0.05;
    const std::size_t sims = 2000;
    double rates[3];
    {
        SimulationContext ctx;
        ctx.family = ModelFamily::reg();
        ctx.design = design_d_o(3);
        ctx.hypothesis = {{1, 3}, Hypothesis::Test::kPartialF};
        ctx.alpha = alpha;
        ctx.sims = sims;
        rates[0] = compute_power(ctx, {{0, 0, 0}, 50}, RngStream(101).child(0)).power;
    }
    {
        SimulationContext ctx;
        ctx.family = ModelFamily::logit();
        ctx.design = design_d_a(3);
        ctx.hypothesis = {{1, 3}, Hypothesis::Test::kWald};
        ctx.alpha = alpha;
        ctx.sims = sims;
        rates[1] = compute_power(ctx, {{0, 0, 0}, 200}, RngStream(102).child(0)).power;
    }
    {
        SimulationContext ctx;
        ctx.family = ModelFamily::rmanova();
        ctx.design = design_d_o(3);
        ctx.hypothesis = {{1, 3}, Hypothesis::Test::kRmAnovaF};
        ctx.alpha = alpha;
        ctx.sims = sims;
        rates[2] = compute_power(ctx, {{0, 0, 0}, 25}, RngStream(103).child(0)).power;
    }
    const bool ok = rates[0] >= 0.035 && rates[0] <= 0.065 && rates[1] >= 0.035 &&
                    rates[1] <= 0.065 && rates[2] >= 0.035 && rates[2] <= 0.065;
    line(1, ok,
         fmt("null calibration REG=%.4f LOGIT=%.4f RMANOVA=%.4f (need [0.035, 0.065])",
             rates[0], rates[1], rates[2]));
    REQUIRE(ok);
}

TEST_CASE("criterion 2: simulated power matches the analytic oracle") {
    SimulationContext ctx;
    ctx.family = ModelFamily::reg();
    ctx.design.columns = {ColumnSpec::normal(0.0, 1.0)};
    ctx.hypothesis = {{1}, Hypothesis::Test::kT};
    ctx.sims = 2000;
    bool ok = true;
    std::string detail = "REG-1 t-test |sim - oracle|:";
    int idx = 0;
    for (double beta : {0.2, 0.5}) {
        for (long n : {25L, 50L, 100L}) {
            const auto rec =
                compute_power(ctx, {{beta}, n}, RngStream(200).child(idx++));
            const double oracle = reg1_ttest_power(beta, static_cast<std::size_t>(n), 0.05);
            const double diff = std::fabs(rec.power - oracle);
            ok = ok && diff <= 0.03;
            detail += fmt(" %.3f", diff);
        }
    }
    detail += " (need <= 0.03 at all 6 points)";
    line(2, ok, detail);
    REQUIRE(ok);
}

TEST_CASE("criterion 3: surrogate headline F1 at 10% of the calls") {
    RunConfig cfg = reg3_config();
    cfg.train_fraction = 0.10;
    cfg.boundary = 0.8;
    const auto outcome = run_train(reg3_dataset(), cfg);
    const double f1 = outcome.report.metrics.at("f1").value;
    const double ratio = outcome.report.call_ratio();
    const bool ok = f1 >= 0.90 && std::fabs(ratio - 0.10) < 1e-12;
    line(3, ok, fmt("REG-3 10%% split boundary 0.8: F1=%.4f (need >= 0.90), call ratio=%.3f "
                    "(need 0.10)",
                    f1, ratio));
    REQUIRE(ok);
}

TEST_CASE("criterion 4: more training data does not hurt") {
    RunConfig cfg = reg3_config();
    bool ok = true;
    std::string detail = "F1@80 vs F1@10 per seed:";
    for (std::uint64_t s = 1; s <= 5; ++s) {
        cfg.split_seed = s;
        cfg.seed = 50 + s;
        cfg.train_fraction = 0.10;
        const double f10 = run_train(reg3_dataset(), cfg).report.metrics.at("f1").value;
        cfg.train_fraction = 0.80;
        const double f80 = run_train(reg3_dataset(), cfg).report.metrics.at("f1").value;
        ok = ok && f80 >= f10 - 0.02;
        detail += fmt(" %.3f/%.3f", f80, f10);
    }
    detail += " (need F1@80 >= F1@10 - 0.02)";
    line(4, ok, detail);
    REQUIRE(ok);
}

TEST_CASE("criterion 5: transfer from a wider parent never hurts") {
    RunConfig pcfg = default_run_config(ModelFamily::Tag::kReg, 20);
    pcfg.sampler.total_points = 1000;
    pcfg.sims = 200;
    pcfg.seed = 11;
    pcfg.split_seed = 3;
    pcfg.train_fraction = 0.8;
    pcfg.threads = worker_threads();
    pcfg.config_hash = "acceptance-reg20";
    RngStream prng = RngStream(pcfg.seed).child(100);
    const auto ppoints = p_sampler(pcfg.sampler, prng);
    const auto precords = generate_training_data(pcfg.simulation_context(), ppoints,
                                                 pcfg.seed, worker_threads());
    const auto parent = run_train(precords, pcfg);

    RunConfig ccfg = reg3_config();
    bool ok = true;
    std::string detail =
        fmt("REG-20 parent (width %zu) -> REG-3, transfer/control per seed:",
            parent.checkpoint.net_schema.total());
    for (std::uint64_t s = 1; s <= 5; ++s) {
        ccfg.split_seed = s;
        ccfg.seed = 42 + s;
        const auto tf = run_transfer(reg3_dataset(), parent.checkpoint, ccfg, "reg20");
        const double ft = tf.report.metrics.at("f1_transfer").value;
        const double fc = tf.report.metrics.at("f1_control").value;
        ok = ok && ft >= fc - 0.02;
        detail += fmt(" %.3f/%.3f", ft, fc);
    }
    detail += " (need transfer >= control - 0.02)";
    line(5, ok, detail);
    REQUIRE(ok);
}

TEST_CASE("criterion 6: regression beats random by 10x in JS divergence") {
    RunConfig cfg = reg3_config();
    cfg.task = TaskKind::kRegress;
    cfg.train_fraction = 0.10;
    const auto outcome = run_train(reg3_dataset(), cfg);
    const double js_pnn = outcome.report.metrics.at("js").value;
    RngStream urng = RngStream(777).child(0);
    std::vector<double> upred(outcome.split.test.size());
    for (auto& v : upred) v = urng.next_uniform();
    std::vector<double> truth;
    for (auto i : outcome.split.test) truth.push_back(reg3_dataset()[i].power);
    const double js_rand = js_divergence(power_vector_to_distribution(upred),
                                         power_vector_to_distribution(truth));
    const bool ok = js_pnn <= 0.1 * js_rand;
    line(6, ok, fmt("JS(surrogate)=%.6f vs JS(random)=%.6f, ratio=%.4f (need <= 0.10)",
                    js_pnn, js_rand, js_pnn / js_rand));
    REQUIRE(ok);
}

TEST_CASE("criterion 7: first principal component tracks power") {
    const auto& records = reg3_dataset();
    std::vector<std::size_t> all(records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto bundle = assemble_features(records, all, 0.8, 0.99);
    double pc1_r = 0.0;
    for (const auto& fc : correlation_report(bundle))
        if (fc.name == "pc_1") pc1_r = std::fabs(fc.r);
    const bool ok = pc1_r >= 0.85;
    line(7, ok, fmt("|Pearson r(PC_1, power)| = %.4f on REG-3 (need >= 0.85)", pc1_r));
    REQUIRE(ok);
}

namespace {

// Compact property battery for criterion 8; each check mirrors a unit-suite
// oracle but runs here so the criterion line is self-contained.
bool cdf_identities() {
    RngStream rng(17);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.next_uniform(-8.0, 8.0);
        const double df = rng.next_uniform(0.5, 60.0);
        if (std::fabs(t_cdf(x, df) + t_cdf(-x, df) - 1.0) > 1e-12) return false;
        const double xf = rng.next_uniform(0.01, 10.0);
        const double a = rng.next_uniform(0.5, 40.0), b = rng.next_uniform(0.5, 40.0);
        if (std::fabs(f_cdf(xf, a, b) - (1.0 - f_cdf(1.0 / xf, b, a))) > 1e-10) return false;
        if (t_cdf(x + 0.5, df) < t_cdf(x, df) - 1e-12) return false;
    }
    return true;
}

bool ols_oracle() {
    RngStream rng(31);
    const Matrix x = generate_design(design_d_o(3), 50, rng);
    const auto y = generate_linear_response(x, {0.4, -0.2, 0.7}, rng);
    const auto fit = fit_ols(x, y);
    // Gauss-Jordan on the normal equations.
    const std::size_t p = 4;
    Matrix aug(p, p + 1);
    Matrix xd(50, p);
    for (std::size_t i = 0; i < 50; ++i) {
        xd(i, 0) = 1.0;
        for (std::size_t j = 0; j < 3; ++j) xd(i, j + 1) = x(i, j);
    }
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
            double s = 0;
            for (std::size_t i = 0; i < 50; ++i) s += xd(i, a) * xd(i, b);
            aug(a, b) = s;
        }
        double s = 0;
        for (std::size_t i = 0; i < 50; ++i) s += xd(i, a) * y[i];
        aug(a, p) = s;
    }
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::fabs(aug(r, col)) > std::fabs(aug(piv, col))) piv = r;
        for (std::size_t c = 0; c <= p; ++c) std::swap(aug(col, c), aug(piv, c));
        const double d = aug(col, col);
        for (std::size_t c = 0; c <= p; ++c) aug(col, c) /= d;
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            const double f = aug(r, col);
            for (std::size_t c = 0; c <= p; ++c) aug(r, c) -= f * aug(col, c);
        }
    }
    for (std::size_t a = 0; a < p; ++a)
        if (std::fabs(fit.coefficients[a] - aug(a, p)) > 1e-8) return false;
    return true;
}

bool irls_oracle() {
    RngStream rng(55);
    const std::size_t n = 120;
    Matrix x(n, 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = rng.next_normal();
        const double p = 1.0 / (1.0 + std::exp(-(0.3 + 0.8 * x(i, 0))));
        y[i] = rng.next_uniform() < p ? 1.0 : 0.0;
    }
    const auto fit = fit_logistic_irls(x, y);
    if (!fit.converged) return false;
    double b0 = 0.0, b1 = 0.0;
    for (int it = 0; it < 200; ++it) {
        double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * x(i, 0))));
            const double w = p * (1.0 - p);
            g0 += y[i] - p;
            g1 += (y[i] - p) * x(i, 0);
            h00 += w;
            h01 += w * x(i, 0);
            h11 += w * x(i, 0) * x(i, 0);
        }
        const double det = h00 * h11 - h01 * h01;
        b0 += (h11 * g0 - h01 * g1) / det;
        b1 += (h00 * g1 - h01 * g0) / det;
    }
    return std::fabs(fit.coefficients[0] - b0) <= 1e-6 &&
           std::fabs(fit.coefficients[1] - b1) <= 1e-6;
}

bool pca_properties() {
    RngStream rng(67);
    Matrix x(200, 5);
    for (auto& v : x.data()) v = rng.next_normal() * rng.next_uniform(0.5, 2.0);
    const auto model = pca_fit(x, 1.0);
    for (std::size_t a = 0; a < model.retained(); ++a)
        for (std::size_t b = 0; b < model.retained(); ++b) {
            double dot = 0;
            for (std::size_t i = 0; i < 5; ++i)
                dot += model.components(i, a) * model.components(i, b);
            if (std::fabs(dot - (a == b ? 1.0 : 0.0)) > 1e-8) return false;
        }
    const Matrix pcs = pca_transform(model, x);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t c = 0; c < 5; ++c) {
            double rec = 0;
            for (std::size_t j = 0; j < 5; ++j) rec += pcs(i, j) * model.components(c, j);
            const double z = (x(i, c) - model.means[c]) / model.stds[c];
            if (std::fabs(rec - z) > 1e-8) return false;
        }
    return true;
}

bool gradient_battery() {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream rng = RngStream(800).child(seed);
        TrainConfig cfg;
        cfg.hidden = {2 + seed % 4, 2 + seed % 3};
        const FeatureSchema schema{seed % 3, seed % 2};
        auto net = init_network(schema, cfg, rng);
        Matrix batch(3, schema.total());
        std::vector<double> targets(3);
        for (auto& v : batch.data()) v = rng.next_normal();
        for (auto& t : targets) t = rng.next_uniform();
        if (grad_check(net, batch, targets, seed % 2 ? LossKind::kBce : LossKind::kMse) >
            1e-4)
            return false;
    }
    return true;
}

bool kmeans_monotone() {
    RngStream data_rng(600);
    Matrix x(80, 2);
    for (auto& v : x.data()) v = data_rng.next_normal();
    RngStream rng(601);
    std::vector<double> history;
    kmeans(x, 4, rng, 1, &history);
    for (std::size_t i = 1; i < history.size(); ++i)
        if (history[i] > history[i - 1] + 1e-9) return false;
    return history.size() >= 2;
}

bool labelprop_clamping() {
    RngStream rng(91);
    Matrix x(40, 2);
    for (auto& v : x.data()) v = rng.next_normal();
    const auto model = label_propagation(x, {0, 1, 2, 3}, {1, 0, 1, 0}, 0.5);
    return model.labels[0] == 1 && model.labels[1] == 0 && model.labels[2] == 1 &&
           model.labels[3] == 0;
}

bool divergence_battery() {
    RngStream rng(6);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 2 + rng.next_index(6);
        std::vector<double> a(n), b(n);
        double sa = 0, sb = 0;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.next_uniform() + 1e-6;
            b[i] = rng.next_uniform() + 1e-6;
            sa += a[i];
            sb += b[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            a[i] /= sa;
            b[i] /= sb;
        }
        if (kl_divergence(a, b) < -1e-12) return false;
        if (js_divergence(a, b) != js_divergence(b, a)) return false;
    }
    return true;
}

bool cli_reruns_identical() {
    const fs::path dir =
        fs::temp_directory_path() / ("powermap_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto file = [&dir](const std::string& n) { return (dir / n).string(); };
    {
        std::ofstream cfg(file("cfg.json"));
        cfg << R"({
  "family": "REG", "design": {"name": "D_O", "k": 3},
  "sims": 50,
  "sampler": {"total_points": 80, "local_points": 3, "local_sigma": 0.05,
              "beta_domain": [[0.0,0.45],[0.0,0.1],[0.0,0.45]], "n_domain": [10, 90]},
  "train_fraction": 0.25, "boundary": 0.8, "seed": 42, "split_seed": 1,
  "threads": 2, "epochs": 40
})";
    }
    auto run = [&](const std::string& args) {
        const std::string cmd =
            std::string(POWERMAP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string cfg = " --config " + file("cfg.json");
    for (int round = 0; round < 2; ++round) {
        const std::string sfx = round == 0 ? "" : "_b";
        if (!run("sample" + cfg + " --out " + file("p" + sfx + ".csv"))) return false;
        if (!run("simulate" + cfg + " --points " + file("p" + sfx + ".csv") + " --out " +
                 file("d" + sfx + ".csv")))
            return false;
        if (!run("train" + cfg + " --dataset " + file("d" + sfx + ".csv") + " --out " +
                 file("c" + sfx + ".json") + " --report " + file("r" + sfx + ".json")))
            return false;
        if (!run("transfer" + cfg + " --parent " + file("c" + sfx + ".json") +
                 " --dataset " + file("d" + sfx + ".csv") + " --out " +
                 file("ct" + sfx + ".json") + " --report " + file("rt" + sfx + ".json")))
            return false;
        if (!run("baseline" + cfg + " --dataset " + file("d" + sfx + ".csv") +
                 " --which kneighbors --report " + file("rb" + sfx + ".json")))
            return false;
        if (!run("eval" + cfg + " --checkpoint " + file("c" + sfx + ".json") +
                 " --dataset " + file("d" + sfx + ".csv") + " --report " +
                 file("re" + sfx + ".json")))
            return false;
        if (!run("plot" + cfg + " --kind manifold --dataset " + file("d" + sfx + ".csv") +
                 " --out " + file("m" + sfx + ".svg")))
            return false;
    }
    const bool ok = slurp(file("p.csv")) == slurp(file("p_b.csv")) &&
                    slurp(file("d.csv")) == slurp(file("d_b.csv")) &&
                    slurp(file("c.json")) == slurp(file("c_b.json")) &&
                    slurp(file("r.json")) == slurp(file("r_b.json")) &&
                    slurp(file("ct.json")) == slurp(file("ct_b.json")) &&
                    slurp(file("rt.json")) == slurp(file("rt_b.json")) &&
                    slurp(file("rb.json")) == slurp(file("rb_b.json")) &&
                    slurp(file("re.json")) == slurp(file("re_b.json")) &&
                    slurp(file("m.svg")) == slurp(file("m_b.svg")) &&
                    slurp(file("m.csv")) == slurp(file("m_b.csv"));
    fs::remove_all(dir);
    return ok;
}

}  // namespace

TEST_CASE("criterion 8: property suites") {
    const bool cdf = cdf_identities();
    const bool ols = ols_oracle();
    const bool irls = irls_oracle();
    const bool pca = pca_properties();
    const bool grad = gradient_battery();
    const bool km = kmeans_monotone();
    const bool lp = labelprop_clamping();
    const bool div = divergence_battery();
    const bool cli = cli_reruns_identical();
    const bool ok = cdf && ols && irls && pca && grad && km && lp && div && cli;
    line(8, ok,
         fmt("cdf=%d ols=%d irls=%d pca=%d grad=%d kmeans=%d labelprop=%d divergence=%d "
             "cli_reruns=%d",
             cdf, ols, irls, pca, grad, km, lp, div, cli));
    REQUIRE(ok);
}

TEST_CASE("criterion 9: baseline ordering") {
    RunConfig cfg = reg3_config();
    cfg.train_fraction = 0.10;
    std::vector<double> f_pnn, f_rand, f_clus, f_knn, f_lprop;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        cfg.split_seed = s;
        cfg.seed = 60 + s;
        f_pnn.push_back(run_train(reg3_dataset(), cfg).report.metrics.at("f1").value);
        f_rand.push_back(
            run_baseline(reg3_dataset(), cfg, BaselineKind::kRand).report.metrics.at("f1").value);
        f_clus.push_back(run_baseline(reg3_dataset(), cfg, BaselineKind::kCluster)
                             .report.metrics.at("f1")
                             .value);
        f_knn.push_back(run_baseline(reg3_dataset(), cfg, BaselineKind::kKneighbors)
                            .report.metrics.at("f1")
                            .value);
        f_lprop.push_back(run_baseline(reg3_dataset(), cfg, BaselineKind::kLabelProp)
                              .report.metrics.at("f1")
                              .value);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double m_pnn = median(f_pnn), m_rand = median(f_rand), m_clus = median(f_clus),
                 m_knn = median(f_knn), m_lprop = median(f_lprop);
    const bool ok = m_rand <= m_clus && m_rand <= m_knn && m_lprop <= m_pnn + 0.02;
    line(9, ok,
         fmt("median F1: rand=%.3f cluster=%.3f kneighbors=%.3f labelprop=%.3f pnn=%.3f "
             "(need rand <= {cluster, kneighbors}, labelprop <= pnn + 0.02)",
             m_rand, m_clus, m_knn, m_lprop, m_pnn));
    REQUIRE(ok);
}
