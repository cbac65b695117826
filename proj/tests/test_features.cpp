#include <catch_amalgamated.hpp>

#include <cmath>

#include "powermap/features.hpp"
#include "powermap/rng.hpp"

using namespace powermap;

namespace {

// Test-side oracle: classical Jacobi with largest-off-diagonal pivoting,
// written independently of the cyclic sweep the library uses.
std::vector<double> classical_jacobi_eigenvalues(Matrix a) {
    const std::size_t n = a.rows();
    for (int iter = 0; iter < 10000; ++iter) {
        std::size_t p = 0, q = 1;
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (std::fabs(a(i, j)) > off) {
                    off = std::fabs(a(i, j));
                    p = i;
                    q = j;
                }
        if (off < 1e-14) break;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
            const double akp = a(k, p), akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double apk = a(p, k), aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

std::vector<PowerRecord> synthetic_records(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<PowerRecord> recs(n);
    for (auto& r : recs) {
        r.point.beta = {rng.next_uniform(0.0, 0.5), rng.next_uniform(0.0, 0.1),
                        rng.next_uniform(0.0, 0.5)};
        r.point.sample_size = static_cast<long>(rng.next_uniform(10, 90));
        r.power = rng.next_uniform();
        r.sims = 200;
    }
    return recs;
}

}  // namespace

TEST_CASE("scaled weight") {
    REQUIRE(scaled_weight({3, 4}, 10) == Catch::Approx(50.0).margin(0.0));
    REQUIRE(scaled_weight({0, 0, 0}, 123) == 0.0);
    REQUIRE(scaled_weight({1, 1, 1, 1}, 2) == Catch::Approx(4.0).margin(0.0));
}

TEST_CASE("pca on uncorrelated columns of descending variance recovers the axes") {
    // Hadamard-pattern columns: exactly orthogonal, zero mean, descending
    // scale, so the standardized covariance is exactly diagonal.
    const double h[4][3] = {{3, 2, 1}, {3, -2, -1}, {-3, 2, -1}, {-3, -2, 1}};
    Matrix x(16, 3);
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = h[i % 4][j];
    const auto model = pca_fit(x, 1.0);
    REQUIRE(model.retained() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        double maxabs = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            maxabs = std::max(maxabs, std::fabs(model.components(i, j)));
        REQUIRE(maxabs > 0.999);
    }
}

TEST_CASE("pca on perfectly correlated columns keeps one component") {
    RngStream rng(65);
    Matrix x(500, 2);
    for (std::size_t i = 0; i < 500; ++i) {
        const double v = rng.next_normal();
        x(i, 0) = v;
        x(i, 1) = 3.0 * v + 1.0;
    }
    const auto model = pca_fit(x, 0.99);
    REQUIRE(model.retained() == 1);
    REQUIRE(model.explained_ratios[0] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("pca eigenvalues match an independent Jacobi oracle") {
    RngStream rng(66);
    Matrix x(100, 5);
    for (auto& v : x.data()) v = rng.next_normal();
    const auto model = pca_fit(x, 1.0);
    // Rebuild the standardized covariance the library decomposes.
    Matrix z(100, 5);
    for (std::size_t i = 0; i < 100; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            z(i, j) = (x(i, j) - model.means[j]) / model.stds[j];
    Matrix cov = linalg::gram(z);
    for (auto& v : cov.data()) v /= 99.0;
    const auto oracle = classical_jacobi_eigenvalues(cov);
    double total = 0.0;
    for (double v : oracle) total += v;
    for (std::size_t j = 0; j < 5; ++j)
        REQUIRE(model.explained_ratios[j] * total ==
                Catch::Approx(oracle[j]).margin(1e-8));
}

TEST_CASE("pca components are orthonormal and ratios sum to one") {
    RngStream rng(67);
    Matrix x(300, 6);
    for (auto& v : x.data()) v = rng.next_uniform();
    const auto model = pca_fit(x, 1.0);
    for (std::size_t a = 0; a < model.retained(); ++a) {
        for (std::size_t b = 0; b < model.retained(); ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 6; ++i)
                dot += model.components(i, a) * model.components(i, b);
            REQUIRE(dot == Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-8));
        }
    }
    double sum = 0.0;
    for (double r : model.explained_ratios) {
        sum += r;
        REQUIRE(r >= -1e-12);
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-8));
    for (std::size_t j = 1; j < model.explained_ratios.size(); ++j)
        REQUIRE(model.explained_ratios[j] <= model.explained_ratios[j - 1] + 1e-12);
}

TEST_CASE("transformed fitting data has component variances equal to eigenvalues") {
    RngStream rng(68);
    Matrix x(400, 4);
    for (auto& v : x.data()) v = rng.next_normal() * rng.next_uniform(0.5, 3.0);
    const auto model = pca_fit(x, 1.0);
    const Matrix pcs = pca_transform(model, x);
    for (std::size_t j = 0; j < model.retained(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 400; ++i) mean += pcs(i, j);
        mean /= 400.0;
        double var = 0.0;
        for (std::size_t i = 0; i < 400; ++i) var += (pcs(i, j) - mean) * (pcs(i, j) - mean);
        var /= 399.0;
        // ratios are eigenvalue / total; total variance of standardized data
        double total = 0.0;
        for (double r : model.explained_ratios) total += r;
        const double eigenvalue = model.explained_ratios[j] / total *
                                  [&] {
                                      double t = 0.0;
                                      for (std::size_t c = 0; c < 4; ++c) {
                                          double m = 0.0, ss = 0.0;
                                          for (std::size_t i = 0; i < 400; ++i)
                                              m += (x(i, c) - model.means[c]) / model.stds[c];
                                          m /= 400.0;
                                          for (std::size_t i = 0; i < 400; ++i) {
                                              const double d =
                                                  (x(i, c) - model.means[c]) / model.stds[c] - m;
                                              ss += d * d;
                                          }
                                          t += ss / 399.0;
                                      }
                                      return t;
                                  }();
        REQUIRE(var == Catch::Approx(eigenvalue).margin(1e-8));
    }
}

TEST_CASE("transforming the mean row gives zeros; round-trip reconstructs") {
    RngStream rng(69);
    Matrix x(200, 3);
    for (auto& v : x.data()) v = rng.next_uniform(-2.0, 5.0);
    const auto model = pca_fit(x, 1.0);
    Matrix mean_row(1, 3);
    for (std::size_t j = 0; j < 3; ++j) mean_row(0, j) = model.means[j];
    const Matrix z = pca_transform(model, mean_row);
    for (std::size_t j = 0; j < model.retained(); ++j)
        REQUIRE(z(0, j) == Catch::Approx(0.0).margin(1e-10));

    // r = p: standardized data reconstructs as PC * V^T
    const Matrix pcs = pca_transform(model, x);
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            double rec = 0.0;
            for (std::size_t j = 0; j < 3; ++j) rec += pcs(i, j) * model.components(c, j);
            const double zstd = (x(i, c) - model.means[c]) / model.stds[c];
            REQUIRE(rec == Catch::Approx(zstd).margin(1e-8));
        }
    }
}

TEST_CASE("pca transform is affine on row combinations") {
    RngStream rng(70);
    Matrix x(50, 4);
    for (auto& v : x.data()) v = rng.next_normal();
    const auto model = pca_fit(x, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = rng.next_uniform();
        Matrix xa(1, 4), xb(1, 4), mix(1, 4);
        for (std::size_t j = 0; j < 4; ++j) {
            xa(0, j) = rng.next_normal();
            xb(0, j) = rng.next_normal();
            mix(0, j) = a * xa(0, j) + (1.0 - a) * xb(0, j);
        }
        const Matrix ta = pca_transform(model, xa);
        const Matrix tb = pca_transform(model, xb);
        const Matrix tm = pca_transform(model, mix);
        for (std::size_t j = 0; j < model.retained(); ++j)
            REQUIRE(tm(0, j) ==
                    Catch::Approx(a * ta(0, j) + (1.0 - a) * tb(0, j)).margin(1e-8));
    }
}

TEST_CASE("constant columns are standardized with unit scale") {
    Matrix x(10, 2);
    for (std::size_t i = 0; i < 10; ++i) {
        x(i, 0) = 7.0;  // constant
        x(i, 1) = static_cast<double>(i);
    }
    const auto model = pca_fit(x, 1.0);
    REQUIRE(model.stds[0] == 1.0);
}

TEST_CASE("pca rejects empty input") {
    REQUIRE_THROWS_AS(pca_fit(Matrix(), 0.99), std::invalid_argument);
    Matrix one_row(1, 3);
    REQUIRE_THROWS_AS(pca_fit(one_row, 0.99), std::invalid_argument);
}

TEST_CASE("assemble_features labels and widths") {
    auto recs = synthetic_records(100, 5);
    recs[0].power = 0.80;
    recs[1].power = 0.81;
    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < 50; ++i) train_rows.push_back(i);
    const auto bundle = assemble_features(recs, train_rows, 0.8, 0.99);
    REQUIRE(bundle.labels[0] == 0);  // boundary itself is not well-powered
    REQUIRE(bundle.labels[1] == 1);
    REQUIRE(bundle.features.cols() == 3 + 2 + bundle.pca.retained());
    REQUIRE(bundle.features.rows() == 100);
}

TEST_CASE("pca is fit on the training split only") {
    const auto recs = synthetic_records(80, 6);
    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < 20; ++i) train_rows.push_back(i);
    const auto bundle = assemble_features(recs, train_rows, 0.8, 0.99);
    // Means must equal the train-split base feature means exactly.
    const Matrix base = base_features(recs);
    for (std::size_t j = 0; j < base.cols(); ++j) {
        double m = 0.0;
        for (auto i : train_rows) m += base(i, j);
        m /= static_cast<double>(train_rows.size());
        REQUIRE(bundle.pca.means[j] == Catch::Approx(m).margin(1e-12));
    }
    // Transforming a held-out row twice is identical (model is frozen).
    Matrix row(1, base.cols());
    row.set_row(0, base.row(60));
    const auto t1 = pca_transform(bundle.pca, row);
    const auto t2 = pca_transform(bundle.pca, row);
    REQUIRE(t1.data() == t2.data());
}

TEST_CASE("correlation report flags exact and degenerate relationships") {
    std::vector<PowerRecord> recs(50);
    RngStream rng(8);
    for (auto& r : recs) {
        const double p = rng.next_uniform();
        r.power = p;
        r.point.beta = {p, -p, 0.5};  // beta_1 == power, beta_2 == -power, beta_3 const
        r.point.sample_size = 50;
    }
    std::vector<std::size_t> rows(recs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const auto bundle = assemble_features(recs, rows, 0.8, 0.99);
    const auto report = correlation_report(bundle);
    REQUIRE(report[0].name == "beta_1");
    REQUIRE(report[0].r == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(report[1].r == Catch::Approx(-1.0).margin(1e-9));
    REQUIRE(report[2].degenerate);
    REQUIRE(report[2].r == 0.0);
}
