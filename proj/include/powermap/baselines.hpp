#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "powermap/features.hpp"
#include "powermap/matrix.hpp"
#include "powermap/rng.hpp"

namespace powermap {

// ---------------------------------------------------------------------------
// P-RAND
// ---------------------------------------------------------------------------

inline std::vector<int> p_rand(std::size_t n, RngStream& rng) {
    std::vector<int> labels(n);
    for (auto& l : labels) l = rng.next_uniform() < 0.5 ? 0 : 1;
    return labels;
}

// ---------------------------------------------------------------------------
// K-means (k-means++ seeding, Lloyd iterations, restarts)
// ---------------------------------------------------------------------------

struct ClusterModel {
    Matrix centroids;                    // k_clusters x d
    std::vector<std::size_t> assignment;
    std::vector<std::string> feature_axes;
    double inertia = 0.0;
};

namespace detail {

inline double sq_dist(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const double d = a(i, c) - b(j, c);
        s += d * d;
    }
    return s;
}

struct LloydResult {
    Matrix centroids;
    std::vector<std::size_t> assignment;
    double inertia = 0.0;
};

inline LloydResult lloyd_once(const Matrix& points, std::size_t k, RngStream& rng,
                              int max_iter = 300,
                              std::vector<double>* inertia_history = nullptr) {
    const std::size_t n = points.rows(), d = points.cols();
    // k-means++ seeding
    Matrix centroids(k, d);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    std::size_t first = rng.next_index(n);
    centroids.set_row(0, points.row(first));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            min_d2[i] = std::min(min_d2[i], sq_dist(points, i, centroids, c - 1));
            total += min_d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.next_uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.next_index(n);
        }
        centroids.set_row(c, points.row(pick));
    }

    LloydResult res;
    res.assignment.assign(n, 0);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d2 = sq_dist(points, i, centroids, c);
                if (d2 < best) {
                    best = d2;
                    arg = c;
                }
            }
            if (arg != res.assignment[i]) {
                res.assignment[i] = arg;
                changed = true;
            }
        }
        if (inertia_history) {
            double inertia = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                inertia += sq_dist(points, i, centroids, res.assignment[i]);
            inertia_history->push_back(inertia);
        }
        Matrix sums(k, d);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            counts[res.assignment[i]] += 1;
            for (std::size_t c = 0; c < d; ++c) sums(res.assignment[i], c) += points(i, c);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Empty cluster: reseed at the point farthest from its centroid.
                double far_d = -1.0;
                std::size_t far_i = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d2 = sq_dist(points, i, centroids, res.assignment[i]);
                    if (d2 > far_d) {
                        far_d = d2;
                        far_i = i;
                    }
                }
                centroids.set_row(c, points.row(far_i));
                changed = true;
            } else {
                for (std::size_t cc = 0; cc < d; ++cc)
                    centroids(c, cc) = sums(c, cc) / static_cast<double>(counts[c]);
            }
        }
        if (!changed && it > 0) break;
    }
    res.centroids = centroids;
    res.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        res.inertia += sq_dist(points, i, res.centroids, res.assignment[i]);
    return res;
}

}  // namespace detail

inline ClusterModel kmeans(const Matrix& points, std::size_t k_clusters, RngStream& rng,
                           int restarts = 10,
                           std::vector<double>* inertia_history = nullptr) {
    if (k_clusters == 0 || points.rows() < k_clusters)
        throw std::invalid_argument("kmeans: need rows >= k_clusters >= 1");
    detail::LloydResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        RngStream run = rng.child(static_cast<std::uint64_t>(r));
        auto res = detail::lloyd_once(points, k_clusters, run, 300,
                                      r == 0 ? inertia_history : nullptr);
        if (res.inertia < best.inertia) best = std::move(res);
    }
    ClusterModel model;
    model.centroids = best.centroids;
    model.assignment = best.assignment;
    model.inertia = best.inertia;
    return model;
}

// ---------------------------------------------------------------------------
// P-CLUSTER: PCA then k-means, labels never consumed
// ---------------------------------------------------------------------------

// Clusters on standardized (PC_1, Nsigma) by default; `full_pca_space` swaps
// in every retained component instead.
inline ClusterModel power_cluster(const std::vector<PowerRecord>& records,
                                  double variance_target, std::size_t k_clusters,
                                  RngStream& rng, bool full_pca_space = false) {
    if (records.empty()) throw std::invalid_argument("power_cluster: empty dataset");
    const Matrix base = base_features(records);
    if (records.size() == 1) {
        ClusterModel model;
        model.centroids = base;
        model.assignment = {0};
        model.inertia = 0.0;
        model.feature_axes = {"row"};
        return model;
    }
    const PcaModel pca = pca_fit(base, variance_target);
    const Matrix pcs = pca_transform(pca, base);
    Matrix axes;
    ClusterModel out;
    if (full_pca_space) {
        axes = pcs;
        for (std::size_t j = 1; j <= pcs.cols(); ++j)
            out.feature_axes.push_back("pc_" + std::to_string(j));
    } else {
        const std::size_t ns_col = base.cols() - 1;
        axes = Matrix(base.rows(), 2);
        for (std::size_t i = 0; i < base.rows(); ++i) {
            axes(i, 0) = pcs(i, 0);
            axes(i, 1) = (base(i, ns_col) - pca.means[ns_col]) / pca.stds[ns_col];
        }
        out.feature_axes = {"pc_1", "scaled_weight_std"};
    }
    const ClusterModel fitted = kmeans(axes, std::min(k_clusters, records.size()), rng);
    out.centroids = fitted.centroids;
    out.assignment = fitted.assignment;
    out.inertia = fitted.inertia;
    return out;
}

// ---------------------------------------------------------------------------
// PK-Neighbors
// ---------------------------------------------------------------------------

// Majority vote among the n nearest training rows by Euclidean distance;
// ties resolve toward the nearer neighborhood's majority, then label 0.
inline std::vector<int> kneighbors_classify(const Matrix& train_features,
                                            const std::vector<int>& train_labels,
                                            const Matrix& test_features,
                                            std::size_t n_neighbors = 5) {
    if (train_features.rows() == 0)
        throw std::invalid_argument("kneighbors_classify: empty training set");
    if (train_features.rows() != train_labels.size())
        throw std::invalid_argument("kneighbors_classify: feature/label mismatch");
    if (n_neighbors == 0 || n_neighbors > train_features.rows())
        throw std::invalid_argument("kneighbors_classify: bad n_neighbors");
    std::vector<int> out(test_features.rows());
    std::vector<std::pair<double, std::size_t>> dist(train_features.rows());
    for (std::size_t t = 0; t < test_features.rows(); ++t) {
        for (std::size_t i = 0; i < train_features.rows(); ++i)
            dist[i] = {detail::sq_dist(test_features, t, train_features, i), i};
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(n_neighbors),
                          dist.end());
        int votes1 = 0;
        for (std::size_t j = 0; j < n_neighbors; ++j)
            votes1 += train_labels[dist[j].second];
        const int votes0 = static_cast<int>(n_neighbors) - votes1;
        if (votes1 > votes0) {
            out[t] = 1;
        } else if (votes1 < votes0) {
            out[t] = 0;
        } else {
            // Tie: majority among the nearer half of the neighborhood.
            int near1 = 0;
            const std::size_t half = n_neighbors / 2;
            for (std::size_t j = 0; j < half; ++j) near1 += train_labels[dist[j].second];
            out[t] = (2 * near1 > static_cast<int>(half)) ? 1 : 0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// PL-PROP: RBF-kernel label propagation
// ---------------------------------------------------------------------------

struct PropagationModel {
    double kernel_gamma = 20.0;
    std::vector<int> labels;          // transduced labels for every row
    Matrix label_distribution;        // n x 2, probability rows
    std::vector<std::size_t> clamped; // the labeled input rows
    int iterations = 0;
    bool converged = false;
};

// Fully-connected affinity graph W_ij = exp(-gamma ||x_i - x_j||^2) over
// standardized features, row-normalized; iterate Y <- T Y with the labeled
// rows clamped each step.
inline PropagationModel label_propagation(const Matrix& features,
                                          const std::vector<std::size_t>& labeled_rows,
                                          const std::vector<int>& labeled_values,
                                          double gamma = 20.0, int max_iter = 1000,
                                          double tol = 1e-3) {
    const std::size_t n = features.rows();
    if (labeled_rows.empty())
        throw std::invalid_argument("label_propagation: no labeled rows");
    if (labeled_rows.size() != labeled_values.size())
        throw std::invalid_argument("label_propagation: labeled rows/values mismatch");
    if (gamma <= 0.0) throw std::invalid_argument("label_propagation: gamma must be > 0");

    // Standardize columns so the kernel scale is comparable across features.
    Matrix z = features;
    for (std::size_t j = 0; j < z.cols(); ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += z(i, j);
        m /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (z(i, j) - m) * (z(i, j) - m);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        const double div = sd > 0.0 ? sd : 1.0;
        for (std::size_t i = 0; i < n; ++i) z(i, j) = (z(i, j) - m) / div;
    }

    Matrix transition(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = std::exp(-gamma * detail::sq_dist(z, i, z, j));
            transition(i, j) = w;
            row_sum += w;
        }
        for (std::size_t j = 0; j < n; ++j) transition(i, j) /= row_sum;  // W_ii = 1 > 0
    }

    PropagationModel model;
    model.kernel_gamma = gamma;
    model.clamped = labeled_rows;
    Matrix y(n, 2);
    std::vector<bool> is_clamped(n, false);
    for (std::size_t i = 0; i < labeled_rows.size(); ++i) {
        const std::size_t r = labeled_rows[i];
        if (r >= n) throw std::invalid_argument("label_propagation: labeled row out of range");
        is_clamped[r] = true;
        y(r, labeled_values[i] == 1 ? 1 : 0) = 1.0;
    }

    Matrix next(n, 2);
    for (int it = 0; it < max_iter; ++it) {
        model.iterations = it + 1;
        double max_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double c0 = 0.0, c1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                c0 += transition(i, j) * y(j, 0);
                c1 += transition(i, j) * y(j, 1);
            }
            next(i, 0) = c0;
            next(i, 1) = c1;
        }
        for (std::size_t i = 0; i < labeled_rows.size(); ++i) {
            const std::size_t r = labeled_rows[i];
            next(r, 0) = labeled_values[i] == 1 ? 0.0 : 1.0;
            next(r, 1) = labeled_values[i] == 1 ? 1.0 : 0.0;
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < 2; ++c)
                max_change = std::max(max_change, std::fabs(next(i, c) - y(i, c)));
        y = next;
        if (max_change < tol) {
            model.converged = true;
            break;
        }
    }

    // Normalize rows into distributions; rows with no mass stay uniform.
    model.label_distribution = Matrix(n, 2);
    model.labels.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double total = y(i, 0) + y(i, 1);
        if (total > 0.0) {
            model.label_distribution(i, 0) = y(i, 0) / total;
            model.label_distribution(i, 1) = y(i, 1) / total;
        } else {
            model.label_distribution(i, 0) = 0.5;
            model.label_distribution(i, 1) = 0.5;
        }
        model.labels[i] = model.label_distribution(i, 1) > model.label_distribution(i, 0) ? 1 : 0;
    }
    return model;
}

}  // namespace powermap
