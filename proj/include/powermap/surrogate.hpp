#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "powermap/features.hpp"
#include "powermap/json_text.hpp"
#include "powermap/matrix.hpp"
#include "powermap/rng.hpp"

namespace powermap {

struct training_diverged_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct incompatible_transfer_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Network definition
// ---------------------------------------------------------------------------

enum class Activation { kRelu, kSigmoid };
enum class LossKind { kBce, kMse };
enum class TaskKind { kClassify, kRegress };

struct DenseLayer {
    Matrix weights;  // out x in
    std::vector<double> biases;
    Activation activation = Activation::kRelu;
};

// Feature block widths: {beta_1..k, N, Nsigma, pc_1..r}.
struct FeatureSchema {
    std::size_t beta_width = 0;
    std::size_t pc_width = 0;

    std::size_t total() const { return beta_width + 2 + pc_width; }
    bool operator==(const FeatureSchema&) const = default;
};

struct TrainingMeta {
    std::size_t epochs = 0;
    double learning_rate = 0.0;
    LossKind loss = LossKind::kBce;
    std::uint64_t seed = 0;
    std::string source = "fresh";  // "fresh" or "transfer:<parent id>"
};

struct NetworkCheckpoint {
    std::vector<DenseLayer> layers;
    FeatureSchema net_schema;   // width the first layer consumes
    FeatureSchema feed_schema;  // width callers supply; padded up to net_schema
    TrainingMeta meta;
    TaskKind task = TaskKind::kClassify;
    double boundary = 0.8;
    bool has_pca = false;
    PcaModel pca;  // transform used to build pc features, carried for eval
};

struct TrainConfig {
    std::size_t epochs = 500;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    LossKind loss = LossKind::kBce;
    TaskKind task = TaskKind::kClassify;
    double boundary = 0.8;
    std::vector<std::size_t> hidden = {64, 32};
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    // Off by default: hold out a validation slice and keep the best epoch.
    bool early_stopping = false;
    double validation_fraction = 0.2;
};

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

namespace detail {

inline double activate(double z, Activation a) {
    switch (a) {
        case Activation::kRelu: return z > 0.0 ? z : 0.0;
        case Activation::kSigmoid: {
            // Clamp away from the closed endpoints so outputs stay in (0,1)
            // even when the exponential under/overflows.
            const double s = 1.0 / (1.0 + std::exp(-z));
            if (s <= 0.0) return 5e-324;
            if (s >= 1.0) return 1.0 - 1.1e-16;
            return s;
        }
    }
    return z;
}

inline double activate_grad(double out, Activation a) {
    switch (a) {
        case Activation::kRelu: return out > 0.0 ? 1.0 : 0.0;
        case Activation::kSigmoid: return out * (1.0 - out);
    }
    return 1.0;
}

// Pads a feed-schema row out to the net schema with structural zeros, the
// transfer mechanism for child models running inside a wider parent.
inline std::vector<double> pad_to_net(const NetworkCheckpoint& net,
                                      const std::vector<double>& row) {
    if (row.size() != net.feed_schema.total())
        throw schema_error("predict: feature width " + std::to_string(row.size()) +
                           " does not match schema width " +
                           std::to_string(net.feed_schema.total()));
    if (net.feed_schema == net.net_schema) return row;
    const auto& fs = net.feed_schema;
    const auto& ns = net.net_schema;
    std::vector<double> out(ns.total(), 0.0);
    for (std::size_t j = 0; j < fs.beta_width; ++j) out[j] = row[j];
    out[ns.beta_width] = row[fs.beta_width];          // N
    out[ns.beta_width + 1] = row[fs.beta_width + 1];  // N sigma
    for (std::size_t j = 0; j < fs.pc_width; ++j)
        out[ns.beta_width + 2 + j] = row[fs.beta_width + 2 + j];
    return out;
}

struct ForwardPass {
    std::vector<std::vector<double>> activations;  // [0] = input, back() = output
};

inline ForwardPass forward(const NetworkCheckpoint& net, const std::vector<double>& input) {
    ForwardPass fp;
    fp.activations.reserve(net.layers.size() + 1);
    fp.activations.push_back(pad_to_net(net, input));
    for (const auto& layer : net.layers) {
        const auto& prev = fp.activations.back();
        std::vector<double> next(layer.weights.rows());
        for (std::size_t o = 0; o < layer.weights.rows(); ++o) {
            double z = layer.biases[o];
            for (std::size_t i = 0; i < layer.weights.cols(); ++i)
                z += layer.weights(o, i) * prev[i];
            next[o] = activate(z, layer.activation);
        }
        fp.activations.push_back(std::move(next));
    }
    return fp;
}

}  // namespace detail

// Forward pass over all rows; outputs are sigmoid probabilities in (0, 1).
inline std::vector<double> predict(const NetworkCheckpoint& net, const Matrix& features) {
    std::vector<double> out(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i)
        out[i] = detail::forward(net, features.row(i)).activations.back()[0];
    return out;
}

inline std::vector<int> predict_labels(const NetworkCheckpoint& net, const Matrix& features,
                                       double threshold = 0.5) {
    std::vector<int> labels(features.rows());
    const auto probs = predict(net, features);
    for (std::size_t i = 0; i < probs.size(); ++i) labels[i] = probs[i] > threshold ? 1 : 0;
    return labels;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace detail {

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    std::size_t step = 0;

    explicit AdamState(const std::vector<DenseLayer>& layers) {
        for (const auto& l : layers) {
            m_w.emplace_back(l.weights.rows(), l.weights.cols());
            v_w.emplace_back(l.weights.rows(), l.weights.cols());
            m_b.emplace_back(l.biases.size(), 0.0);
            v_b.emplace_back(l.biases.size(), 0.0);
        }
    }
};

struct Gradients {
    std::vector<Matrix> d_w;
    std::vector<std::vector<double>> d_b;

    explicit Gradients(const std::vector<DenseLayer>& layers) {
        for (const auto& l : layers) {
            d_w.emplace_back(l.weights.rows(), l.weights.cols());
            d_b.emplace_back(l.biases.size(), 0.0);
        }
    }
};

// Accumulates gradients for one sample; returns its loss contribution.
inline double backprop_sample(const NetworkCheckpoint& net, const std::vector<double>& row,
                              double target, LossKind loss, double inv_batch,
                              Gradients& grads) {
    const ForwardPass fp = forward(net, row);
    const double yhat = fp.activations.back()[0];
    const double eps = 1e-12;
    double sample_loss = 0.0;
    double delta_out;  // dL/dz at the sigmoid output, already batch-averaged
    if (loss == LossKind::kBce) {
        sample_loss = -(target * std::log(yhat + eps) +
                        (1.0 - target) * std::log(1.0 - yhat + eps));
        delta_out = (yhat - target) * inv_batch;
    } else {
        const double diff = yhat - target;
        sample_loss = diff * diff;
        delta_out = 2.0 * diff * yhat * (1.0 - yhat) * inv_batch;
    }
    std::vector<double> delta{delta_out};
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const auto& layer = net.layers[li];
        const auto& prev = fp.activations[li];
        auto& dw = grads.d_w[li];
        auto& db = grads.d_b[li];
        for (std::size_t o = 0; o < layer.weights.rows(); ++o) {
            db[o] += delta[o];
            for (std::size_t i = 0; i < layer.weights.cols(); ++i)
                dw(o, i) += delta[o] * prev[i];
        }
        if (li == 0) break;
        const auto& below = net.layers[li - 1];
        std::vector<double> next_delta(layer.weights.cols(), 0.0);
        for (std::size_t i = 0; i < layer.weights.cols(); ++i) {
            double s = 0.0;
            for (std::size_t o = 0; o < layer.weights.rows(); ++o)
                s += layer.weights(o, i) * delta[o];
            next_delta[i] = s * activate_grad(fp.activations[li][i], below.activation);
        }
        delta = std::move(next_delta);
    }
    return sample_loss;
}

inline void adam_update(NetworkCheckpoint& net, const Gradients& grads, AdamState& adam,
                        const TrainConfig& cfg) {
    adam.step += 1;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(adam.step));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(adam.step));
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        auto& layer = net.layers[li];
        for (std::size_t o = 0; o < layer.weights.rows(); ++o) {
            for (std::size_t i = 0; i < layer.weights.cols(); ++i) {
                const double g = grads.d_w[li](o, i);
                double& m = adam.m_w[li](o, i);
                double& v = adam.v_w[li](o, i);
                m = b1 * m + (1.0 - b1) * g;
                v = b2 * v + (1.0 - b2) * g * g;
                layer.weights(o, i) -=
                    cfg.learning_rate * (m / corr1) / (std::sqrt(v / corr2) + cfg.adam_epsilon);
            }
            const double g = grads.d_b[li][o];
            double& m = adam.m_b[li][o];
            double& v = adam.v_b[li][o];
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            layer.biases[o] -=
                cfg.learning_rate * (m / corr1) / (std::sqrt(v / corr2) + cfg.adam_epsilon);
        }
    }
}

inline void shuffle_indices(std::vector<std::size_t>& idx, RngStream& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.next_index(i)]);
}

}  // namespace detail

// Mean loss of the network over a dataset.
inline double evaluate_loss(const NetworkCheckpoint& net, const Matrix& features,
                            const std::vector<double>& targets, LossKind loss) {
    const auto preds = predict(net, features);
    const double eps = 1e-12;
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (loss == LossKind::kBce)
            total += -(targets[i] * std::log(preds[i] + eps) +
                       (1.0 - targets[i]) * std::log(1.0 - preds[i] + eps));
        else
            total += (preds[i] - targets[i]) * (preds[i] - targets[i]);
    }
    return total / static_cast<double>(preds.size());
}

// Scaled uniform fan-in initialization, seeded for reproducibility.
inline NetworkCheckpoint init_network(const FeatureSchema& schema, const TrainConfig& config,
                                      RngStream& rng) {
    NetworkCheckpoint net;
    net.net_schema = schema;
    net.feed_schema = schema;
    net.task = config.task;
    net.boundary = config.boundary;
    std::vector<std::size_t> widths;
    widths.push_back(schema.total());
    for (auto h : config.hidden) widths.push_back(h);
    widths.push_back(1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        DenseLayer layer;
        layer.weights = Matrix(widths[l + 1], widths[l]);
        layer.biases.assign(widths[l + 1], 0.0);
        layer.activation =
            (l + 2 == widths.size()) ? Activation::kSigmoid : Activation::kRelu;
        const double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
        for (auto& w : layer.weights.data()) w = rng.next_uniform(-bound, bound);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

// Minibatch Adam on an existing network (fresh or transferred); returns the
// final-epoch weights unless early stopping is enabled.
inline NetworkCheckpoint fine_tune(NetworkCheckpoint net, const Matrix& features,
                                   const std::vector<double>& targets,
                                   const TrainConfig& config, RngStream rng) {
    if (features.rows() == 0) throw std::invalid_argument("train: empty feature matrix");
    if (features.rows() != targets.size())
        throw std::invalid_argument("train: feature/label length mismatch");
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

    std::vector<std::size_t> order(features.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::size_t val_count = 0;
    if (config.early_stopping) {
        detail::shuffle_indices(order, rng);
        val_count = static_cast<std::size_t>(
            std::floor(config.validation_fraction * static_cast<double>(order.size())));
    }
    std::vector<std::size_t> train_rows(order.begin(), order.end() - static_cast<long>(val_count));
    std::vector<std::size_t> val_rows(order.end() - static_cast<long>(val_count), order.end());
    if (train_rows.empty()) throw std::invalid_argument("train: empty training slice");

    detail::AdamState adam(net.layers);
    NetworkCheckpoint best = net;
    double best_val = std::numeric_limits<double>::infinity();

    const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        detail::shuffle_indices(train_rows, rng);
        for (std::size_t start = 0; start < train_rows.size(); start += batch) {
            const std::size_t stop = std::min(train_rows.size(), start + batch);
            detail::Gradients grads(net.layers);
            const double inv = 1.0 / static_cast<double>(stop - start);
            double batch_loss = 0.0;
            for (std::size_t bi = start; bi < stop; ++bi)
                batch_loss += detail::backprop_sample(net, features.row(train_rows[bi]),
                                                      targets[train_rows[bi]], config.loss,
                                                      inv, grads);
            if (!std::isfinite(batch_loss))
                throw training_diverged_error("training diverged (non-finite loss) at epoch " +
                                              std::to_string(epoch + 1));
            detail::adam_update(net, grads, adam, config);
        }
        if (config.early_stopping && !val_rows.empty()) {
            Matrix vf(val_rows.size(), features.cols());
            std::vector<double> vt(val_rows.size());
            for (std::size_t i = 0; i < val_rows.size(); ++i) {
                vf.set_row(i, features.row(val_rows[i]));
                vt[i] = targets[val_rows[i]];
            }
            const double vloss = evaluate_loss(net, vf, vt, config.loss);
            if (vloss < best_val) {
                best_val = vloss;
                best = net;
            }
        }
    }
    net.meta.epochs += config.epochs;
    net.meta.learning_rate = config.learning_rate;
    net.meta.loss = config.loss;
    if (config.early_stopping && std::isfinite(best_val)) {
        best.meta = net.meta;
        return best;
    }
    return net;
}

inline NetworkCheckpoint train_pnn(const FeatureSchema& schema, const Matrix& features,
                                   const std::vector<double>& targets,
                                   const TrainConfig& config, RngStream rng) {
    if (features.cols() != schema.total())
        throw schema_error("train_pnn: feature width does not match schema");
    NetworkCheckpoint net = init_network(schema, config, rng);
    net.meta.seed = rng.master_seed();
    net.meta.source = "fresh";
    return fine_tune(std::move(net), features, targets, config, rng);
}

// Coarse learning-rate sweep on an internal 80/20 split; picks the rate with
// the lowest validation loss, then trains on the full data.
inline NetworkCheckpoint train_pnn_lr_sweep(const FeatureSchema& schema, const Matrix& features,
                                            const std::vector<double>& targets,
                                            TrainConfig config, RngStream rng,
                                            const std::vector<double>& grid = {1e-2, 3e-3, 1e-3,
                                                                               3e-4}) {
    std::vector<std::size_t> order(features.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    RngStream split_rng = rng.child(1);
    detail::shuffle_indices(order, split_rng);
    const std::size_t val_count = std::max<std::size_t>(1, order.size() / 5);
    const std::size_t train_count = order.size() - val_count;
    if (train_count == 0) throw std::invalid_argument("lr sweep: dataset too small");
    Matrix tf(train_count, features.cols()), vf(val_count, features.cols());
    std::vector<double> tt(train_count), vt(val_count);
    for (std::size_t i = 0; i < train_count; ++i) {
        tf.set_row(i, features.row(order[i]));
        tt[i] = targets[order[i]];
    }
    for (std::size_t i = 0; i < val_count; ++i) {
        vf.set_row(i, features.row(order[train_count + i]));
        vt[i] = targets[order[train_count + i]];
    }
    double best_lr = config.learning_rate;
    double best_loss = std::numeric_limits<double>::infinity();
    for (double lr : grid) {
        TrainConfig probe = config;
        probe.learning_rate = lr;
        const auto net = train_pnn(schema, tf, tt, probe, rng.child(2));
        const double vloss = evaluate_loss(net, vf, vt, config.loss);
        if (vloss < best_loss) {
            best_loss = vloss;
            best_lr = lr;
        }
    }
    config.learning_rate = best_lr;
    return train_pnn(schema, features, targets, config, rng.child(3));
}

// ---------------------------------------------------------------------------
// Transfer initialization
// ---------------------------------------------------------------------------

// Wraps a pretrained parent so that a narrower child feature layout feeds
// it; unmapped parent inputs receive structural zeros. Hidden and output
// layers are copied verbatim.
inline NetworkCheckpoint transfer_init(const NetworkCheckpoint& parent,
                                       const FeatureSchema& child_schema,
                                       const std::string& parent_id = "parent") {
    if (child_schema.beta_width > parent.net_schema.beta_width ||
        child_schema.pc_width > parent.net_schema.pc_width)
        throw incompatible_transfer_error(
            "transfer_init: child blocks exceed parent (beta " +
            std::to_string(child_schema.beta_width) + ">" +
            std::to_string(parent.net_schema.beta_width) + " or pc " +
            std::to_string(child_schema.pc_width) + ">" +
            std::to_string(parent.net_schema.pc_width) + ")");
    NetworkCheckpoint child = parent;
    child.feed_schema = child_schema;
    child.meta.source = "transfer:" + parent_id;
    child.meta.epochs = 0;
    return child;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

// Central finite differences over every parameter; returns the max relative
// error against the analytic gradients. A probe that flips any ReLU on/off
// leaves the linear region where the two-sided difference is valid, so such
// parameters are skipped rather than reported as mismatches.
inline double grad_check(const NetworkCheckpoint& net, const Matrix& features,
                         const std::vector<double>& targets, LossKind loss,
                         double h = 1e-5) {
    if (features.rows() == 0) throw std::invalid_argument("grad_check: empty batch");
    detail::Gradients analytic(net.layers);
    const double inv = 1.0 / static_cast<double>(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i)
        detail::backprop_sample(net, features.row(i), targets[i], loss, inv, analytic);

    NetworkCheckpoint probe = net;
    double max_rel = 0.0;
    auto loss_and_mask = [&](std::uint64_t& mask) {
        const double eps = 1e-12;
        double total = 0.0;
        mask = 1469598103934665603ULL;
        for (std::size_t i = 0; i < features.rows(); ++i) {
            const auto fp = detail::forward(probe, features.row(i));
            for (std::size_t li = 0; li + 1 < fp.activations.size() - 1; ++li)
                for (double a : fp.activations[li + 1]) {
                    mask ^= (a > 0.0) ? 0x9E37ULL : 0x79B9ULL;
                    mask *= 1099511628211ULL;
                }
            const double yhat = fp.activations.back()[0];
            if (loss == LossKind::kBce)
                total += -(targets[i] * std::log(yhat + eps) +
                           (1.0 - targets[i]) * std::log(1.0 - yhat + eps));
            else
                total += (yhat - targets[i]) * (yhat - targets[i]);
        }
        return total / static_cast<double>(features.rows());
    };
    auto check = [&](double& param, double analytic_grad) {
        const double saved = param;
        std::uint64_t mask_up = 0, mask_down = 0;
        param = saved + h;
        const double up = loss_and_mask(mask_up);
        param = saved - h;
        const double down = loss_and_mask(mask_down);
        param = saved;
        if (mask_up != mask_down) return;  // probe straddles a ReLU kink
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({1e-8, std::fabs(numeric), std::fabs(analytic_grad)});
        max_rel = std::max(max_rel, std::fabs(numeric - analytic_grad) / denom);
    };
    for (std::size_t li = 0; li < probe.layers.size(); ++li) {
        auto& layer = probe.layers[li];
        for (std::size_t o = 0; o < layer.weights.rows(); ++o) {
            for (std::size_t c = 0; c < layer.weights.cols(); ++c)
                check(layer.weights(o, c), analytic.d_w[li](o, c));
            check(layer.biases[o], analytic.d_b[li][o]);
        }
    }
    return max_rel;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization (canonical layout, 17 significant digits)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string pca_to_json(const PcaModel& m) {
    std::string out = "{";
    out += "\"means\":" + jsontext::array(m.means);
    out += ",\"stds\":" + jsontext::array(m.stds);
    out += ",\"rows\":" + std::to_string(m.components.rows());
    out += ",\"cols\":" + std::to_string(m.components.cols());
    out += ",\"components\":" + jsontext::array(m.components.data());
    out += ",\"explained_ratios\":" + jsontext::array(m.explained_ratios);
    out += ",\"variance_target\":" + jsontext::g17(m.variance_target);
    out += "}";
    return out;
}

inline PcaModel pca_from_json(const nlohmann::json& j) {
    PcaModel m;
    m.means = j.at("means").get<std::vector<double>>();
    m.stds = j.at("stds").get<std::vector<double>>();
    m.components = Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.components.data() = j.at("components").get<std::vector<double>>();
    m.explained_ratios = j.at("explained_ratios").get<std::vector<double>>();
    m.variance_target = j.at("variance_target").get<double>();
    return m;
}

}  // namespace detail

inline std::string checkpoint_to_json(const NetworkCheckpoint& net) {
    std::string out = "{\n";
    out += "  \"format\": \"powermap-checkpoint-v1\",\n";
    out += "  \"input_schema\": {\"beta\": " + std::to_string(net.feed_schema.beta_width) +
           ", \"n\": 1, \"scaled_weight\": 1, \"pc\": " +
           std::to_string(net.feed_schema.pc_width) + "},\n";
    out += "  \"net_schema\": {\"beta\": " + std::to_string(net.net_schema.beta_width) +
           ", \"n\": 1, \"scaled_weight\": 1, \"pc\": " +
           std::to_string(net.net_schema.pc_width) + "},\n";
    out += "  \"task\": " + std::string(net.task == TaskKind::kClassify ? "\"classify\""
                                                                        : "\"regress\"") + ",\n";
    out += "  \"boundary\": " + jsontext::g17(net.boundary) + ",\n";
    out += "  \"training_meta\": {\"epochs\": " + std::to_string(net.meta.epochs) +
           ", \"learning_rate\": " + jsontext::g17(net.meta.learning_rate) +
           ", \"loss\": " + std::string(net.meta.loss == LossKind::kBce ? "\"bce\"" : "\"mse\"") +
           ", \"seed\": " + std::to_string(net.meta.seed) +
           ", \"source\": " + jsontext::quote(net.meta.source) + "},\n";
    out += "  \"layers\": [\n";
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const auto& l = net.layers[li];
        out += "    {\"activation\": ";
        out += l.activation == Activation::kRelu ? "\"relu\"" : "\"sigmoid\"";
        out += ", \"rows\": " + std::to_string(l.weights.rows());
        out += ", \"cols\": " + std::to_string(l.weights.cols());
        out += ", \"weights\": " + jsontext::array(l.weights.data());
        out += ", \"biases\": " + jsontext::array(l.biases) + "}";
        out += (li + 1 < net.layers.size()) ? ",\n" : "\n";
    }
    out += "  ],\n";
    out += "  \"pca\": " + (net.has_pca ? detail::pca_to_json(net.pca) : std::string("null")) +
           "\n";
    out += "}\n";
    return out;
}

inline NetworkCheckpoint checkpoint_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "powermap-checkpoint-v1")
        throw schema_error("checkpoint: unknown format tag");
    NetworkCheckpoint net;
    net.feed_schema.beta_width = j.at("input_schema").at("beta").get<std::size_t>();
    net.feed_schema.pc_width = j.at("input_schema").at("pc").get<std::size_t>();
    net.net_schema.beta_width = j.at("net_schema").at("beta").get<std::size_t>();
    net.net_schema.pc_width = j.at("net_schema").at("pc").get<std::size_t>();
    net.task = j.at("task").get<std::string>() == "classify" ? TaskKind::kClassify
                                                             : TaskKind::kRegress;
    net.boundary = j.at("boundary").get<double>();
    const auto& meta = j.at("training_meta");
    net.meta.epochs = meta.at("epochs").get<std::size_t>();
    net.meta.learning_rate = meta.at("learning_rate").get<double>();
    net.meta.loss = meta.at("loss").get<std::string>() == "bce" ? LossKind::kBce : LossKind::kMse;
    net.meta.seed = meta.at("seed").get<std::uint64_t>();
    net.meta.source = meta.at("source").get<std::string>();
    for (const auto& lj : j.at("layers")) {
        DenseLayer l;
        l.activation = lj.at("activation").get<std::string>() == "relu" ? Activation::kRelu
                                                                        : Activation::kSigmoid;
        l.weights = Matrix(lj.at("rows").get<std::size_t>(), lj.at("cols").get<std::size_t>());
        l.weights.data() = lj.at("weights").get<std::vector<double>>();
        l.biases = lj.at("biases").get<std::vector<double>>();
        net.layers.push_back(std::move(l));
    }
    if (!j.at("pca").is_null()) {
        net.has_pca = true;
        net.pca = detail::pca_from_json(j.at("pca"));
    }
    return net;
}

inline void save_checkpoint(const NetworkCheckpoint& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out << checkpoint_to_json(net);
}

inline NetworkCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_json(ss.str());
}

}  // namespace powermap
