#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "boilnet/common.hpp"
#include "boilnet/dataset.hpp"
#include "boilnet/linalg.hpp"
#include "boilnet/network.hpp"
#include "boilnet/rng.hpp"

namespace boilnet {

/// theta <- theta - epsilon * grad for every parameter.
inline void sgd_step(Network& net, const Gradients& grads, double epsilon) {
    if (epsilon <= 0.0) fail("value", "sgd_step: learning rate must be positive");
    if (grads.weights.size() != net.layers.size() || grads.biases.size() != net.layers.size()) {
        fail("dimension", "sgd_step: gradient layer count mismatch");
    }
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        Layer& l = net.layers[k];
        const Matrix& gw = grads.weights[k];
        const Vec& gb = grads.biases[k];
        if (!gw.same_shape(l.weights) || gb.size() != l.biases.size()) {
            fail("dimension", "sgd_step: gradient shape mismatch at layer " + std::to_string(k));
        }
        for (std::size_t i = 0; i < l.weights.data.size(); ++i) {
            l.weights.data[i] -= epsilon * gw.data[i];
        }
        for (std::size_t i = 0; i < l.biases.size(); ++i) {
            l.biases[i] -= epsilon * gb[i];
        }
    }
}

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double delta = 1e-8;
};

/// First and second moment estimates, shape-matched to the network.
struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<Vec> m_b, v_b;
    long long t = 0;

    static AdamState for_network(const Network& net) {
        AdamState s;
        for (const Layer& l : net.layers) {
            s.m_w.emplace_back(l.weights.rows, l.weights.cols, 0.0);
            s.v_w.emplace_back(l.weights.rows, l.weights.cols, 0.0);
            s.m_b.emplace_back(l.biases.size(), 0.0);
            s.v_b.emplace_back(l.biases.size(), 0.0);
        }
        return s;
    }
};

/// One Adam update: moment updates, bias correction, then
/// theta <- theta - epsilon * m_hat / (sqrt(v_hat) + delta).
inline void adam_step(Network& net, const Gradients& grads, AdamState& state, double epsilon,
                      const AdamConfig& cfg = {}) {
    if (epsilon <= 0.0) fail("value", "adam_step: learning rate must be positive");
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
        fail("value", "adam_step: beta parameters must lie in [0,1)");
    }
    if (cfg.delta <= 0.0) fail("value", "adam_step: delta must be positive");
    if (state.m_w.size() != net.layers.size() || grads.weights.size() != net.layers.size()) {
        fail("dimension", "adam_step: layer count mismatch");
    }

    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

    auto update = [&](double& theta, double g, double& m, double& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        theta -= epsilon * m_hat / (std::sqrt(v_hat) + cfg.delta);
    };

    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        Layer& l = net.layers[k];
        if (!grads.weights[k].same_shape(l.weights) || !state.m_w[k].same_shape(l.weights) ||
            grads.biases[k].size() != l.biases.size() || state.m_b[k].size() != l.biases.size()) {
            fail("dimension", "adam_step: shape mismatch at layer " + std::to_string(k));
        }
        for (std::size_t i = 0; i < l.weights.data.size(); ++i) {
            update(l.weights.data[i], grads.weights[k].data[i], state.m_w[k].data[i],
                   state.v_w[k].data[i]);
        }
        for (std::size_t i = 0; i < l.biases.size(); ++i) {
            update(l.biases[i], grads.biases[k][i], state.m_b[k][i], state.v_b[k][i]);
        }
    }
}

/// A seeded random permutation of 0..n-1 cut into consecutive chunks of
/// batch_size (the last chunk may be smaller).
inline std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch_size,
                                                         Rng& rng) {
    if (batch_size < 1 || batch_size > n) {
        fail("value", "minibatches: batch size " + std::to_string(batch_size) +
                          " out of range for " + std::to_string(n) + " samples");
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);

    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                             perm.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

// ---------------------------------------------------------------------------
// Batched forward/backward. Columns are samples. Per-entry summation order is
// ascending, matching the per-sample path, so the batch-mean gradient equals
// the mean of per-sample backward() gradients.
// ---------------------------------------------------------------------------

struct BatchCache {
    std::vector<Matrix> z;  // pre-activations per layer
    std::vector<Matrix> h;  // activations per layer
};

namespace detail {

inline void apply_activation_batch(Activation act, double alpha, const Matrix& z, Matrix& h) {
    h = z;
    if (act == Activation::Elu) {
        for (double& v : h.data) {
            // no finiteness check here; divergence is caught at the objective
            v = v >= 0.0 ? v : alpha * std::expm1(v);
        }
    }
}

}  // namespace detail

inline Matrix forward_batch(const Network& net, const Matrix& x, BatchCache* cache) {
    if (x.rows != net.input_width()) fail("dimension", "forward_batch: input width mismatch");
    if (cache) {
        cache->z.clear();
        cache->h.clear();
    }

    Matrix h_prev = x;
    Matrix out;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const Layer& l = net.layers[k];
        const bool is_output = (k + 1 == net.layers.size());
        const Activation act = is_output ? net.output_activation : net.hidden_activation;

        Matrix z(l.out_width(), x.cols);
        for (std::size_t i = 0; i < z.rows; ++i) {
            std::fill(&z.data[i * z.cols], &z.data[(i + 1) * z.cols], l.biases[i]);
        }
        gemm_nn_acc(l.weights, h_prev, z);

        Matrix h;
        detail::apply_activation_batch(act, net.alpha, z, h);
        if (cache) {
            cache->z.push_back(std::move(z));
            cache->h.push_back(h);
        }
        if (is_output) {
            out = std::move(h);
        } else {
            h_prev = std::move(h);
        }
    }
    return out;
}

/// Mean per-sample data loss over the batch (no regularization term).
inline double batch_data_loss(const Matrix& y_hat, const Matrix& y, Norm norm) {
    if (!y_hat.same_shape(y)) fail("dimension", "batch_data_loss: shape mismatch");
    if (y.cols == 0 || y.rows == 0) fail("dimension", "batch_data_loss: empty batch");
    double acc = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        const double r = y_hat.data[i] - y.data[i];
        acc += norm == Norm::L1 ? std::abs(r) : r * r;
    }
    return acc / static_cast<double>(y.rows) / static_cast<double>(y.cols);
}

/// Batch-mean gradients, including the lambda-scaled regularizer term once.
inline Gradients backward_batch(const Network& net, const Matrix& x, const BatchCache& cache,
                                const Matrix& y, const LossConfig& cfg) {
    const std::size_t n_layers = net.layers.size();
    if (cache.z.size() != n_layers) fail("dimension", "backward_batch: cache mismatch");
    const Matrix& y_hat = cache.h.back();
    if (!y_hat.same_shape(y)) fail("dimension", "backward_batch: target shape mismatch");

    const double batch = static_cast<double>(y.cols);
    const double m = static_cast<double>(y.rows);

    Matrix grad(y.rows, y.cols);
    for (std::size_t i = 0; i < grad.data.size(); ++i) {
        const double r = y_hat.data[i] - y.data[i];
        grad.data[i] = cfg.norm == Norm::L2 ? 2.0 * r / m
                                            : (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) / m;
    }

    Gradients grads = zero_gradients(net);
    for (std::size_t k = n_layers; k-- > 0;) {
        const bool is_output = (k + 1 == n_layers);
        const Activation act = is_output ? net.output_activation : net.hidden_activation;
        if (act == Activation::Elu) {
            const Matrix& z = cache.z[k];
            for (std::size_t i = 0; i < grad.data.size(); ++i) {
                grad.data[i] *= z.data[i] >= 0.0 ? 1.0 : net.alpha * std::exp(z.data[i]);
            }
        }

        Vec& gb = grads.biases[k];
        for (std::size_t i = 0; i < grad.rows; ++i) {
            double acc = 0.0;
            const double* row = &grad.data[i * grad.cols];
            for (std::size_t b = 0; b < grad.cols; ++b) acc += row[b];
            gb[i] = acc / batch;
        }

        const Matrix& h_prev = (k == 0) ? x : cache.h[k - 1];
        Matrix& gw = grads.weights[k];
        gemm_nt_acc(grad, h_prev, gw);
        const Matrix& w = net.layers[k].weights;
        for (std::size_t i = 0; i < gw.data.size(); ++i) {
            gw.data[i] = gw.data[i] / batch +
                         cfg.lambda * regularizer_derivative(cfg.regularizer, w.data[i]);
        }

        if (k > 0) {
            Matrix next(w.cols, grad.cols);
            gemm_tn(w, grad, next);
            grad = std::move(next);
        }
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

enum class OptimizerKind { Sgd, Adam };

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 256;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double epsilon = 1e-3;
    AdamConfig adam;
    LossConfig loss{Norm::L2, 1e-4, Norm::L2};
    std::uint64_t seed = 1;
    bool shuffle = true;
};

struct EpochRecord {
    std::size_t epoch = 0;          // 1-based
    double train_objective = 0.0;   // sample-weighted mean over the epoch's batches
    Vec test_rmse;                  // per target, physical units when stats are attached
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> records;
};

namespace detail {

inline Matrix gather_features(const Dataset& data, const std::vector<std::size_t>& idx) {
    const std::size_t nf = data.n_features();
    Matrix x(nf, idx.size());
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const Sample& s = data.samples[idx[b]];
        for (std::size_t f = 0; f < nf; ++f) x(f, b) = s.features[f];
    }
    return x;
}

inline Matrix gather_targets(const Dataset& data, const std::vector<std::size_t>& idx) {
    const std::size_t ntg = data.n_targets();
    Matrix y(ntg, idx.size());
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const Sample& s = data.samples[idx[b]];
        for (std::size_t t = 0; t < ntg; ++t) y(t, b) = s.targets[t];
    }
    return y;
}

/// Per-target RMSE over a dataset, denormalized when stats are attached.
inline Vec evaluate_test_rmse(const Network& net, const Dataset& test) {
    const std::size_t ntg = test.n_targets();
    Vec scale(ntg, 1.0);
    if (test.stats) {
        for (std::size_t t = 0; t < ntg; ++t) {
            scale[t] = test.stats->std_dev[test.n_features() + t];
        }
    }

    Vec sse(ntg, 0.0);
    const std::size_t chunk = 512;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < test.size(); start += chunk) {
        const std::size_t end = std::min(test.size(), start + chunk);
        idx.resize(end - start);
        std::iota(idx.begin(), idx.end(), start);
        const Matrix x = gather_features(test, idx);
        const Matrix y = gather_targets(test, idx);
        const Matrix y_hat = forward_batch(net, x, nullptr);
        for (std::size_t t = 0; t < ntg; ++t) {
            for (std::size_t b = 0; b < idx.size(); ++b) {
                const double r = (y_hat(t, b) - y(t, b)) * scale[t];
                sse[t] += r * r;
            }
        }
    }
    Vec rmse(ntg);
    for (std::size_t t = 0; t < ntg; ++t) {
        rmse[t] = std::sqrt(sse[t] / static_cast<double>(test.size()));
    }
    return rmse;
}

}  // namespace detail

/// Mini-batch training: per batch, the batch-mean gradient drives one
/// optimizer step. Deterministic for a fixed (seed, data, config) in this
/// single-threaded implementation. Aborts with a divergence error the moment
/// the objective stops being finite.
inline TrainHistory train(Network& net, const Dataset& train_data, const Dataset& test_data,
                          const TrainConfig& cfg) {
    if (cfg.epochs < 1) fail("value", "train: epochs must be at least 1");
    if (train_data.empty()) fail("dimension", "train: empty training set");
    if (test_data.empty()) fail("dimension", "train: empty test set");
    if (!train_data.normalized || !test_data.normalized) {
        fail("value", "train: datasets must be normalized first");
    }
    train_data.validate_uniform();
    test_data.validate_uniform();
    net.validate();
    if (net.input_width() != train_data.n_features() ||
        net.output_width() != train_data.n_targets()) {
        fail("dimension", "train: network widths do not match the dataset");
    }
    if (train_data.n_features() != test_data.n_features() ||
        train_data.n_targets() != test_data.n_targets()) {
        fail("dimension", "train: train/test dimensionality mismatch");
    }
    if (cfg.batch_size < 1 || cfg.batch_size > train_data.size()) {
        fail("value", "train: batch size " + std::to_string(cfg.batch_size) +
                          " out of range for " + std::to_string(train_data.size()) + " samples");
    }

    Rng rng(cfg.seed);
    AdamState adam = AdamState::for_network(net);
    const std::size_t n = train_data.size();

    TrainHistory history;
    history.records.reserve(cfg.epochs);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        std::vector<std::vector<std::size_t>> batches;
        if (cfg.shuffle) {
            batches = minibatches(n, cfg.batch_size, rng);
        } else {
            std::vector<std::size_t> seq(n);
            std::iota(seq.begin(), seq.end(), 0);
            for (std::size_t start = 0; start < n; start += cfg.batch_size) {
                const std::size_t end = std::min(n, start + cfg.batch_size);
                batches.emplace_back(seq.begin() + static_cast<std::ptrdiff_t>(start),
                                     seq.begin() + static_cast<std::ptrdiff_t>(end));
            }
        }

        double objective_sum = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const std::vector<std::size_t>& batch = batches[b];
            const Matrix x = detail::gather_features(train_data, batch);
            const Matrix y = detail::gather_targets(train_data, batch);

            BatchCache cache;
            const Matrix y_hat = forward_batch(net, x, &cache);
            double objective = batch_data_loss(y_hat, y, cfg.loss.norm);
            if (cfg.loss.lambda != 0.0) {
                objective += cfg.loss.lambda * regularization(net, cfg.loss.regularizer);
            }
            if (!std::isfinite(objective)) {
                fail("divergence", "non-finite objective at epoch " + std::to_string(epoch) +
                                       ", batch " + std::to_string(b + 1));
            }
            objective_sum += objective * static_cast<double>(batch.size());

            const Gradients grads = backward_batch(net, x, cache, y, cfg.loss);
            if (cfg.optimizer == OptimizerKind::Adam) {
                adam_step(net, grads, adam, cfg.epsilon, cfg.adam);
            } else {
                sgd_step(net, grads, cfg.epsilon);
            }
        }

        for (const Layer& l : net.layers) {
            for (double v : l.weights.data) {
                if (!std::isfinite(v)) {
                    fail("divergence", "non-finite parameters after epoch " + std::to_string(epoch));
                }
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_objective = objective_sum / static_cast<double>(n);
        rec.test_rmse = detail::evaluate_test_rmse(net, test_data);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        history.records.push_back(std::move(rec));
    }
    return history;
}

/// History CSV. For the 4-QoI boiling layout the RMSE columns follow the
/// fixed header order (alpha_wall, T_sup, q_evap, q_single); other layouts
/// get generic rmse_<i> columns.
inline void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
    std::ofstream os(path);
    if (!os) fail("io", "cannot open for writing: " + path.string());
    const std::size_t ntg = history.records.empty() ? 0 : history.records.front().test_rmse.size();
    if (ntg == 4) {
        os << "epoch,train_objective,rmse_alpha_wall,rmse_T_sup,rmse_q_evap,rmse_q_single,seconds\n";
    } else {
        os << "epoch,train_objective";
        for (std::size_t t = 0; t < ntg; ++t) os << ",rmse_" << t;
        os << ",seconds\n";
    }
    for (const EpochRecord& r : history.records) {
        os << r.epoch << ',' << format_double(r.train_objective);
        if (ntg == 4) {
            // dataset target order is (q_evap, q_single, alpha_wall, t_sup)
            os << ',' << format_double(r.test_rmse[2]) << ',' << format_double(r.test_rmse[3])
               << ',' << format_double(r.test_rmse[0]) << ',' << format_double(r.test_rmse[1]);
        } else {
            for (double v : r.test_rmse) os << ',' << format_double(v);
        }
        os << ',' << format_double(r.seconds) << '\n';
    }
    if (!os) fail("io", "write failed: " + path.string());
}

}  // namespace boilnet
