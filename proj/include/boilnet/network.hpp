#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "boilnet/common.hpp"
#include "boilnet/linalg.hpp"
#include "boilnet/rng.hpp"

namespace boilnet {

enum class Norm { L1, L2 };
enum class Activation { Elu, Identity };

/// Loss + regularization configuration. The regularizer acts on weights only,
/// never on biases.
struct LossConfig {
    Norm norm = Norm::L2;
    double lambda = 0.0;
    Norm regularizer = Norm::L2;
};

/// Exponential linear unit: x for x >= 0, alpha*(e^x - 1) otherwise.
inline double elu(double x, double alpha = 1.0) {
    if (!std::isfinite(x)) fail("value", "elu: non-finite input");
    if (alpha <= 0.0) fail("value", "elu: alpha must be positive");
    return x >= 0.0 ? x : alpha * std::expm1(x);
}

/// Derivative of elu: 1 for x >= 0, alpha*e^x otherwise. Continuous at 0.
inline double elu_derivative(double x, double alpha = 1.0) {
    if (!std::isfinite(x)) fail("value", "elu_derivative: non-finite input");
    if (alpha <= 0.0) fail("value", "elu_derivative: alpha must be positive");
    return x >= 0.0 ? 1.0 : alpha * std::exp(x);
}

inline double apply_activation(Activation act, double z, double alpha) {
    return act == Activation::Elu ? elu(z, alpha) : z;
}

inline double activation_derivative(Activation act, double z, double alpha) {
    return act == Activation::Elu ? elu_derivative(z, alpha) : 1.0;
}

/// One dense layer: weights are (out x in), biases have length out.
struct Layer {
    Matrix weights;
    Vec biases;

    std::size_t out_width() const { return weights.rows; }
    std::size_t in_width() const { return weights.cols; }
};

/// A feedforward network as an ordered list of dense layers. Hidden layers
/// use the configured activation (ELU by default); the output layer is linear
/// by default so regression targets are unbounded in both directions.
struct Network {
    std::vector<Layer> layers;
    Activation hidden_activation = Activation::Elu;
    Activation output_activation = Activation::Identity;
    double alpha = 1.0;

    std::size_t input_width() const { return layers.empty() ? 0 : layers.front().in_width(); }
    std::size_t output_width() const { return layers.empty() ? 0 : layers.back().out_width(); }

    void validate() const {
        if (layers.empty()) fail("dimension", "network has no layers");
        if (alpha <= 0.0) fail("value", "network alpha must be positive");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const Layer& l = layers[k];
            if (l.weights.rows == 0 || l.weights.cols == 0) {
                fail("dimension", "layer " + std::to_string(k) + " has a zero dimension");
            }
            if (l.biases.size() != l.weights.rows) {
                fail("dimension", "layer " + std::to_string(k) + " bias length mismatch");
            }
            if (k > 0 && l.weights.cols != layers[k - 1].weights.rows) {
                fail("dimension", "layer " + std::to_string(k) + " incompatible with previous layer");
            }
            for (double w : l.weights.data) {
                if (!std::isfinite(w)) fail("value", "layer " + std::to_string(k) + " has non-finite weight");
            }
            for (double b : l.biases) {
                if (!std::isfinite(b)) fail("value", "layer " + std::to_string(k) + " has non-finite bias");
            }
        }
    }
};

/// Intermediate values of one forward pass: pre-activations z and activations
/// h per layer, with the input kept as h^(0). The last activation is y_hat.
struct ForwardCache {
    Vec input;
    std::vector<Vec> pre_activations;
    std::vector<Vec> activations;
};

/// Per-layer gradients, shape-matched to the network's layers.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vec> biases;
};

inline Gradients zero_gradients(const Network& net) {
    Gradients g;
    g.weights.reserve(net.layers.size());
    g.biases.reserve(net.layers.size());
    for (const Layer& l : net.layers) {
        g.weights.emplace_back(l.weights.rows, l.weights.cols, 0.0);
        g.biases.emplace_back(l.biases.size(), 0.0);
    }
    return g;
}

/// Forward pass: z^(k) = W^(k) h^(k-1) + b^(k), h^(k) = g(z^(k)).
inline std::pair<Vec, ForwardCache> forward(const Network& net, const Vec& x) {
    if (net.layers.empty()) fail("dimension", "forward: network has no layers");
    if (x.size() != net.input_width()) {
        fail("dimension", "forward: input width " + std::to_string(x.size()) + " != " +
                              std::to_string(net.input_width()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) fail("value", "forward: non-finite input");
    }

    ForwardCache cache;
    cache.input = x;
    cache.pre_activations.reserve(net.layers.size());
    cache.activations.reserve(net.layers.size());

    const Vec* h_prev = &cache.input;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const bool is_output = (k + 1 == net.layers.size());
        const Activation act = is_output ? net.output_activation : net.hidden_activation;
        Vec z = matvec_bias(net.layers[k].weights, *h_prev, net.layers[k].biases);
        Vec h(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            h[i] = apply_activation(act, z[i], net.alpha);
        }
        cache.pre_activations.push_back(std::move(z));
        cache.activations.push_back(std::move(h));
        h_prev = &cache.activations.back();
    }
    return {cache.activations.back(), cache};
}

/// Mean L1 or L2 loss over the output components.
inline double loss(const Vec& y_hat, const Vec& y, Norm norm) {
    if (y_hat.size() != y.size()) fail("dimension", "loss: length mismatch");
    if (y.empty()) fail("dimension", "loss: empty vectors");
    const double m = static_cast<double>(y.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y_hat[i] - y[i];
        acc += norm == Norm::L1 ? std::abs(r) : r * r;
    }
    return acc / m;
}

/// dL/dy_hat for the mean L1/L2 loss. The L1 subgradient at zero residual is 0.
inline Vec loss_gradient(const Vec& y_hat, const Vec& y, Norm norm) {
    if (y_hat.size() != y.size()) fail("dimension", "loss_gradient: length mismatch");
    if (y.empty()) fail("dimension", "loss_gradient: empty vectors");
    const double m = static_cast<double>(y.size());
    Vec g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y_hat[i] - y[i];
        if (norm == Norm::L2) {
            g[i] = 2.0 * r / m;
        } else {
            g[i] = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) / m;
        }
    }
    return g;
}

/// Weight regularization term: L2 = 1/2 sum w^2, L1 = sum |w|. Biases excluded.
inline double regularization(const Network& net, Norm kind) {
    double acc = 0.0;
    for (const Layer& l : net.layers) {
        for (double w : l.weights.data) {
            acc += kind == Norm::L2 ? 0.5 * w * w : std::abs(w);
        }
    }
    return acc;
}

inline double regularizer_derivative(Norm kind, double w) {
    if (kind == Norm::L2) return w;
    return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
}

/// Mean data loss over a batch plus lambda times the weight regularizer.
inline double total_objective(const Network& net, std::span<const std::pair<Vec, Vec>> batch,
                              const LossConfig& cfg) {
    if (batch.empty()) fail("dimension", "total_objective: empty batch");
    double acc = 0.0;
    for (const auto& [x, y] : batch) {
        acc += loss(forward(net, x).first, y, cfg.norm);
    }
    double obj = acc / static_cast<double>(batch.size());
    if (cfg.lambda != 0.0) {
        obj += cfg.lambda * regularization(net, cfg.regularizer);
    }
    return obj;
}

/// Backward propagation of the loss derivatives through every layer:
/// starting from grad = dL/dy_hat, per layer from last to first the gradient
/// is pushed through the activation, split into bias and weight gradients
/// (weights pick up the lambda-scaled regularizer term), and mapped to the
/// previous layer through W^T.
inline Gradients backward(const Network& net, const ForwardCache& cache, const Vec& y,
                          const LossConfig& cfg) {
    const std::size_t n_layers = net.layers.size();
    if (cache.pre_activations.size() != n_layers || cache.activations.size() != n_layers) {
        fail("dimension", "backward: cache does not match network");
    }
    if (cache.input.size() != net.input_width()) {
        fail("dimension", "backward: cache input width mismatch");
    }
    for (std::size_t k = 0; k < n_layers; ++k) {
        if (cache.pre_activations[k].size() != net.layers[k].out_width()) {
            fail("dimension", "backward: cache layer " + std::to_string(k) + " width mismatch");
        }
    }
    if (y.size() != net.output_width()) fail("dimension", "backward: target width mismatch");

    Gradients grads = zero_gradients(net);
    Vec grad = loss_gradient(cache.activations.back(), y, cfg.norm);

    for (std::size_t k = n_layers; k-- > 0;) {
        const bool is_output = (k + 1 == n_layers);
        const Activation act = is_output ? net.output_activation : net.hidden_activation;
        const Vec& z = cache.pre_activations[k];
        for (std::size_t i = 0; i < grad.size(); ++i) {
            grad[i] *= activation_derivative(act, z[i], net.alpha);
        }

        grads.biases[k] = grad;  // bias regularizer gradient is zero

        const Vec& h_prev = (k == 0) ? cache.input : cache.activations[k - 1];
        Matrix& gw = grads.weights[k];
        const Matrix& w = net.layers[k].weights;
        for (std::size_t i = 0; i < gw.rows; ++i) {
            const double gi = grad[i];
            for (std::size_t j = 0; j < gw.cols; ++j) {
                gw(i, j) = gi * h_prev[j] + cfg.lambda * regularizer_derivative(cfg.regularizer, w(i, j));
            }
        }

        if (k > 0) {
            grad = matvec_transposed(w, grad);
        }
    }
    return grads;
}

namespace detail {

/// Self-contained extended-precision copy of the network, used only by the
/// finite-difference oracle. Evaluating the perturbed objectives in long
/// double keeps the roundoff floor of J(theta+h) - J(theta-h) well below the
/// magnitude of small gradient entries; in plain double the floor
/// eps*|J|/h ~ 1e-11 would dominate entries below ~1e-5.
struct ExtendedNet {
    struct Layer {
        std::size_t rows = 0, cols = 0;
        std::vector<long double> weights;
        std::vector<long double> biases;
    };
    std::vector<Layer> layers;
    Activation hidden_activation = Activation::Elu;
    Activation output_activation = Activation::Identity;
    long double alpha = 1.0L;

    static ExtendedNet from(const Network& net) {
        ExtendedNet e;
        e.hidden_activation = net.hidden_activation;
        e.output_activation = net.output_activation;
        e.alpha = net.alpha;
        for (const boilnet::Layer& l : net.layers) {
            Layer el;
            el.rows = l.weights.rows;
            el.cols = l.weights.cols;
            el.weights.assign(l.weights.data.begin(), l.weights.data.end());
            el.biases.assign(l.biases.begin(), l.biases.end());
            e.layers.push_back(std::move(el));
        }
        return e;
    }
};

inline long double extended_objective(const ExtendedNet& net, const Vec& x, const Vec& y,
                                      const LossConfig& cfg) {
    std::vector<long double> h(x.begin(), x.end());
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const ExtendedNet::Layer& l = net.layers[k];
        const bool is_output = (k + 1 == net.layers.size());
        const Activation act = is_output ? net.output_activation : net.hidden_activation;
        std::vector<long double> z(l.rows);
        for (std::size_t i = 0; i < l.rows; ++i) {
            long double acc = l.biases[i];
            const long double* row = &l.weights[i * l.cols];
            for (std::size_t j = 0; j < l.cols; ++j) acc += row[j] * h[j];
            z[i] = act == Activation::Elu && acc < 0.0L ? net.alpha * std::expm1(acc) : acc;
        }
        h = std::move(z);
    }

    const long double m = static_cast<long double>(y.size());
    long double data = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long double r = h[i] - static_cast<long double>(y[i]);
        data += cfg.norm == Norm::L1 ? std::abs(r) : r * r;
    }
    long double obj = data / m;
    if (cfg.lambda != 0.0) {
        long double reg = 0.0L;
        for (const ExtendedNet::Layer& l : net.layers) {
            for (long double w : l.weights) {
                reg += cfg.regularizer == Norm::L2 ? 0.5L * w * w : std::abs(w);
            }
        }
        obj += static_cast<long double>(cfg.lambda) * reg;
    }
    return obj;
}

}  // namespace detail

/// Compares every backward gradient entry against a central finite difference
/// of the single-sample objective. Returns the maximum relative error.
inline double gradient_check(const Network& net, const Vec& x, const Vec& y, const LossConfig& cfg,
                             double h = 1e-5) {
    if (h <= 0.0) fail("value", "gradient_check: step must be positive");

    auto [y_hat, cache] = forward(net, x);
    (void)y_hat;
    const Gradients analytic = backward(net, cache, y, cfg);

    detail::ExtendedNet probe = detail::ExtendedNet::from(net);
    const long double step = static_cast<long double>(h);

    double max_rel = 0.0;
    auto check_entry = [&](long double* slot, double analytic_value) {
        const long double theta = *slot;
        *slot = theta + step;
        const long double plus = detail::extended_objective(probe, x, y, cfg);
        *slot = theta - step;
        const long double minus = detail::extended_objective(probe, x, y, cfg);
        *slot = theta;
        const double numeric = static_cast<double>((plus - minus) / (2.0L * step));
        const double denom = std::max({std::abs(analytic_value), std::abs(numeric), 1e-12});
        const double rel = std::abs(analytic_value - numeric) / denom;
        if (rel > max_rel) max_rel = rel;
    };

    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        detail::ExtendedNet::Layer& l = probe.layers[k];
        for (std::size_t i = 0; i < l.weights.size(); ++i) {
            check_entry(&l.weights[i], analytic.weights[k].data[i]);
        }
        for (std::size_t i = 0; i < l.biases.size(); ++i) {
            check_entry(&l.biases[i], analytic.biases[k][i]);
        }
    }
    return max_rel;
}

/// Glorot/Xavier uniform initialization: weights in +-sqrt(6/(in+out)),
/// biases zero. Deterministic for a given generator state.
inline Layer xavier_init(std::size_t out, std::size_t in, Rng& rng) {
    if (out == 0 || in == 0) fail("dimension", "xavier_init: zero dimension");
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    Layer layer;
    layer.weights = Matrix(out, in);
    for (double& w : layer.weights.data) {
        w = rng.uniform(-bound, bound);
    }
    layer.biases.assign(out, 0.0);
    return layer;
}

/// Builds a network from the full width list (input, hidden..., output).
inline Network make_network(const std::vector<std::size_t>& widths, Rng& rng, double alpha = 1.0,
                            Activation output_activation = Activation::Identity) {
    if (widths.size() < 2) fail("dimension", "make_network: need at least input and output widths");
    Network net;
    net.alpha = alpha;
    net.output_activation = output_activation;
    net.layers.reserve(widths.size() - 1);
    for (std::size_t k = 1; k < widths.size(); ++k) {
        net.layers.push_back(xavier_init(widths[k], widths[k - 1], rng));
    }
    net.validate();
    return net;
}

}  // namespace boilnet
