#pragma once

// Minimal dense-network engine: forward, reverse-mode gradients, fan-in
// initialization, Adam, gradient clipping, Polyak averaging. Just enough
// for fixed MLP actor-critic pairs; no graphs, no convolutions.

#include <cmath>
#include <cstddef>
#include <vector>

#include "amnav/core.hpp"

namespace amnav::nn {

enum class Activation { ReLU, Tanh, Identity };

struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> bias;     // out
    Activation act = Activation::Identity;
};

/// Uniform fan-in weight init: entries i.i.d. in [-2/sqrt(fan_in), +2/sqrt(fan_in)].
inline std::vector<double> init_fanin(std::size_t rows, std::size_t cols, Rng& rng) {
    expects(rows >= 1 && cols >= 1, "init_fanin: dimensions must be >= 1");
    const double bound = 2.0 / std::sqrt(static_cast<double>(cols));
    std::vector<double> w(rows * cols);
    for (double& x : w) x = rng.uniform(-bound, bound);
    return w;
}

class DenseNetwork {
public:
    DenseNetwork() = default;

    /// Builds sizes.front() -> ... -> sizes.back() with the given per-layer
    /// activations (acts.size() == sizes.size() - 1). Biases start at zero.
    DenseNetwork(const std::vector<std::size_t>& sizes,
                 const std::vector<Activation>& acts, Rng& rng) {
        expects(sizes.size() >= 2 && acts.size() == sizes.size() - 1,
                "DenseNetwork: inconsistent layer spec");
        for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
            Layer l;
            l.in = sizes[i];
            l.out = sizes[i + 1];
            l.weights = init_fanin(l.out, l.in, rng);
            l.bias.assign(l.out, 0.0);
            l.act = acts[i];
            layers_.push_back(std::move(l));
        }
    }

    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::size_t input_size() const { return layers_.front().in; }
    std::size_t output_size() const { return layers_.back().out; }

    bool same_architecture(const DenseNetwork& other) const {
        if (layers_.size() != other.layers_.size()) return false;
        for (std::size_t i = 0; i < layers_.size(); ++i)
            if (layers_[i].in != other.layers_[i].in || layers_[i].out != other.layers_[i].out)
                return false;
        return true;
    }

private:
    std::vector<Layer> layers_;
};

/// Activations cached by forward() for the matching backward() call.
struct ForwardCache {
    std::vector<std::vector<double>> inputs;   // input to each layer
    std::vector<std::vector<double>> preacts;  // affine output before activation
};

inline double apply_act(Activation a, double x) {
    switch (a) {
        case Activation::ReLU: return x > 0.0 ? x : 0.0;
        case Activation::Tanh: return std::tanh(x);
        default: return x;
    }
}

inline double act_derivative(Activation a, double pre) {
    switch (a) {
        case Activation::ReLU: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: {
            const double t = std::tanh(pre);
            return 1.0 - t * t;
        }
        default: return 1.0;
    }
}

inline std::vector<double> forward(const DenseNetwork& net, const std::vector<double>& input,
                                   ForwardCache* cache = nullptr) {
    expects(input.size() == net.input_size(), "forward: input size mismatch");
    std::vector<double> x = input;
    if (cache) {
        cache->inputs.clear();
        cache->preacts.clear();
    }
    for (const Layer& l : net.layers()) {
        if (cache) cache->inputs.push_back(x);
        std::vector<double> pre(l.out);
        for (std::size_t r = 0; r < l.out; ++r) {
            double acc = l.bias[r];
            const double* wrow = l.weights.data() + r * l.in;
            for (std::size_t c = 0; c < l.in; ++c) acc += wrow[c] * x[c];
            pre[r] = acc;
        }
        if (cache) cache->preacts.push_back(pre);
        x.resize(l.out);
        for (std::size_t r = 0; r < l.out; ++r) x[r] = apply_act(l.act, pre[r]);
    }
    return x;
}

/// Per-parameter gradients mirroring a network's layer shapes.
struct GradientSet {
    std::vector<std::vector<double>> dweights;
    std::vector<std::vector<double>> dbias;

    static GradientSet zeros_like(const DenseNetwork& net) {
        GradientSet g;
        for (const Layer& l : net.layers()) {
            g.dweights.emplace_back(l.weights.size(), 0.0);
            g.dbias.emplace_back(l.bias.size(), 0.0);
        }
        return g;
    }

    void accumulate(const GradientSet& other) {
        for (std::size_t i = 0; i < dweights.size(); ++i) {
            for (std::size_t j = 0; j < dweights[i].size(); ++j) dweights[i][j] += other.dweights[i][j];
            for (std::size_t j = 0; j < dbias[i].size(); ++j) dbias[i][j] += other.dbias[i][j];
        }
    }

    void scale(double s) {
        for (auto& v : dweights)
            for (double& x : v) x *= s;
        for (auto& v : dbias)
            for (double& x : v) x *= s;
    }
};

/// Reverse-mode gradients of the scalar loss whose dL/dy is `output_gradient`.
/// If `input_gradient` is non-null it receives dL/dx (needed to chain the
/// actor through the critic).
inline GradientSet backward(const DenseNetwork& net, const ForwardCache& cache,
                            const std::vector<double>& output_gradient,
                            std::vector<double>* input_gradient = nullptr) {
    expects(cache.inputs.size() == net.layers().size(), "backward: stale or missing cache");
    expects(output_gradient.size() == net.output_size(), "backward: output gradient size mismatch");
    GradientSet grads = GradientSet::zeros_like(net);
    std::vector<double> delta = output_gradient;
    for (std::size_t li = net.layers().size(); li-- > 0;) {
        const Layer& l = net.layers()[li];
        const auto& pre = cache.preacts[li];
        const auto& in = cache.inputs[li];
        // delta through the activation
        for (std::size_t r = 0; r < l.out; ++r) delta[r] *= act_derivative(l.act, pre[r]);
        auto& dw = grads.dweights[li];
        auto& db = grads.dbias[li];
        for (std::size_t r = 0; r < l.out; ++r) {
            db[r] += delta[r];
            double* drow = dw.data() + r * l.in;
            for (std::size_t c = 0; c < l.in; ++c) drow[c] += delta[r] * in[c];
        }
        std::vector<double> prev(l.in, 0.0);
        for (std::size_t r = 0; r < l.out; ++r) {
            const double* wrow = l.weights.data() + r * l.in;
            for (std::size_t c = 0; c < l.in; ++c) prev[c] += wrow[c] * delta[r];
        }
        delta = std::move(prev);
    }
    if (input_gradient) *input_gradient = delta;
    return grads;
}

inline double global_norm(const GradientSet& g) {
    double acc = 0.0;
    for (const auto& v : g.dweights)
        for (double x : v) acc += x * x;
    for (const auto& v : g.dbias)
        for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

/// Global L2-norm clipping: rescale everything when the norm exceeds the
/// threshold, leave direction untouched.
inline void clip_gradients(GradientSet& g, double threshold) {
    expects(threshold > 0.0, "clip_gradients: threshold must be positive");
    const double n = global_norm(g);
    if (n > threshold) g.scale(threshold / n);
}

struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step_count = 0;
    std::vector<std::vector<double>> m_weights, v_weights, m_bias, v_bias;

    static AdamState for_network(const DenseNetwork& net, double lr = 1e-3) {
        AdamState s;
        s.learning_rate = lr;
        for (const Layer& l : net.layers()) {
            s.m_weights.emplace_back(l.weights.size(), 0.0);
            s.v_weights.emplace_back(l.weights.size(), 0.0);
            s.m_bias.emplace_back(l.bias.size(), 0.0);
            s.v_bias.emplace_back(l.bias.size(), 0.0);
        }
        return s;
    }
};

inline void adam_step(DenseNetwork& net, const GradientSet& grads, AdamState& opt) {
    opt.step_count += 1;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step_count));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step_count));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= opt.learning_rate * mhat / (std::sqrt(vhat) + opt.epsilon);
        }
    };
    for (std::size_t li = 0; li < net.layers().size(); ++li) {
        update(net.layers()[li].weights, grads.dweights[li], opt.m_weights[li], opt.v_weights[li]);
        update(net.layers()[li].bias, grads.dbias[li], opt.m_bias[li], opt.v_bias[li]);
    }
}

/// Polyak averaging: target <- tau*online + (1-tau)*target.
inline void soft_update(DenseNetwork& target, const DenseNetwork& online, double tau) {
    expects(target.same_architecture(online), "soft_update: architecture mismatch");
    for (std::size_t li = 0; li < target.layers().size(); ++li) {
        auto& tl = target.layers()[li];
        const auto& ol = online.layers()[li];
        for (std::size_t i = 0; i < tl.weights.size(); ++i)
            tl.weights[i] = tau * ol.weights[i] + (1.0 - tau) * tl.weights[i];
        for (std::size_t i = 0; i < tl.bias.size(); ++i)
            tl.bias[i] = tau * ol.bias[i] + (1.0 - tau) * tl.bias[i];
    }
}

}  // namespace amnav::nn
