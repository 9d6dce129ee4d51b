#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "morl/errors.hpp"
#include "morl/rng.hpp"

namespace morl::nn {

enum class Activation : std::uint8_t { Identity = 0, Rectifier = 1, Tanh = 2 };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Rectifier: return "rectifier";
        case Activation::Tanh: return "tanh";
    }
    return "?";
}

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
struct Layer {
    Matrix<S> weight; // out x in
    Vector<S> bias;   // out
    Activation act = Activation::Identity;

    Eigen::Index in_width() const { return weight.cols(); }
    Eigen::Index out_width() const { return weight.rows(); }
};

// Parameter-shaped gradient buffers plus the gradient w.r.t. the input batch
// (the actor update differentiates a critic w.r.t. its action inputs).
template <class S>
struct Gradients {
    std::vector<Matrix<S>> weight;
    std::vector<Vector<S>> bias;
    Matrix<S> input;
};

namespace detail {

template <class S>
inline void apply_activation(Activation act, Matrix<S>& z) {
    switch (act) {
        case Activation::Identity: break;
        case Activation::Rectifier: z = z.cwiseMax(S(0)); break;
        case Activation::Tanh: z = z.array().tanh().matrix(); break;
    }
}

// Derivative expressed through the cached post-activation value.
template <class S>
inline Matrix<S> activation_grad(Activation act, const Matrix<S>& a) {
    switch (act) {
        case Activation::Rectifier:
            return (a.array() > S(0)).template cast<S>().matrix();
        case Activation::Tanh:
            return (S(1) - a.array().square()).matrix();
        case Activation::Identity: break;
    }
    return Matrix<S>::Ones(a.rows(), a.cols());
}

} // namespace detail

// Plain fully connected feed-forward network. Weights are owned values, so
// copies are deep and safe to hand across threads. forward_batch caches the
// per-layer activations needed by backward; nothing else mutates state.
template <class S>
class DenseNetwork {
public:
    DenseNetwork() = default;

    DenseNetwork(const std::vector<Eigen::Index>& widths, const std::vector<Activation>& acts) {
        if (widths.size() < 2 || acts.size() != widths.size() - 1)
            throw ArgumentError("network needs >=2 widths and one activation per layer");
        layers_.resize(acts.size());
        for (std::size_t i = 0; i < acts.size(); ++i) {
            layers_[i].weight = Matrix<S>::Zero(widths[i + 1], widths[i]);
            layers_[i].bias = Vector<S>::Zero(widths[i + 1]);
            layers_[i].act = acts[i];
        }
    }

    // in -> hidden...hidden -> out with a shared hidden activation.
    static DenseNetwork mlp(Eigen::Index in, Eigen::Index hidden, int hidden_layers,
                            Eigen::Index out, Activation hidden_act, Activation out_act) {
        std::vector<Eigen::Index> widths{in};
        std::vector<Activation> acts;
        for (int i = 0; i < hidden_layers; ++i) {
            widths.push_back(hidden);
            acts.push_back(hidden_act);
        }
        widths.push_back(out);
        acts.push_back(out_act);
        return DenseNetwork(widths, acts);
    }

    void init_uniform(Rng& rng) {
        for (auto& l : layers_) {
            const S bound = S(1) / std::sqrt(S(l.in_width()));
            std::uniform_real_distribution<double> dist(-double(bound), double(bound));
            for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = S(dist(rng));
            for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = S(dist(rng));
        }
        cache_.valid = false;
    }

    Eigen::Index input_width() const { return layers_.front().in_width(); }
    Eigen::Index output_width() const { return layers_.back().out_width(); }
    std::size_t layer_count() const { return layers_.size(); }
    const Layer<S>& layer(std::size_t i) const { return layers_[i]; }
    Layer<S>& layer(std::size_t i) { return layers_[i]; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += std::size_t(l.weight.size() + l.bias.size());
        return n;
    }

    bool finite() const {
        for (const auto& l : layers_)
            if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
        return true;
    }

    // Columns are samples. Caches activations for a later backward().
    const Matrix<S>& forward_batch(const Matrix<S>& input) {
        if (input.rows() != input_width())
            throw DimensionError("forward: input width " + std::to_string(input.rows()) +
                                 " != network input " + std::to_string(input_width()));
        cache_.activations.resize(layers_.size() + 1);
        cache_.activations[0] = input;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            Matrix<S> z = (layers_[i].weight * cache_.activations[i]).colwise() + layers_[i].bias;
            detail::apply_activation(layers_[i].act, z);
            cache_.activations[i + 1] = std::move(z);
        }
        cache_.valid = true;
        return cache_.activations.back();
    }

    Vector<S> forward(const Vector<S>& input) { return forward_batch(input); }

    // Query without touching the backward cache.
    Vector<S> predict(const Vector<S>& input) const {
        if (input.rows() != input_width()) throw DimensionError("predict: input width mismatch");
        Matrix<S> a = input;
        for (const auto& l : layers_) {
            Matrix<S> z = (l.weight * a).colwise() + l.bias;
            detail::apply_activation(l.act, z);
            a = std::move(z);
        }
        return a;
    }

    Matrix<S> predict_batch(const Matrix<S>& input) const {
        if (input.rows() != input_width()) throw DimensionError("predict: input width mismatch");
        Matrix<S> a = input;
        for (const auto& l : layers_) {
            Matrix<S> z = (l.weight * a).colwise() + l.bias;
            detail::apply_activation(l.act, z);
            a = std::move(z);
        }
        return a;
    }

    // Backpropagates the loss gradient of the most recent forward_batch.
    Gradients<S> backward(const Matrix<S>& output_grad) const {
        if (!cache_.valid) throw StateError("backward: no cached forward pass");
        const auto& acts = cache_.activations;
        if (output_grad.rows() != output_width() || output_grad.cols() != acts.back().cols())
            throw DimensionError("backward: output gradient shape mismatch");

        Gradients<S> g;
        g.weight.resize(layers_.size());
        g.bias.resize(layers_.size());

        Matrix<S> delta =
            output_grad.cwiseProduct(detail::activation_grad(layers_.back().act, acts.back()));
        for (std::size_t i = layers_.size(); i-- > 0;) {
            g.weight[i].noalias() = delta * acts[i].transpose();
            g.bias[i] = delta.rowwise().sum();
            if (i > 0) {
                Matrix<S> up = layers_[i].weight.transpose() * delta;
                // acts[i] is layer i-1's output, where its derivative lives.
                delta = up.cwiseProduct(detail::activation_grad(layers_[i - 1].act, acts[i]));
            } else {
                g.input.noalias() = layers_[0].weight.transpose() * delta;
            }
        }
        return g;
    }

    const std::vector<Layer<S>>& layers() const { return layers_; }
    std::vector<Layer<S>>& layers() { return layers_; }

private:
    struct Cache {
        std::vector<Matrix<S>> activations;
        bool valid = false;
    };

    std::vector<Layer<S>> layers_;
    Cache cache_;
};

// target <- tau * online + (1 - tau) * target, elementwise.
template <class S>
inline void soft_update(DenseNetwork<S>& target, const DenseNetwork<S>& online, S tau) {
    if (tau < S(0) || tau > S(1)) throw ArgumentError("soft_update: tau outside [0,1]");
    if (target.layer_count() != online.layer_count())
        throw DimensionError("soft_update: layer count mismatch");
    for (std::size_t i = 0; i < target.layer_count(); ++i) {
        auto& t = target.layer(i);
        const auto& o = online.layer(i);
        if (t.weight.rows() != o.weight.rows() || t.weight.cols() != o.weight.cols())
            throw DimensionError("soft_update: layer shape mismatch");
        t.weight = tau * o.weight + (S(1) - tau) * t.weight;
        t.bias = tau * o.bias + (S(1) - tau) * t.bias;
    }
}

} // namespace morl::nn
