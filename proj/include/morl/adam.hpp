#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "morl/errors.hpp"
#include "morl/nn.hpp"

namespace morl::nn {

// Adaptive-moment estimation with bias correction. Moment buffers mirror the
// network's layer shapes; step() is the only thing that mutates parameters.
template <class S>
class Adam {
public:
    Adam() = default;

    explicit Adam(const DenseNetwork<S>& net, S lr = S(3e-4), S beta1 = S(0.9),
                  S beta2 = S(0.999), S eps = S(1e-8))
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        m_w_.reserve(net.layer_count());
        for (const auto& l : net.layers()) {
            m_w_.push_back(Matrix<S>::Zero(l.weight.rows(), l.weight.cols()));
            v_w_.push_back(Matrix<S>::Zero(l.weight.rows(), l.weight.cols()));
            m_b_.push_back(Vector<S>::Zero(l.bias.size()));
            v_b_.push_back(Vector<S>::Zero(l.bias.size()));
        }
    }

    std::uint64_t step_count() const { return steps_; }
    S learning_rate() const { return lr_; }

    void step(DenseNetwork<S>& net, const Gradients<S>& grads) {
        if (grads.weight.size() != net.layer_count() || m_w_.size() != net.layer_count())
            throw DimensionError("adam: gradient/state layer count mismatch");
        for (std::size_t i = 0; i < net.layer_count(); ++i)
            if (!grads.weight[i].allFinite() || !grads.bias[i].allFinite())
                throw NumericError("adam: non-finite gradient");

        ++steps_;
        const S bc1 = S(1) - S(std::pow(double(beta1_), double(steps_)));
        const S bc2 = S(1) - S(std::pow(double(beta2_), double(steps_)));
        for (std::size_t i = 0; i < net.layer_count(); ++i) {
            update(m_w_[i], v_w_[i], grads.weight[i], net.layer(i).weight, bc1, bc2);
            update(m_b_[i], v_b_[i], grads.bias[i], net.layer(i).bias, bc1, bc2);
        }
    }

private:
    template <class T>
    void update(T& m, T& v, const T& g, T& param, S bc1, S bc2) {
        m = beta1_ * m + (S(1) - beta1_) * g;
        v = beta2_ * v + (S(1) - beta2_) * g.cwiseProduct(g);
        param.array() -=
            lr_ * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps_);
    }

    S lr_ = S(3e-4);
    S beta1_ = S(0.9);
    S beta2_ = S(0.999);
    S eps_ = S(1e-8);
    std::uint64_t steps_ = 0;
    std::vector<Matrix<S>> m_w_, v_w_;
    std::vector<Vector<S>> m_b_, v_b_;
};

} // namespace morl::nn
