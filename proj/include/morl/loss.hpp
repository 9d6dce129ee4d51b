#pragma once

#include "morl/errors.hpp"
#include "morl/nn.hpp"

namespace morl::nn {

enum class LossKind { MeanSquaredError, SmoothL1 };

// Value and gradient of the regression loss between prediction and target,
// averaged over every element (batch columns and vector components alike).
template <class S>
struct LossResult {
    S value;
    Matrix<S> grad; // d loss / d prediction
};

template <class S>
inline LossResult<S> regression_loss(LossKind kind, const Matrix<S>& pred,
                                     const Matrix<S>& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw DimensionError("loss: prediction/target shape mismatch");
    const S n = S(pred.size());
    Matrix<S> err = pred - target;
    LossResult<S> out;
    if (kind == LossKind::MeanSquaredError) {
        out.value = err.squaredNorm() / n;
        out.grad = (S(2) / n) * err;
    } else {
        // Huber with unit transition point.
        const auto a = err.array().abs();
        out.value = (a < S(1)).select(S(0.5) * a.square(), a - S(0.5)).sum() / n;
        out.grad = err.array().max(S(-1)).min(S(1)).matrix() / n;
    }
    return out;
}

} // namespace morl::nn
