#pragma once

#include <Eigen/Dense>

#include "morl/env_dst.hpp" // StepResult
#include "morl/errors.hpp"

namespace morl::env {

// Two-objective point-mass cruiser. Objective 1 rewards forward speed;
// objective 2 is an energy-efficiency bonus (shifted negative squared action
// magnitude) that only accrues while the mass keeps moving forward, so a
// passive policy earns neither objective. Sustaining higher speed costs
// quadratically more action, giving a continuous speed/efficiency front.
struct ContinuousPointConfig {
    double drag = 0.5;        // v' = drag * v + action
    double max_speed = 2.0;
    double position_bound = 10.0;
    double position_step = 0.1;
    double min_speed = 0.5;   // efficiency gate
    double speed_scale = 0.1;
    double efficiency_scale = 0.1;
    double efficiency_shift = 2.0; // max |action|^2 over the [-1,1]^2 box
    int horizon = 50;
};

class ContinuousPoint {
public:
    static constexpr int kObjectives = 2;
    static constexpr int kActionDim = 2;

    explicit ContinuousPoint(ContinuousPointConfig cfg = {}) : cfg_(cfg) {
        if (cfg_.horizon <= 0) throw ArgumentError("point env: horizon must be positive");
    }

    int state_dim() const { return 4; } // (px, py, vx, vy)
    int action_dim() const { return kActionDim; }
    int objectives() const { return kObjectives; }
    double action_bound() const { return 1.0; }
    const ContinuousPointConfig& config() const { return cfg_; }

    Vec reset() {
        state_ = Vec::Zero(4);
        steps_ = 0;
        return state_;
    }

    StepResult step(const Vec& action) {
        if (action.size() != kActionDim) throw ArgumentError("point env: action must be 2-D");
        const Vec a = action.cwiseMax(-1.0).cwiseMin(1.0);

        Vec v = cfg_.drag * state_.tail(2) + a;
        v = v.cwiseMax(-cfg_.max_speed).cwiseMin(cfg_.max_speed);
        Vec p = state_.head(2) + cfg_.position_step * v;
        p = p.cwiseMax(-cfg_.position_bound).cwiseMin(cfg_.position_bound);

        state_.head(2) = p;
        state_.tail(2) = v;
        ++steps_;

        StepResult out;
        out.state = state_;
        out.reward = Vec::Zero(2);
        out.reward(0) = cfg_.speed_scale * std::max(0.0, v(0));
        if (v(0) >= cfg_.min_speed)
            out.reward(1) = cfg_.efficiency_scale * (cfg_.efficiency_shift - a.squaredNorm());
        out.done = steps_ >= cfg_.horizon;
        return out;
    }

private:
    ContinuousPointConfig cfg_;
    Vec state_ = Vec::Zero(4);
    int steps_ = 0;
};

} // namespace morl::env
