#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

#include "morl/errors.hpp"
#include "morl/loss.hpp"

namespace morl::agents {

// Hyperparameters for both trainers. Defaults below reproduce the published
// configurations for the discrete and continuous algorithm variants.
struct TrainConfig {
    long steps = 100000;            // synchronized rounds (env steps per worker)
    int minibatch = 32;
    double gamma = 0.99;
    double tau = 0.005;
    std::size_t buffer_capacity = 10000;
    int workers = 10;               // preference sub-spaces explored in parallel
    int her_samples = 3;            // extra preferences stored per transition
    double lr = 3e-4;
    double actor_lr = 3e-4;
    int hidden_layers = 3;
    int hidden_width = 256;
    nn::LossKind loss = nn::LossKind::MeanSquaredError;

    // epsilon-greedy schedule: linear decay over the leading fraction of steps
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_fraction = 0.4;

    int warmup_minibatches = 10;    // no updates until buffer >= this * minibatch
    long eval_every = 1000;         // rounds between training-log evaluations
    double eval_step = 0.1;         // preference grid step for logged metrics
    long key_eval_episodes = 100;   // episodes between key-preference refit checks

    bool use_her = true;
    bool parallel = false;          // threaded explorers (results are identical)
    std::optional<Eigen::VectorXd> fixed_preference; // single-preference mode

    // TD3 specifics
    int policy_delay = 10;
    double exploration_noise = 0.1;
    double target_noise = 0.2;
    double noise_clip = 0.5;
    double angle_coefficient = 10.0; // 0 disables the alignment terms entirely

    std::uint64_t seed = 1;

    void validate() const {
        if (steps <= 0 || minibatch <= 0 || workers <= 0 || buffer_capacity == 0)
            throw ArgumentError("config: sizes must be positive");
        if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError("config: gamma must be in (0,1)");
        if (!(tau > 0.0 && tau < 1.0)) throw ArgumentError("config: tau must be in (0,1)");
        if (her_samples < 0) throw ArgumentError("config: her_samples must be >= 0");
        if (lr <= 0.0 || actor_lr <= 0.0) throw ArgumentError("config: learning rates");
        if (hidden_layers <= 0 || hidden_width <= 0) throw ArgumentError("config: net widths");
        if (epsilon_start < 0 || epsilon_start > 1 || epsilon_end < 0 || epsilon_end > 1 ||
            epsilon_fraction <= 0 || epsilon_fraction > 1)
            throw ArgumentError("config: epsilon schedule");
        if (policy_delay <= 0) throw ArgumentError("config: policy_delay must be positive");
        if (noise_clip < 0 || target_noise < 0 || exploration_noise < 0)
            throw ArgumentError("config: noise settings must be >= 0");
        if (angle_coefficient < 0) throw ArgumentError("config: angle_coefficient must be >= 0");
    }

    double epsilon_at(long round) const {
        const double horizon = epsilon_fraction * double(steps);
        if (horizon <= 0) return epsilon_end;
        const double t = double(round) / horizon;
        if (t >= 1.0) return epsilon_end;
        return epsilon_start + t * (epsilon_end - epsilon_start);
    }
};

inline TrainConfig ddqn_dst_defaults() {
    TrainConfig c;
    c.steps = 100000;
    c.minibatch = 32;
    c.gamma = 0.99;
    c.tau = 0.005;
    c.buffer_capacity = 10000;
    c.workers = 10;
    c.her_samples = 3;
    c.lr = 3e-4;
    c.hidden_layers = 3;
    c.hidden_width = 256;
    c.eval_step = 0.01;
    // Bounded-gradient regression keeps the aligned bootstrap from running
    // away late in training; plain MSE is available via the config switch.
    c.loss = nn::LossKind::SmoothL1;
    return c;
}

inline TrainConfig ddqn_ftn_defaults() {
    TrainConfig c = ddqn_dst_defaults();
    c.hidden_width = 512;
    c.eval_step = 0.1;
    return c;
}

inline TrainConfig td3_defaults() {
    TrainConfig c;
    c.steps = 1000000;
    c.minibatch = 256;
    c.gamma = 0.995;
    c.tau = 0.005;
    c.buffer_capacity = 2000000;
    c.workers = 10;
    c.her_samples = 3;
    c.lr = 3e-4;
    c.actor_lr = 3e-4;
    c.hidden_layers = 1;
    c.hidden_width = 400;
    c.policy_delay = 10;
    c.exploration_noise = 0.1;
    c.target_noise = 0.2;
    c.noise_clip = 0.5;
    c.angle_coefficient = 10.0;
    c.eval_step = 0.01;
    return c;
}

// Single-preference profile used to obtain key solutions: plain TD3 without
// hindsight relabeling or alignment terms.
inline TrainConfig td3_key_defaults() {
    TrainConfig c = td3_defaults();
    c.minibatch = 100;
    c.gamma = 0.99;
    c.buffer_capacity = 500000;
    c.policy_delay = 2;
    c.angle_coefficient = 0.0;
    c.use_her = false;
    c.workers = 1;
    return c;
}

} // namespace morl::agents
