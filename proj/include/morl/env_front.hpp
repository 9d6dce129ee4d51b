#pragma once

#include <vector>

#include "morl/env_dst.hpp"
#include "morl/env_ftn.hpp"
#include "morl/env_point.hpp"
#include "morl/errors.hpp"
#include "morl/metrics.hpp"

namespace morl::env {

// Discount factors for an episode of n rewards, accumulated exactly the way
// rollouts accumulate them (running product), so oracle returns match
// evaluated returns bit for bit on deterministic environments.
inline double discounted_penalty_sum(int steps, double gamma) {
    double total = 0.0;
    double disc = 1.0;
    for (int t = 0; t < steps; ++t) {
        total += disc;
        disc *= gamma;
    }
    return total;
}

inline double discount_at(int step_index, double gamma) {
    double disc = 1.0;
    for (int t = 0; t < step_index; ++t) disc *= gamma;
    return disc;
}

// Ground truth by exhaustive enumeration: one candidate return per treasure
// (value discounted at the shortest-path arrival step, accumulated time
// penalty), then a dominance filter.
inline metrics::PointSet true_pareto_front(const DeepSeaTreasure& env, double gamma = 1.0) {
    const auto dist = env.treasure_distances();
    metrics::PointSet returns;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const int n = dist[i];
        Vec r(2);
        r(0) = env.config().treasures[i].value * discount_at(n - 1, gamma);
        r(1) = env.config().time_penalty * discounted_penalty_sum(n, gamma);
        returns.push_back(std::move(r));
    }
    return metrics::non_dominated_filter(returns);
}

// Every leaf is reachable in exactly depth steps; filter the 2^d leaf returns.
inline metrics::PointSet true_pareto_front(const FruitTree& env, double gamma = 1.0) {
    const double disc = discount_at(env.depth() - 1, gamma);
    metrics::PointSet returns;
    returns.reserve(env.config().leaves.size());
    for (const auto& leaf : env.config().leaves) returns.push_back(disc * leaf);
    return metrics::non_dominated_filter(returns);
}

inline metrics::PointSet true_pareto_front(const ContinuousPoint&, double = 1.0) {
    throw UnsupportedError("true_pareto_front: not available for continuous environments");
}

} // namespace morl::env
