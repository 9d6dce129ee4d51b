#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "morl/errors.hpp"
#include "morl/rng.hpp"
#include "morl/simplex.hpp"

namespace morl::tab {

using Vec = Eigen::VectorXd;
using PrefGrid = std::vector<pref::PreferenceVector>;

inline double cosine_similarity(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("cosine: dimension mismatch");
    const double na = a.norm();
    const double nb = b.norm();
    if (!(na > 0.0) || !(nb > 0.0)) throw ArgumentError("cosine: zero vector");
    return a.dot(b) / (na * nb);
}

// Greedy arm of the alignment criterion: argmax over actions of
// S_c(w_p, q_a) * (w^T q_a), cosine against the projected preference and the
// scalarization against the raw one. Ties break toward the lowest index;
// degenerate zero-length q contributes a zero cosine.
inline int aligned_action_select(const Vec& w, const Vec& w_p, const std::vector<Vec>& q) {
    if (q.empty()) throw ArgumentError("action select: empty action list");
    const double np = w_p.norm();
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q.size(); ++a) {
        const double nq = q[a].norm();
        const double cos = (np > 0.0 && nq > 0.0) ? w_p.dot(q[a]) / (np * nq) : 0.0;
        const double score = cos * w.dot(q[a]);
        if (score > best_score) {
            best_score = score;
            best = int(a);
        }
    }
    return best;
}

// Bellman-style backup target for a single transition.
inline Vec aligned_target(const Vec& reward, bool done, const Vec& w, const Vec& w_p,
                          const std::vector<Vec>& next_q, double gamma) {
    if (done || gamma == 0.0) return reward;
    return reward + gamma * next_q[std::size_t(aligned_action_select(w, w_p, next_q))];
}

// Finite multi-objective MDP: row-stochastic transitions, vector rewards.
struct FiniteMomdp {
    int states = 0;
    int actions = 0;
    int objectives = 0;
    double gamma = 0.9;
    std::vector<std::vector<Vec>> transition; // [s][a] -> distribution over s'
    std::vector<std::vector<Vec>> reward;     // [s][a] -> R^L

    void validate() const {
        if (states <= 0 || actions <= 0 || objectives < 2)
            throw ArgumentError("momdp: empty state/action space");
        if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError("momdp: gamma must be in (0,1)");
        if (int(transition.size()) != states || int(reward.size()) != states)
            throw DimensionError("momdp: tensor sizes");
        for (int s = 0; s < states; ++s) {
            for (int a = 0; a < actions; ++a) {
                const Vec& p = transition[std::size_t(s)][std::size_t(a)];
                if (p.size() != states) throw DimensionError("momdp: transition row size");
                if ((p.array() < -1e-12).any() || std::abs(p.sum() - 1.0) > 1e-9)
                    throw ArgumentError("momdp: transition rows must be stochastic");
                if (reward[std::size_t(s)][std::size_t(a)].size() != objectives)
                    throw DimensionError("momdp: reward width");
            }
        }
    }
};

// Q[s][a][w] in R^L over a finite preference grid.
class TabularQ {
public:
    TabularQ() = default;
    TabularQ(int states, int actions, std::size_t grid, int objectives)
        : states_(states), actions_(actions), grid_(grid),
          values_(std::size_t(states) * std::size_t(actions) * grid, Vec::Zero(objectives)) {}

    Vec& at(int s, int a, std::size_t w) { return values_[index(s, a, w)]; }
    const Vec& at(int s, int a, std::size_t w) const { return values_[index(s, a, w)]; }

    int states() const { return states_; }
    int actions() const { return actions_; }
    std::size_t grid_size() const { return grid_; }

private:
    std::size_t index(int s, int a, std::size_t w) const {
        return (std::size_t(s) * std::size_t(actions_) + std::size_t(a)) * grid_ + w;
    }

    int states_ = 0;
    int actions_ = 0;
    std::size_t grid_ = 0;
    std::vector<Vec> values_;
};

// d(Q, Q') = sup over (s, a, grid w) of |w^T (Q - Q')|. A pseudo-metric:
// distinct Q with equal scalarizations have distance zero.
inline double pseudo_metric(const TabularQ& q, const TabularQ& q2, const PrefGrid& grid) {
    if (q.states() != q2.states() || q.actions() != q2.actions() ||
        q.grid_size() != q2.grid_size() || q.grid_size() != grid.size())
        throw DimensionError("pseudo_metric: index sets differ");
    double sup = 0.0;
    for (int s = 0; s < q.states(); ++s)
        for (int a = 0; a < q.actions(); ++a)
            for (std::size_t w = 0; w < grid.size(); ++w) {
                const double v = std::abs(grid[w].vec().dot(q.at(s, a, w) - q2.at(s, a, w)));
                sup = std::max(sup, v);
            }
    return sup;
}

using Policy = std::function<int(int state, std::size_t w)>;
using Projector = std::function<Vec(const Vec&)>;

inline Projector identity_projector() {
    return [](const Vec& w) { return w; };
}

// (T_pi Q)(s,a,w) = r(s,a) + gamma * E_{s'}[Q(s', pi(s',w), w)]
inline TabularQ evaluation_operator(const FiniteMomdp& m, const TabularQ& q, const Policy& pi,
                                    const PrefGrid& grid) {
    TabularQ out(m.states, m.actions, grid.size(), m.objectives);
    for (int s = 0; s < m.states; ++s)
        for (int a = 0; a < m.actions; ++a)
            for (std::size_t w = 0; w < grid.size(); ++w) {
                Vec acc = m.reward[std::size_t(s)][std::size_t(a)];
                const Vec& p = m.transition[std::size_t(s)][std::size_t(a)];
                for (int s2 = 0; s2 < m.states; ++s2) {
                    if (p(s2) == 0.0) continue;
                    acc += m.gamma * p(s2) * q.at(s2, pi(s2, w), w);
                }
                out.at(s, a, w) = std::move(acc);
            }
    return out;
}

// (T Q)(s,a,w) = r(s,a) + gamma * E_{s'}[Q(s', a*, w)] where a* maximizes the
// alignment criterion at s' with the projected preference.
inline TabularQ optimality_operator(const FiniteMomdp& m, const TabularQ& q, const PrefGrid& grid,
                                    const Projector& project = identity_projector()) {
    if (grid.empty()) throw ArgumentError("optimality operator: empty preference grid");
    TabularQ out(m.states, m.actions, grid.size(), m.objectives);

    // Next-state action choice depends on (s', w) only.
    std::vector<std::vector<int>> choice(std::size_t(m.states),
                                         std::vector<int>(grid.size(), 0));
    std::vector<Vec> q_by_action(std::size_t(m.actions));
    for (int s2 = 0; s2 < m.states; ++s2)
        for (std::size_t w = 0; w < grid.size(); ++w) {
            for (int a2 = 0; a2 < m.actions; ++a2) q_by_action[std::size_t(a2)] = q.at(s2, a2, w);
            const Vec wp = project(grid[w].vec());
            choice[std::size_t(s2)][w] = aligned_action_select(grid[w].vec(), wp, q_by_action);
        }

    for (int s = 0; s < m.states; ++s)
        for (int a = 0; a < m.actions; ++a)
            for (std::size_t w = 0; w < grid.size(); ++w) {
                Vec acc = m.reward[std::size_t(s)][std::size_t(a)];
                const Vec& p = m.transition[std::size_t(s)][std::size_t(a)];
                for (int s2 = 0; s2 < m.states; ++s2) {
                    if (p(s2) == 0.0) continue;
                    acc += m.gamma * p(s2) * q.at(s2, choice[std::size_t(s2)][w], w);
                }
                out.at(s, a, w) = std::move(acc);
            }
    return out;
}

// Returns (d(TQ, TQ'), gamma * d(Q, Q')) for the caller to assert the
// contraction inequality.
inline std::pair<double, double> contraction_check(const FiniteMomdp& m, const TabularQ& q,
                                                   const TabularQ& q2, const PrefGrid& grid,
                                                   const Projector& project = identity_projector()) {
    const TabularQ tq = optimality_operator(m, q, grid, project);
    const TabularQ tq2 = optimality_operator(m, q2, grid, project);
    return {pseudo_metric(tq, tq2, grid), m.gamma * pseudo_metric(q, q2, grid)};
}

inline std::pair<double, double> contraction_check_evaluation(const FiniteMomdp& m,
                                                              const TabularQ& q,
                                                              const TabularQ& q2,
                                                              const PrefGrid& grid,
                                                              const Policy& pi) {
    const TabularQ tq = evaluation_operator(m, q, pi, grid);
    const TabularQ tq2 = evaluation_operator(m, q2, pi, grid);
    return {pseudo_metric(tq, tq2, grid), m.gamma * pseudo_metric(q, q2, grid)};
}

// Random instances for the property suites.
inline FiniteMomdp random_momdp(Rng& rng, int max_states, int max_actions, int objectives,
                                double gamma, double reward_scale = 0.5) {
    std::uniform_int_distribution<int> ns(2, max_states);
    std::uniform_int_distribution<int> na(2, max_actions);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> ur(-reward_scale, reward_scale);

    FiniteMomdp m;
    m.states = ns(rng);
    m.actions = na(rng);
    m.objectives = objectives;
    m.gamma = gamma;
    m.transition.resize(std::size_t(m.states));
    m.reward.resize(std::size_t(m.states));
    for (int s = 0; s < m.states; ++s) {
        for (int a = 0; a < m.actions; ++a) {
            Vec p(m.states);
            for (int s2 = 0; s2 < m.states; ++s2) p(s2) = u01(rng) + 1e-3;
            p /= p.sum();
            m.transition[std::size_t(s)].push_back(std::move(p));
            Vec r(objectives);
            for (int j = 0; j < objectives; ++j) r(j) = ur(rng);
            m.reward[std::size_t(s)].push_back(std::move(r));
        }
    }
    m.validate();
    return m;
}

inline TabularQ random_q(Rng& rng, const FiniteMomdp& m, std::size_t grid_size, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    TabularQ q(m.states, m.actions, grid_size, m.objectives);
    for (int s = 0; s < m.states; ++s)
        for (int a = 0; a < m.actions; ++a)
            for (std::size_t w = 0; w < grid_size; ++w)
                for (int j = 0; j < m.objectives; ++j) q.at(s, a, w)(j) = u(rng);
    return q;
}

inline Policy random_policy(Rng& rng, const FiniteMomdp& m, std::size_t grid_size) {
    auto table = std::make_shared<std::vector<int>>(std::size_t(m.states) * grid_size);
    std::uniform_int_distribution<int> ua(0, m.actions - 1);
    for (auto& a : *table) a = ua(rng);
    const std::size_t gs = grid_size;
    return [table, gs](int s, std::size_t w) { return (*table)[std::size_t(s) * gs + w]; };
}

} // namespace morl::tab
