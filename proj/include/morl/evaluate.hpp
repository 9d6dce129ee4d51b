#pragma once

#include <Eigen/Dense>

#include <vector>

#include "morl/agent_ddqn.hpp"
#include "morl/agent_td3.hpp"
#include "morl/metrics.hpp"
#include "morl/simplex.hpp"

namespace morl::agents {

// Greedy, noiseless rollout per preference, batched across the whole grid.
// Returns discounted cumulative reward vectors in grid order.
template <class S, class Env>
metrics::PointSet sweep_returns(const DdqnAgent<S>& agent, const Env& proto,
                                const std::vector<pref::PreferenceVector>& prefs, double gamma,
                                long step_cap = 100000) {
    const int B = int(prefs.size());
    const int L = agent.objectives();
    std::vector<Env> envs(std::size_t(B), proto);
    nn::Matrix<S> x(agent.state_dim() + L, B);
    std::vector<nn::Vector<S>> w(static_cast<std::size_t>(B));
    for (int i = 0; i < B; ++i) {
        const Eigen::VectorXd s0 = envs[std::size_t(i)].reset();
        w[std::size_t(i)] = prefs[std::size_t(i)].vec().template cast<S>();
        x.col(i) << s0.template cast<S>(), w[std::size_t(i)];
    }

    metrics::PointSet returns(std::size_t(B), Eigen::VectorXd::Zero(L));
    std::vector<double> disc(std::size_t(B), 1.0);
    std::vector<char> done(std::size_t(B), 0);
    int remaining = B;

    for (long step = 0; remaining > 0 && step < step_cap; ++step) {
        std::vector<int> active;
        active.reserve(std::size_t(remaining));
        for (int i = 0; i < B; ++i)
            if (!done[std::size_t(i)]) active.push_back(i);

        nn::Matrix<S> xa(x.rows(), Eigen::Index(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k) xa.col(Eigen::Index(k)) = x.col(active[k]);
        const nn::Matrix<S> q = agent.online().predict_batch(xa);

        for (std::size_t k = 0; k < active.size(); ++k) {
            const int i = active[k];
            int best = 0;
            S best_score = w[std::size_t(i)].dot(q.col(Eigen::Index(k)).segment(0, L));
            for (int a = 1; a < agent.action_count(); ++a) {
                const S score = w[std::size_t(i)].dot(q.col(Eigen::Index(k)).segment(a * L, L));
                if (score > best_score) {
                    best_score = score;
                    best = a;
                }
            }
            const auto sr = envs[std::size_t(i)].step(best);
            returns[std::size_t(i)] += disc[std::size_t(i)] * sr.reward;
            disc[std::size_t(i)] *= gamma;
            if (sr.done) {
                done[std::size_t(i)] = 1;
                --remaining;
            } else {
                x.col(i).segment(0, agent.state_dim()) = sr.state.template cast<S>();
            }
        }
    }
    return returns;
}

template <class S, class Env>
metrics::PointSet sweep_returns(const Td3Agent<S>& agent, const Env& proto,
                                const std::vector<pref::PreferenceVector>& prefs, double gamma,
                                long step_cap = 100000) {
    const int B = int(prefs.size());
    const int L = agent.objectives();
    std::vector<Env> envs(std::size_t(B), proto);
    nn::Matrix<S> x(agent.state_dim() + L, B);
    for (int i = 0; i < B; ++i) {
        const Eigen::VectorXd s0 = envs[std::size_t(i)].reset();
        x.col(i) << s0.template cast<S>(), prefs[std::size_t(i)].vec().template cast<S>();
    }

    metrics::PointSet returns(std::size_t(B), Eigen::VectorXd::Zero(L));
    std::vector<double> disc(std::size_t(B), 1.0);
    std::vector<char> done(std::size_t(B), 0);
    int remaining = B;

    for (long step = 0; remaining > 0 && step < step_cap; ++step) {
        std::vector<int> active;
        active.reserve(std::size_t(remaining));
        for (int i = 0; i < B; ++i)
            if (!done[std::size_t(i)]) active.push_back(i);

        nn::Matrix<S> xa(x.rows(), Eigen::Index(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k) xa.col(Eigen::Index(k)) = x.col(active[k]);
        const nn::Matrix<S> acts =
            S(agent.action_bound()) * agent.actor().predict_batch(xa);

        for (std::size_t k = 0; k < active.size(); ++k) {
            const int i = active[k];
            const Eigen::VectorXd a = acts.col(Eigen::Index(k)).template cast<double>();
            const auto sr = envs[std::size_t(i)].step(a);
            returns[std::size_t(i)] += disc[std::size_t(i)] * sr.reward;
            disc[std::size_t(i)] *= gamma;
            if (sr.done) {
                done[std::size_t(i)] = 1;
                --remaining;
            } else {
                x.col(i).segment(0, agent.state_dim()) = sr.state.template cast<S>();
            }
        }
    }
    return returns;
}

} // namespace morl::agents
