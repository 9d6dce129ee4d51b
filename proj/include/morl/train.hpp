#pragma once

#include <Eigen/Dense>

#include <barrier>
#include <functional>
#include <optional>
#include <ostream>
#include <thread>
#include <vector>

#include "morl/agent_ddqn.hpp"
#include "morl/agent_td3.hpp"
#include "morl/agents_config.hpp"
#include "morl/evaluate.hpp"
#include "morl/metrics.hpp"
#include "morl/rbf.hpp"
#include "morl/replay.hpp"
#include "morl/simplex.hpp"

namespace morl::agents {

// Interpolator plus the raw key returns backing it. A key's stored solution
// is replaced (and the projection refitted) whenever a key-preference
// evaluation finds a return that dominates it.
struct AlignmentState {
    pref::RbfInterpolator interpolator;
    std::vector<pref::PreferenceVector> keys;
    std::vector<std::optional<Eigen::VectorXd>> raw_solutions;

    static AlignmentState identity(int objectives) {
        AlignmentState s;
        s.interpolator = pref::identity_interpolator(objectives);
        s.keys = pref::key_preference_set(objectives);
        s.raw_solutions.assign(s.keys.size(), std::nullopt);
        return s;
    }

    // Keys seeded from a known front: each key preference takes the front
    // point with the best scalarized value as its solution.
    static AlignmentState from_front(int objectives, const metrics::PointSet& front) {
        AlignmentState s;
        s.keys = pref::key_preference_set(objectives);
        s.raw_solutions.reserve(s.keys.size());
        std::vector<Eigen::VectorXd> normalized;
        for (const auto& key : s.keys) {
            const Eigen::VectorXd* best = nullptr;
            double best_score = -std::numeric_limits<double>::infinity();
            for (const auto& p : front) {
                const double score = key.vec().dot(p);
                if (score > best_score) {
                    best_score = score;
                    best = &p;
                }
            }
            if (best == nullptr) throw ArgumentError("alignment: empty front");
            s.raw_solutions.emplace_back(*best);
            normalized.push_back(pref::normalize_solution(*best));
        }
        s.interpolator = pref::RbfInterpolator::fit(s.keys, normalized);
        return s;
    }

    // Returns true when any key solution improved and the fit was refreshed.
    bool consider(const metrics::PointSet& key_returns) {
        if (key_returns.size() != keys.size())
            throw DimensionError("alignment: key return count mismatch");
        bool changed = false;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const auto& ret = key_returns[i];
            if (!(ret.norm() > 0.0)) continue;
            if (!raw_solutions[i].has_value() || metrics::dominates(ret, *raw_solutions[i])) {
                raw_solutions[i] = ret;
                changed = true;
            }
        }
        if (changed) {
            std::vector<Eigen::VectorXd> normalized;
            std::vector<pref::PreferenceVector> fit_keys;
            for (std::size_t i = 0; i < keys.size(); ++i) {
                if (!raw_solutions[i].has_value()) {
                    fit_keys.push_back(keys[i]);
                    normalized.push_back(pref::normalize_solution(keys[i].vec()));
                } else {
                    fit_keys.push_back(keys[i]);
                    normalized.push_back(pref::normalize_solution(*raw_solutions[i]));
                }
            }
            interpolator = pref::RbfInterpolator::fit(fit_keys, normalized);
        }
        return changed;
    }
};

struct LogRow {
    long env_steps = 0;
    double loss = 0.0;
    double hypervolume = 0.0;
    double sparsity = 0.0;
    std::vector<double> key_returns; // scalarized per key preference
};

struct TrainLog {
    std::vector<LogRow> rows;
    long episodes = 0;
};

namespace detail {

// Runs the per-round explore phase either inline or on persistent worker
// threads synchronized by a barrier. Round results are identical in both
// modes: each worker owns its environment and generator, and the trainer
// phase only ever runs while the workers wait.
template <class ExploreFn, class TrainFn>
void run_rounds(long rounds, int workers, bool parallel, ExploreFn&& explore, TrainFn&& train) {
    enable_flush_to_zero();
    if (!parallel) {
        for (long r = 0; r < rounds; ++r) {
            for (int w = 0; w < workers; ++w) explore(w, r);
            train(r);
        }
        return;
    }

    std::barrier sync(workers + 1);
    std::vector<std::jthread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            enable_flush_to_zero();
            for (long r = 0; r < rounds; ++r) {
                explore(w, r);
                sync.arrive_and_wait(); // hand results to the trainer
                sync.arrive_and_wait(); // wait for the update phase
            }
        });
    }
    for (long r = 0; r < rounds; ++r) {
        sync.arrive_and_wait();
        train(r);
        sync.arrive_and_wait();
    }
}

template <class S, class Env>
struct Explorer {
    Env env;
    Rng rng;
    pref::PreferenceSubspace subspace;
    nn::Vector<S> state;
    nn::Vector<S> preference;
    bool needs_reset = true;

    void begin_episode(const std::optional<Eigen::VectorXd>& fixed) {
        state = env.reset().template cast<S>();
        if (fixed.has_value())
            preference = fixed->template cast<S>();
        else
            preference = pref::sample_from(subspace, rng).vec().template cast<S>();
        needs_reset = false;
    }
};

inline std::vector<double> scalarized_key_returns(const std::vector<pref::PreferenceVector>& keys,
                                                  const metrics::PointSet& returns) {
    std::vector<double> out;
    out.reserve(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) out.push_back(keys[i].vec().dot(returns[i]));
    return out;
}

} // namespace detail

// Synchronized-round trainer shared by both algorithms: every round each of
// the C_p explorers contributes one transition (drawn from its own preference
// sub-space), the trainer stores them with hindsight relabeling and then runs
// C_p minibatch updates.
template <class S, class Env, class UpdateFn, class ActFn>
TrainLog train_rounds(const Env& proto, const TrainConfig& cfg, AlignmentState& align,
                      replay::ReplayBuffer<S>& buffer, const Eigen::VectorXd& log_reference,
                      ActFn&& act, UpdateFn&& update,
                      const std::function<metrics::PointSet(const std::vector<pref::PreferenceVector>&)>& rollout,
                      std::ostream* progress) {
    cfg.validate();
    const int L = proto.objectives();
    const int n_workers = cfg.workers;

    std::vector<detail::Explorer<S, Env>> workers;
    workers.reserve(std::size_t(n_workers));
    const auto subspaces = pref::partition(L, n_workers);
    for (int w = 0; w < n_workers; ++w) {
        detail::Explorer<S, Env> e{proto, make_rng(cfg.seed, std::uint64_t(w) + 1),
                                   subspaces[std::size_t(w)], {}, {}, true};
        workers.push_back(std::move(e));
    }
    Rng trainer_rng = make_rng(cfg.seed, 0);

    std::vector<replay::Transition<S>> slots(static_cast<std::size_t>(n_workers));
    const std::size_t warmup = std::size_t(cfg.warmup_minibatches) * std::size_t(cfg.minibatch);

    TrainLog log;
    long episodes_at_last_key_eval = 0;
    double loss_accum = 0.0;
    long loss_count = 0;

    const auto explore = [&](int w, long round) {
        auto& ex = workers[std::size_t(w)];
        if (ex.needs_reset) ex.begin_episode(cfg.fixed_preference);
        slots[std::size_t(w)] = act(ex, cfg.epsilon_at(round));
        if (slots[std::size_t(w)].done) ex.needs_reset = true;
    };

    const auto train_phase = [&](long round) {
        for (int w = 0; w < n_workers; ++w) {
            buffer.store_with_her(slots[std::size_t(w)], cfg.use_her ? cfg.her_samples : 0,
                                  trainer_rng);
            if (slots[std::size_t(w)].done) ++log.episodes;
        }
        if (buffer.size() >= warmup) {
            for (int k = 0; k < n_workers; ++k) {
                const auto batch = buffer.sample_minibatch(std::size_t(cfg.minibatch), trainer_rng);
                loss_accum += update(batch);
                ++loss_count;
            }
        }

        if (!cfg.fixed_preference.has_value() &&
            log.episodes - episodes_at_last_key_eval >= cfg.key_eval_episodes) {
            episodes_at_last_key_eval = log.episodes;
            align.consider(rollout(align.keys));
        }

        const bool last = (round + 1 == cfg.steps);
        if ((round + 1) % cfg.eval_every == 0 || last) {
            LogRow row;
            row.env_steps = (round + 1) * n_workers;
            row.loss = loss_count > 0 ? loss_accum / double(loss_count) : 0.0;
            loss_accum = 0.0;
            loss_count = 0;
            const auto grid = pref::evaluation_grid(L, cfg.eval_step);
            const auto sweep = rollout(grid);
            const auto front = metrics::non_dominated_filter(sweep);
            row.hypervolume = metrics::hypervolume(front, log_reference, false);
            row.sparsity = metrics::sparsity(front);
            row.key_returns = detail::scalarized_key_returns(align.keys, rollout(align.keys));
            log.rows.push_back(std::move(row));
            if (progress)
                (*progress) << "steps " << (round + 1) * n_workers << " loss "
                            << log.rows.back().loss << " hv " << log.rows.back().hypervolume
                            << "\n";
        }
    };

    detail::run_rounds(cfg.steps, n_workers, cfg.parallel, explore, train_phase);
    return log;
}

template <class S, class Env>
TrainLog train_ddqn(DdqnAgent<S>& agent, const Env& proto, const TrainConfig& cfg,
                    AlignmentState& align, const Eigen::VectorXd& log_reference,
                    replay::ReplayBuffer<S>& buffer, std::ostream* progress = nullptr) {
    const auto act = [&](detail::Explorer<S, Env>& ex, double eps) {
        replay::Transition<S> t;
        t.state = ex.state;
        t.preference = ex.preference;
        t.action_index = agent.act(ex.state, ex.preference, eps, ex.rng);
        const auto sr = ex.env.step(t.action_index);
        t.reward = sr.reward.template cast<S>();
        t.next_state = sr.state.template cast<S>();
        t.done = sr.done;
        ex.state = t.next_state;
        return t;
    };
    const auto update = [&](const std::vector<const replay::Transition<S>*>& batch) {
        return agent.update(batch, align.interpolator);
    };
    const auto rollout = [&](const std::vector<pref::PreferenceVector>& prefs) {
        return sweep_returns(agent, proto, prefs, cfg.gamma);
    };
    return train_rounds<S, Env>(proto, cfg, align, buffer, log_reference, act, update, rollout,
                                progress);
}

template <class S, class Env>
TrainLog train_ddqn(DdqnAgent<S>& agent, const Env& proto, const TrainConfig& cfg,
                    AlignmentState& align, const Eigen::VectorXd& log_reference,
                    std::ostream* progress = nullptr) {
    replay::ReplayBuffer<S> buffer(cfg.buffer_capacity);
    return train_ddqn(agent, proto, cfg, align, log_reference, buffer, progress);
}

template <class S, class Env>
TrainLog train_td3(Td3Agent<S>& agent, const Env& proto, const TrainConfig& cfg,
                   AlignmentState& align, const Eigen::VectorXd& log_reference,
                   replay::ReplayBuffer<S>& buffer, std::ostream* progress = nullptr) {
    const auto act = [&](detail::Explorer<S, Env>& ex, double) {
        replay::Transition<S> t;
        t.state = ex.state;
        t.preference = ex.preference;
        const auto a = agent.act(ex.state, ex.preference, cfg.exploration_noise, ex.rng);
        t.action = a;
        const auto sr = ex.env.step(a.template cast<double>());
        t.reward = sr.reward.template cast<S>();
        t.next_state = sr.state.template cast<S>();
        t.done = sr.done;
        ex.state = t.next_state;
        return t;
    };
    Rng update_rng = make_rng(cfg.seed, 0xACC); // target smoothing noise stream
    const auto update = [&](const std::vector<const replay::Transition<S>*>& batch) {
        const double loss = agent.critic_update(batch, align.interpolator, update_rng);
        agent.maybe_actor_update(batch, align.interpolator);
        return loss;
    };
    const auto rollout = [&](const std::vector<pref::PreferenceVector>& prefs) {
        return sweep_returns(agent, proto, prefs, cfg.gamma);
    };
    return train_rounds<S, Env>(proto, cfg, align, buffer, log_reference, act, update, rollout,
                                progress);
}

template <class S, class Env>
TrainLog train_td3(Td3Agent<S>& agent, const Env& proto, const TrainConfig& cfg,
                   AlignmentState& align, const Eigen::VectorXd& log_reference,
                   std::ostream* progress = nullptr) {
    replay::ReplayBuffer<S> buffer(cfg.buffer_capacity);
    return train_td3(agent, proto, cfg, align, log_reference, buffer, progress);
}

} // namespace morl::agents
