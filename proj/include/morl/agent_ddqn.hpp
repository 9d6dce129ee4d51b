#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "morl/adam.hpp"
#include "morl/agents_config.hpp"
#include "morl/errors.hpp"
#include "morl/loss.hpp"
#include "morl/nn.hpp"
#include "morl/rbf.hpp"
#include "morl/replay.hpp"
#include "morl/rng.hpp"
#include "morl/tabular.hpp"

namespace morl::agents {

// Double-network multi-objective Q-agent for discrete actions. The Q-network
// maps (state, preference) to |A| x L values; the backup action is chosen by
// the alignment criterion (cosine against the projected preference times the
// raw scalarization) evaluated on the target network.
template <class S>
class DdqnAgent {
public:
    using Net = nn::DenseNetwork<S>;
    using Mat = nn::Matrix<S>;
    using Vec = nn::Vector<S>;
    using Batch = std::vector<const replay::Transition<S>*>;

    DdqnAgent(int state_dim, int n_actions, int objectives, const TrainConfig& cfg, Rng& rng)
        : state_dim_(state_dim), n_actions_(n_actions), objectives_(objectives),
          gamma_(S(cfg.gamma)), tau_(S(cfg.tau)), loss_kind_(cfg.loss) {
        online_ = Net::mlp(state_dim + objectives, cfg.hidden_width, cfg.hidden_layers,
                           n_actions * objectives, nn::Activation::Rectifier,
                           nn::Activation::Identity);
        online_.init_uniform(rng);
        target_ = online_;
        optimizer_ = nn::Adam<S>(online_, S(cfg.lr));
    }

    // Rebuild from checkpointed networks.
    DdqnAgent(Net online, Net target, int n_actions, int objectives, const TrainConfig& cfg)
        : state_dim_(int(online.input_width()) - objectives), n_actions_(n_actions),
          objectives_(objectives), gamma_(S(cfg.gamma)), tau_(S(cfg.tau)), loss_kind_(cfg.loss),
          online_(std::move(online)), target_(std::move(target)) {
        if (online_.output_width() != Eigen::Index(n_actions_) * objectives_)
            throw DimensionError("ddqn: checkpoint output width mismatch");
        optimizer_ = nn::Adam<S>(online_, S(cfg.lr));
    }

    int state_dim() const { return state_dim_; }
    int action_count() const { return n_actions_; }
    int objectives() const { return objectives_; }

    Net& online() { return online_; }
    const Net& online() const { return online_; }
    Net& target() { return target_; }
    const Net& target() const { return target_; }

    // Greedy arm: argmax over actions of w^T Q(s, a, w), lowest index on ties.
    int greedy_action(const Vec& state, const Vec& w) const {
        const Vec q = online_.predict(join(state, w));
        int best = 0;
        S best_score = scalarize(q, w, 0);
        for (int a = 1; a < n_actions_; ++a) {
            const S score = scalarize(q, w, a);
            if (score > best_score) {
                best_score = score;
                best = a;
            }
        }
        return best;
    }

    int act(const Vec& state, const Vec& w, double epsilon, Rng& rng) const {
        if (epsilon < 0.0 || epsilon > 1.0) throw ArgumentError("act: epsilon outside [0,1]");
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        if (coin(rng) < epsilon) {
            std::uniform_int_distribution<int> pick(0, n_actions_ - 1);
            return pick(rng);
        }
        return greedy_action(state, w);
    }

    // Alignment-selected backup targets from the target network.
    Mat targets_for(const Batch& batch, const pref::RbfInterpolator& projection) const {
        const int B = int(batch.size());
        const int L = objectives_;
        Mat xn(state_dim_ + L, B);
        for (int i = 0; i < B; ++i) {
            const auto& t = *batch[std::size_t(i)];
            xn.col(i) << t.next_state, t.preference;
        }
        const Mat qn = target_.predict_batch(xn);

        Mat y(L, B);
        std::vector<Eigen::VectorXd> next_q(static_cast<std::size_t>(n_actions_));
        for (int i = 0; i < B; ++i) {
            const auto& t = *batch[std::size_t(i)];
            if (t.done) {
                y.col(i) = t.reward;
                continue;
            }
            for (int a = 0; a < n_actions_; ++a)
                next_q[std::size_t(a)] = qn.col(i).segment(a * L, L).template cast<double>();
            const Eigen::VectorXd w = t.preference.template cast<double>();
            const Eigen::VectorXd wp =
                projection.project(pref::renormalized_preference(w));
            const int a_star = tab::aligned_action_select(w, wp, next_q);
            y.col(i) = t.reward + gamma_ * qn.col(i).segment(a_star * L, L);
        }
        return y;
    }

    // Pure loss probe (no caches touched); used by gradient checks.
    double loss_on(const Batch& batch, const pref::RbfInterpolator& projection) const {
        const Mat y = targets_for(batch, projection);
        const Mat q = online_.predict_batch(input_matrix(batch));
        Mat pred(objectives_, int(batch.size()));
        for (int i = 0; i < int(batch.size()); ++i)
            pred.col(i) = q.col(i).segment(batch[std::size_t(i)]->action_index * objectives_,
                                           objectives_);
        return double(nn::regression_loss(loss_kind_, pred, y).value);
    }

    std::pair<double, nn::Gradients<S>> loss_and_gradients(const Batch& batch,
                                                           const pref::RbfInterpolator& projection) {
        if (batch.empty()) throw ArgumentError("update: empty minibatch");
        const int B = int(batch.size());
        const int L = objectives_;
        const Mat y = targets_for(batch, projection);
        const Mat& q = online_.forward_batch(input_matrix(batch));

        Mat pred(L, B);
        for (int i = 0; i < B; ++i)
            pred.col(i) = q.col(i).segment(batch[std::size_t(i)]->action_index * L, L);
        const auto loss = nn::regression_loss(loss_kind_, pred, y);
        if (!std::isfinite(double(loss.value)))
            throw NumericError("ddqn update: non-finite loss");

        Mat dq = Mat::Zero(q.rows(), B);
        for (int i = 0; i < B; ++i)
            dq.col(i).segment(batch[std::size_t(i)]->action_index * L, L) = loss.grad.col(i);
        return {double(loss.value), online_.backward(dq)};
    }

    // One minibatch step: Adam on the online net, then a soft target update.
    double update(const Batch& batch, const pref::RbfInterpolator& projection) {
        auto [loss, grads] = loss_and_gradients(batch, projection);
        optimizer_.step(online_, grads);
        nn::soft_update(target_, online_, tau_);
        return loss;
    }

    static Vec join(const Vec& state, const Vec& w) {
        Vec x(state.size() + w.size());
        x << state, w;
        return x;
    }

private:
    Mat input_matrix(const Batch& batch) const {
        Mat x(state_dim_ + objectives_, Eigen::Index(batch.size()));
        for (int i = 0; i < int(batch.size()); ++i) {
            const auto& t = *batch[std::size_t(i)];
            x.col(i) << t.state, t.preference;
        }
        return x;
    }

    S scalarize(const Vec& q, const Vec& w, int action) const {
        return w.dot(q.segment(action * objectives_, objectives_));
    }

    int state_dim_;
    int n_actions_;
    int objectives_;
    S gamma_;
    S tau_;
    nn::LossKind loss_kind_;
    Net online_;
    Net target_;
    nn::Adam<S> optimizer_;
};

} // namespace morl::agents
