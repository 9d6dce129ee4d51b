#pragma once

#include <Eigen/Dense>

#include <cmath>
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

namespace morl::agents {

// Directional angle between the projected preference and a Q vector:
// g = arccos(w_p . q / (|w_p| |q|)), with the arccos singularity guarded
// when computing d g / d q.
template <class S>
struct AngleTerm {
    S value;
    nn::Vector<S> grad;
};

template <class S>
inline AngleTerm<S> directional_angle(const nn::Vector<S>& wp, const nn::Vector<S>& q) {
    const S nw = std::max(wp.norm(), S(1e-12));
    const S nq = std::max(q.norm(), S(1e-12));
    S u = wp.dot(q) / (nw * nq);
    u = std::min(S(1), std::max(S(-1), u));
    AngleTerm<S> out;
    out.value = std::acos(u);
    const S root = std::sqrt(std::max(S(1) - u * u, S(1e-12)));
    out.grad = -(wp / (nw * nq) - (u / (nq * nq)) * q) / root;
    return out;
}

// Twin-critic deterministic-policy agent for continuous actions. Critics map
// (state, action, preference) to an L-vector; the backup uses the vector
// value of whichever critic scalarizes smaller. Preference alignment enters
// through the directional-angle penalty on both losses; an angle coefficient
// of zero disables the alignment terms, reducing the agent to scalarized
// twin-delayed learning.
template <class S>
class Td3Agent {
public:
    using Net = nn::DenseNetwork<S>;
    using Mat = nn::Matrix<S>;
    using Vec = nn::Vector<S>;
    using Batch = std::vector<const replay::Transition<S>*>;

    Td3Agent(int state_dim, int action_dim, int objectives, double action_bound,
             const TrainConfig& cfg, Rng& rng)
        : state_dim_(state_dim), action_dim_(action_dim), objectives_(objectives),
          bound_(S(action_bound)), gamma_(S(cfg.gamma)), tau_(S(cfg.tau)),
          policy_delay_(cfg.policy_delay), target_noise_(S(cfg.target_noise)),
          noise_clip_(S(cfg.noise_clip)), angle_coef_(S(cfg.angle_coefficient)),
          loss_kind_(cfg.loss) {
        const int critic_in = state_dim + action_dim + objectives;
        critic1_ = Net::mlp(critic_in, cfg.hidden_width, cfg.hidden_layers, objectives,
                            nn::Activation::Rectifier, nn::Activation::Identity);
        critic2_ = critic1_;
        actor_ = Net::mlp(state_dim + objectives, cfg.hidden_width, cfg.hidden_layers, action_dim,
                          nn::Activation::Rectifier, nn::Activation::Tanh);
        critic1_.init_uniform(rng);
        critic2_.init_uniform(rng);
        actor_.init_uniform(rng);
        critic1_target_ = critic1_;
        critic2_target_ = critic2_;
        actor_target_ = actor_;
        opt_c1_ = nn::Adam<S>(critic1_, S(cfg.lr));
        opt_c2_ = nn::Adam<S>(critic2_, S(cfg.lr));
        opt_actor_ = nn::Adam<S>(actor_, S(cfg.actor_lr));
    }

    // Rebuild from checkpointed networks.
    Td3Agent(Net actor, Net actor_target, Net c1, Net c1t, Net c2, Net c2t, int action_dim,
             int objectives, double action_bound, const TrainConfig& cfg)
        : state_dim_(int(actor.input_width()) - objectives), action_dim_(action_dim),
          objectives_(objectives), bound_(S(action_bound)), gamma_(S(cfg.gamma)),
          tau_(S(cfg.tau)), policy_delay_(cfg.policy_delay), target_noise_(S(cfg.target_noise)),
          noise_clip_(S(cfg.noise_clip)), angle_coef_(S(cfg.angle_coefficient)),
          loss_kind_(cfg.loss), critic1_(std::move(c1)), critic2_(std::move(c2)),
          actor_(std::move(actor)), critic1_target_(std::move(c1t)),
          critic2_target_(std::move(c2t)), actor_target_(std::move(actor_target)) {
        if (actor_.output_width() != action_dim_)
            throw DimensionError("td3: checkpoint actor width mismatch");
        opt_c1_ = nn::Adam<S>(critic1_, S(cfg.lr));
        opt_c2_ = nn::Adam<S>(critic2_, S(cfg.lr));
        opt_actor_ = nn::Adam<S>(actor_, S(cfg.actor_lr));
    }

    int state_dim() const { return state_dim_; }
    int action_dim() const { return action_dim_; }
    int objectives() const { return objectives_; }
    double action_bound() const { return double(bound_); }
    long update_count() const { return update_count_; }

    Net& actor() { return actor_; }
    const Net& actor() const { return actor_; }
    Net& critic(int i) { return i == 0 ? critic1_ : critic2_; }
    const Net& critic(int i) const { return i == 0 ? critic1_ : critic2_; }
    Net& critic_target(int i) { return i == 0 ? critic1_target_ : critic2_target_; }
    const Net& critic_target(int i) const { return i == 0 ? critic1_target_ : critic2_target_; }
    Net& actor_target() { return actor_target_; }
    const Net& actor_target() const { return actor_target_; }

    Vec act_greedy(const Vec& state, const Vec& w) const {
        return bound_ * actor_.predict(join2(state, w));
    }

    Vec act(const Vec& state, const Vec& w, double sigma, Rng& rng) const {
        Vec a = act_greedy(state, w);
        std::normal_distribution<double> noise(0.0, sigma);
        for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += S(noise(rng));
        return a.cwiseMax(-bound_).cwiseMin(bound_);
    }

    // Smoothed target action: clipped Gaussian noise, then the action box.
    Vec target_action(const Vec& next_state, const Vec& w, Rng& rng) const {
        Vec a = bound_ * actor_target_.predict(join2(next_state, w));
        std::normal_distribution<double> noise(0.0, double(target_noise_));
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            S eps = S(noise(rng));
            eps = std::min(noise_clip_, std::max(-noise_clip_, eps));
            a(i) += eps;
        }
        return a.cwiseMax(-bound_).cwiseMin(bound_);
    }

    // Shared backup target: the vector value of whichever target critic gives
    // the smaller scalarization at the smoothed target action. All network
    // passes are batched across the minibatch.
    Mat critic_targets(const Batch& batch, Rng& rng) const {
        const int B = int(batch.size());
        Mat xa(state_dim_ + objectives_, B);
        for (int i = 0; i < B; ++i) {
            const auto& t = *batch[std::size_t(i)];
            xa.col(i) << t.next_state, t.preference;
        }
        Mat a_tilde = bound_ * actor_target_.predict_batch(xa);
        std::normal_distribution<double> noise(0.0, double(target_noise_));
        for (int i = 0; i < B; ++i)
            for (Eigen::Index j = 0; j < a_tilde.rows(); ++j) {
                S eps = S(noise(rng));
                eps = std::min(noise_clip_, std::max(-noise_clip_, eps));
                a_tilde(j, i) += eps;
            }
        a_tilde = a_tilde.cwiseMax(-bound_).cwiseMin(bound_);

        Mat xc(state_dim_ + action_dim_ + objectives_, B);
        for (int i = 0; i < B; ++i) {
            const auto& t = *batch[std::size_t(i)];
            xc.col(i) << t.next_state, a_tilde.col(i), t.preference;
        }
        const Mat q1 = critic1_target_.predict_batch(xc);
        const Mat q2 = critic2_target_.predict_batch(xc);

        Mat y(objectives_, B);
        for (int i = 0; i < B; ++i) {
            const auto& t = *batch[std::size_t(i)];
            if (t.done) {
                y.col(i) = t.reward;
                continue;
            }
            const bool second = t.preference.dot(q2.col(i)) < t.preference.dot(q1.col(i));
            y.col(i) = t.reward + gamma_ * (second ? q2.col(i) : q1.col(i));
        }
        return y;
    }

    double critic_loss_on(int index, const Batch& batch, const Mat& y,
                          const pref::RbfInterpolator& projection) const {
        const Mat q = critic(index).predict_batch(critic_input(batch));
        return critic_loss_value(q, y, batch, projection);
    }

    std::pair<double, nn::Gradients<S>> critic_loss_and_gradients(
        int index, const Batch& batch, const Mat& y, const pref::RbfInterpolator& projection) {
        Net& net = critic(index);
        const Mat& q = net.forward_batch(critic_input(batch));
        auto reg = nn::regression_loss(loss_kind_, q, y);
        Mat dq = reg.grad;
        double total = double(reg.value);
        if (angle_coef_ > S(0)) {
            const int B = int(batch.size());
            double angle_sum = 0.0;
            for (int i = 0; i < B; ++i) {
                const Vec wp = project_pref(projection, *batch[std::size_t(i)]);
                const auto ang = directional_angle<S>(wp, Vec(q.col(i)));
                angle_sum += double(ang.value);
                dq.col(i) += ang.grad / S(B);
            }
            total += angle_sum / B;
        }
        if (!std::isfinite(total)) throw NumericError("critic update: non-finite loss");
        return {total, net.backward(dq)};
    }

    double critic_update(const Batch& batch, const pref::RbfInterpolator& projection, Rng& rng) {
        if (batch.empty()) throw ArgumentError("critic update: empty minibatch");
        const Mat y = critic_targets(batch, rng);
        double total = 0.0;
        for (int i = 0; i < 2; ++i) {
            auto [loss, grads] = critic_loss_and_gradients(i, batch, y, projection);
            (i == 0 ? opt_c1_ : opt_c2_).step(critic(i), grads);
            total += loss;
        }
        ++update_count_;
        return 0.5 * total;
    }

    // Deterministic-policy objective: minimize -w^T Q1 plus the scaled angle
    // term, differentiated through the critic's action input.
    double actor_objective(const Batch& batch, const pref::RbfInterpolator& projection) const {
        const int B = int(batch.size());
        const Mat a = bound_ * actor_.predict_batch(actor_input(batch));
        const Mat q = critic1_.predict_batch(critic_input_with(batch, a));
        double value = 0.0;
        for (int i = 0; i < B; ++i) {
            const auto& t = *batch[std::size_t(i)];
            value -= double(t.preference.dot(q.col(i)));
            if (angle_coef_ > S(0)) {
                const Vec wp = project_pref(projection, t);
                value += double(angle_coef_) * double(directional_angle<S>(wp, Vec(q.col(i))).value);
            }
        }
        return value / B;
    }

    nn::Gradients<S> actor_gradients(const Batch& batch,
                                     const pref::RbfInterpolator& projection) {
        const int B = int(batch.size());
        const Mat a = bound_ * actor_.forward_batch(actor_input(batch));
        const Mat& q = critic1_.forward_batch(critic_input_with(batch, a));

        Mat dq(objectives_, B);
        for (int i = 0; i < B; ++i) {
            const auto& t = *batch[std::size_t(i)];
            dq.col(i) = -t.preference / S(B);
            if (angle_coef_ > S(0)) {
                const Vec wp = project_pref(projection, t);
                dq.col(i) += (angle_coef_ / S(B)) * directional_angle<S>(wp, Vec(q.col(i))).grad;
            }
        }
        auto critic_grads = critic1_.backward(dq); // critic parameters are not stepped here
        const Mat da = bound_ * critic_grads.input.middleRows(state_dim_, action_dim_);
        return actor_.backward(da);
    }

    // Delayed policy step; a no-op unless the update counter is a multiple of
    // the policy delay. Soft-updates all three targets afterwards.
    bool maybe_actor_update(const Batch& batch, const pref::RbfInterpolator& projection) {
        if (update_count_ == 0 || update_count_ % policy_delay_ != 0) return false;
        auto grads = actor_gradients(batch, projection);
        opt_actor_.step(actor_, grads);
        nn::soft_update(critic1_target_, critic1_, tau_);
        nn::soft_update(critic2_target_, critic2_, tau_);
        nn::soft_update(actor_target_, actor_, tau_);
        return true;
    }

private:
    double critic_loss_value(const Mat& q, const Mat& y, const Batch& batch,
                             const pref::RbfInterpolator& projection) const {
        auto reg = nn::regression_loss(loss_kind_, q, y);
        double total = double(reg.value);
        if (angle_coef_ > S(0)) {
            const int B = int(batch.size());
            double angle_sum = 0.0;
            for (int i = 0; i < B; ++i) {
                const Vec wp = project_pref(projection, *batch[std::size_t(i)]);
                angle_sum += double(directional_angle<S>(wp, Vec(q.col(i))).value);
            }
            total += angle_sum / B;
        }
        return total;
    }

    Vec project_pref(const pref::RbfInterpolator& projection,
                     const replay::Transition<S>& t) const {
        return projection
            .project(pref::renormalized_preference(t.preference.template cast<double>()))
            .template cast<S>();
    }

    Mat critic_input(const Batch& batch) const {
        Mat x(state_dim_ + action_dim_ + objectives_, Eigen::Index(batch.size()));
        for (int i = 0; i < int(batch.size()); ++i) {
            const auto& t = *batch[std::size_t(i)];
            x.col(i) << t.state, t.action, t.preference;
        }
        return x;
    }

    Mat critic_input_with(const Batch& batch, const Mat& actions) const {
        Mat x(state_dim_ + action_dim_ + objectives_, Eigen::Index(batch.size()));
        for (int i = 0; i < int(batch.size()); ++i) {
            const auto& t = *batch[std::size_t(i)];
            x.col(i) << t.state, actions.col(i), t.preference;
        }
        return x;
    }

    Mat actor_input(const Batch& batch) const {
        Mat x(state_dim_ + objectives_, Eigen::Index(batch.size()));
        for (int i = 0; i < int(batch.size()); ++i) {
            const auto& t = *batch[std::size_t(i)];
            x.col(i) << t.state, t.preference;
        }
        return x;
    }

    static Vec join2(const Vec& a, const Vec& b) {
        Vec x(a.size() + b.size());
        x << a, b;
        return x;
    }

    int state_dim_;
    int action_dim_;
    int objectives_;
    S bound_;
    S gamma_;
    S tau_;
    int policy_delay_;
    S target_noise_;
    S noise_clip_;
    S angle_coef_;
    nn::LossKind loss_kind_;
    long update_count_ = 0;

    Net critic1_, critic2_, actor_;
    Net critic1_target_, critic2_target_, actor_target_;
    nn::Adam<S> opt_c1_, opt_c2_, opt_actor_;
};

} // namespace morl::agents
