#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "morl/agent_io.hpp"
#include "morl/env_front.hpp"
#include "morl/evaluate.hpp"
#include "morl/train.hpp"

using namespace morl;
using Vec = Eigen::VectorXd;

namespace {

template <class S, class Expr>
void rig_constant_output(nn::DenseNetwork<S>& net, const Expr& out) {
    for (auto& l : net.layers()) {
        l.weight.setZero();
        l.bias.setZero();
    }
    net.layers().back().bias = out;
}

agents::TrainConfig small_ddqn_config() {
    agents::TrainConfig cfg;
    cfg.steps = 100;
    cfg.minibatch = 8;
    cfg.workers = 1;
    cfg.hidden_layers = 2;
    cfg.hidden_width = 32;
    cfg.warmup_minibatches = 2;
    cfg.eval_every = 1000000;
    cfg.buffer_capacity = 100000;
    cfg.seed = 3;
    return cfg;
}

agents::TrainConfig small_td3_config() {
    agents::TrainConfig cfg = agents::td3_defaults();
    cfg.steps = 60;
    cfg.minibatch = 8;
    cfg.workers = 2;
    cfg.hidden_width = 24;
    cfg.warmup_minibatches = 2;
    cfg.eval_every = 1000000;
    cfg.buffer_capacity = 100000;
    cfg.policy_delay = 4;
    cfg.seed = 5;
    return cfg;
}

template <class S>
replay::Transition<S> random_transition(Rng& rng, int state_dim, int action_dim, int L,
                                        bool discrete) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    replay::Transition<S> t;
    t.state.resize(state_dim);
    t.next_state.resize(state_dim);
    for (int i = 0; i < state_dim; ++i) {
        t.state(i) = S(u(rng));
        t.next_state(i) = S(u(rng));
    }
    t.reward.resize(L);
    for (int i = 0; i < L; ++i) t.reward(i) = S(u(rng));
    const auto w = pref::sample_uniform(L, rng);
    t.preference = w.vec().template cast<S>();
    if (discrete) {
        std::uniform_int_distribution<int> pick(0, action_dim - 1);
        t.action_index = pick(rng);
    } else {
        t.action.resize(action_dim);
        for (int i = 0; i < action_dim; ++i) t.action(i) = S(u(rng));
    }
    t.done = false;
    return t;
}

template <class S>
bool same_network(const nn::DenseNetwork<S>& a, const nn::DenseNetwork<S>& b) {
    if (a.layer_count() != b.layer_count()) return false;
    for (std::size_t i = 0; i < a.layer_count(); ++i)
        if (a.layer(i).weight != b.layer(i).weight || a.layer(i).bias != b.layer(i).bias)
            return false;
    return true;
}

} // namespace

TEST_CASE("epsilon-greedy acting") {
    auto cfg = small_ddqn_config();
    Rng rng = make_rng(21);
    agents::DdqnAgent<double> agent(2, 4, 2, cfg, rng);

    // Fix Q so that w^T Q is maximal at action 2 for every input.
    nn::Vector<double> bias = nn::Vector<double>::Zero(8);
    bias.segment(2 * 2, 2) << 5.0, 5.0;
    rig_constant_output(agent.online(), bias);

    const nn::Vector<double> s = nn::Vector<double>::Zero(2);
    const nn::Vector<double> w = (nn::Vector<double>(2) << 0.5, 0.5).finished();

    SECTION("epsilon 0 is greedy") {
        for (int i = 0; i < 20; ++i) CHECK(agent.act(s, w, 0.0, rng) == 2);
    }

    SECTION("epsilon 1 is uniform over the four actions") {
        std::vector<long> counts(4, 0);
        for (int i = 0; i < 40000; ++i) ++counts[std::size_t(agent.act(s, w, 1.0, rng))];
        for (const long c : counts) CHECK(std::abs(c / 40000.0 - 0.25) < 0.02);
    }

    SECTION("epsilon 0.5 deviates from greedy at the Bernoulli rate") {
        // P(non-greedy) = eps * 3/4 with four actions.
        long deviations = 0;
        const long n = 100000;
        for (long i = 0; i < n; ++i)
            if (agent.act(s, w, 0.5, rng) != 2) ++deviations;
        CHECK(std::abs(double(deviations) / double(n) - 0.375) < 0.01);
    }

    SECTION("epsilon outside [0,1] is rejected") {
        CHECK_THROWS_AS(agent.act(s, w, 1.5, rng), ArgumentError);
    }
}

TEST_CASE("ddqn update") {
    auto cfg = small_ddqn_config();
    const auto interp = pref::identity_interpolator(2);

    SECTION("a batch already on target has zero loss and leaves parameters alone") {
        Rng rng = make_rng(22);
        agents::DdqnAgent<double> agent(2, 3, 2, cfg, rng);
        rig_constant_output(agent.online(), nn::Vector<double>::Zero(6));
        rig_constant_output(agent.target(), nn::Vector<double>::Zero(6));
        const auto before = agent.online();

        replay::Transition<double> t = random_transition<double>(rng, 2, 3, 2, true);
        t.reward.setZero();
        t.done = true;
        const double loss = agent.update({&t}, interp);
        CHECK(loss == 0.0);
        CHECK(same_network(agent.online(), before));
    }

    SECTION("single-transition loss equals the hand-computed squared error") {
        Rng rng = make_rng(23);
        agents::DdqnAgent<double> agent(2, 3, 2, cfg, rng);
        rig_constant_output(agent.online(), nn::Vector<double>::Zero(6));
        nn::Vector<double> qt(6);
        qt << 0.2, 0.1, 0.9, 1.0, 0.1, 1.4; // three 2-vectors
        rig_constant_output(agent.target(), qt);

        replay::Transition<double> t = random_transition<double>(rng, 2, 3, 2, true);
        t.action_index = 1;
        t.reward << 0.5, 0.2;
        t.preference << 0.6, 0.4;
        t.done = false;

        // Oracle: alignment-selected target action, then mean squared error
        // over the two reward components (prediction is zero).
        const Vec w = t.preference;
        const Vec wp = interp.project(pref::PreferenceVector(w));
        int a_star = 0;
        double best = -1e300;
        for (int a = 0; a < 3; ++a) {
            const Vec qa = qt.segment(2 * a, 2);
            const double cos = wp.dot(qa) / (wp.norm() * qa.norm());
            const double score = cos * w.dot(qa);
            if (score > best) {
                best = score;
                a_star = a;
            }
        }
        const Vec y = t.reward + cfg.gamma * qt.segment(2 * a_star, 2);
        const double want = (y(0) * y(0) + y(1) * y(1)) / 2.0;

        const double loss = agent.update({&t}, interp);
        CHECK(loss == Catch::Approx(want).epsilon(1e-12));
    }

    SECTION("analytic gradients match finite differences") {
        Rng rng = make_rng(24);
        agents::TrainConfig gc = cfg;
        gc.hidden_width = 8;
        agents::DdqnAgent<double> agent(3, 3, 2, gc, rng);
        std::vector<replay::Transition<double>> storage;
        agents::DdqnAgent<double>::Batch batch;
        for (int i = 0; i < 4; ++i) storage.push_back(random_transition<double>(rng, 3, 3, 2, true));
        for (const auto& t : storage) batch.push_back(&t);

        auto [loss, grads] = agent.loss_and_gradients(batch, interp);
        const double h = 1e-5;
        double max_rel = 0.0;
        for (std::size_t li = 0; li < agent.online().layer_count(); ++li) {
            auto& wmat = agent.online().layer(li).weight;
            for (Eigen::Index r = 0; r < wmat.rows(); ++r)
                for (Eigen::Index c = 0; c < wmat.cols(); ++c) {
                    const double orig = wmat(r, c);
                    wmat(r, c) = orig + h;
                    const double up = agent.loss_on(batch, interp);
                    wmat(r, c) = orig - h;
                    const double dn = agent.loss_on(batch, interp);
                    wmat(r, c) = orig;
                    const double fd = (up - dn) / (2 * h);
                    const double an = grads.weight[li](r, c);
                    const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
                    max_rel = std::max(max_rel, std::abs(fd - an) / scale);
                }
        }
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("td3 critic mechanics") {
    auto cfg = small_td3_config();
    const auto interp = pref::identity_interpolator(2);

    SECTION("the backup uses the vector of the critic with the smaller scalarization") {
        cfg.target_noise = 0.0;
        Rng rng = make_rng(25);
        agents::Td3Agent<double> agent(2, 2, 2, 1.0, cfg, rng);
        rig_constant_output(agent.critic_target(0), (nn::Vector<double>(2) << 1.0, 1.0).finished());
        rig_constant_output(agent.critic_target(1), (nn::Vector<double>(2) << 0.3, 1.3).finished());

        replay::Transition<double> t = random_transition<double>(rng, 2, 2, 2, false);
        t.preference << 0.5, 0.5; // scalarizations: 1.0 vs 0.8
        t.reward.setZero();
        t.done = false;
        Rng noise_rng = make_rng(1);
        const auto y = agent.critic_targets({&t}, noise_rng);
        CHECK(y(0, 0) == Catch::Approx(cfg.gamma * 0.3));
        CHECK(y(1, 0) == Catch::Approx(cfg.gamma * 1.3));
    }

    SECTION("target smoothing noise never exceeds the clip limit") {
        cfg.target_noise = 5.0; // huge noise, tight clip
        cfg.noise_clip = 0.5;
        Rng rng = make_rng(26);
        agents::Td3Agent<double> agent(2, 2, 2, 10.0, cfg, rng);
        const nn::Vector<double> s = nn::Vector<double>::Zero(2);
        const nn::Vector<double> w = (nn::Vector<double>(2) << 0.5, 0.5).finished();
        const nn::Vector<double> clean = agent.act_greedy(s, w);
        Rng noise_rng = make_rng(2);
        for (int i = 0; i < 500; ++i) {
            const auto a = agent.target_action(s, w, noise_rng);
            for (Eigen::Index j = 0; j < a.size(); ++j)
                CHECK(std::abs(a(j) - clean(j)) <= 0.5 + 1e-12);
        }
    }

    SECTION("a value parallel to the projected preference has zero angle penalty") {
        const nn::Vector<double> wp = (nn::Vector<double>(2) << 0.6, 0.8).finished();
        const auto ang = agents::directional_angle<double>(wp, 3.0 * wp);
        CHECK(ang.value == Catch::Approx(0.0).margin(1e-6));
    }

    SECTION("critic loss (with the angle term) matches finite differences") {
        cfg.target_noise = 0.0;
        cfg.angle_coefficient = 10.0;
        Rng rng = make_rng(27);
        agents::Td3Agent<double> agent(3, 2, 2, 1.0, cfg, rng);
        std::vector<replay::Transition<double>> storage;
        agents::Td3Agent<double>::Batch batch;
        for (int i = 0; i < 4; ++i)
            storage.push_back(random_transition<double>(rng, 3, 2, 2, false));
        for (const auto& t : storage) batch.push_back(&t);
        Rng noise_rng = make_rng(3);
        const auto y = agent.critic_targets(batch, noise_rng);

        auto [loss, grads] = agent.critic_loss_and_gradients(0, batch, y, interp);
        const double h = 1e-5;
        double max_rel = 0.0;
        for (std::size_t li = 0; li < agent.critic(0).layer_count(); ++li) {
            auto& wmat = agent.critic(0).layer(li).weight;
            for (Eigen::Index r = 0; r < wmat.rows(); ++r)
                for (Eigen::Index c = 0; c < wmat.cols(); ++c) {
                    const double orig = wmat(r, c);
                    wmat(r, c) = orig + h;
                    const double up = agent.critic_loss_on(0, batch, y, interp);
                    wmat(r, c) = orig - h;
                    const double dn = agent.critic_loss_on(0, batch, y, interp);
                    wmat(r, c) = orig;
                    const double fd = (up - dn) / (2 * h);
                    const double an = grads.weight[li](r, c);
                    const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
                    max_rel = std::max(max_rel, std::abs(fd - an) / scale);
                }
        }
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("td3 actor mechanics") {
    auto cfg = small_td3_config();
    const auto interp = pref::identity_interpolator(2);

    SECTION("the policy step is a no-op off the delay schedule") {
        cfg.policy_delay = 4;
        cfg.target_noise = 0.0;
        Rng rng = make_rng(28);
        agents::Td3Agent<double> agent(2, 2, 2, 1.0, cfg, rng);
        std::vector<replay::Transition<double>> storage;
        agents::Td3Agent<double>::Batch batch;
        for (int i = 0; i < 4; ++i) storage.push_back(random_transition<double>(rng, 2, 2, 2, false));
        for (const auto& t : storage) batch.push_back(&t);

        Rng noise_rng = make_rng(4);
        const auto before = agent.actor();
        for (int k = 0; k < 3; ++k) {
            agent.critic_update(batch, interp, noise_rng);
            CHECK_FALSE(agent.maybe_actor_update(batch, interp));
        }
        CHECK(same_network(agent.actor(), before));
        agent.critic_update(batch, interp, noise_rng);
        CHECK(agent.maybe_actor_update(batch, interp)); // fourth update triggers
        CHECK_FALSE(same_network(agent.actor(), before));
    }

    SECTION("actor gradients match finite differences for alpha 0 and alpha 10") {
        for (const double alpha : {0.0, 10.0}) {
            cfg.angle_coefficient = alpha;
            Rng rng = make_rng(29);
            agents::Td3Agent<double> agent(3, 2, 2, 1.0, cfg, rng);
            std::vector<replay::Transition<double>> storage;
            agents::Td3Agent<double>::Batch batch;
            for (int i = 0; i < 4; ++i)
                storage.push_back(random_transition<double>(rng, 3, 2, 2, false));
            for (const auto& t : storage) batch.push_back(&t);

            auto grads = agent.actor_gradients(batch, interp);
            const double h = 1e-5;
            double max_rel = 0.0;
            for (std::size_t li = 0; li < agent.actor().layer_count(); ++li) {
                auto& wmat = agent.actor().layer(li).weight;
                for (Eigen::Index r = 0; r < wmat.rows(); ++r)
                    for (Eigen::Index c = 0; c < wmat.cols(); ++c) {
                        const double orig = wmat(r, c);
                        wmat(r, c) = orig + h;
                        const double up = agent.actor_objective(batch, interp);
                        wmat(r, c) = orig - h;
                        const double dn = agent.actor_objective(batch, interp);
                        wmat(r, c) = orig;
                        const double fd = (up - dn) / (2 * h);
                        const double an = grads.weight[li](r, c);
                        const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
                        max_rel = std::max(max_rel, std::abs(fd - an) / scale);
                    }
            }
            CHECK(max_rel < 1e-4);
        }
    }

    SECTION("the alignment coefficient changes the update direction") {
        auto cfg0 = cfg;
        cfg0.angle_coefficient = 0.0;
        cfg0.policy_delay = 1;
        auto cfg10 = cfg0;
        cfg10.angle_coefficient = 10.0;

        Rng rng_a = make_rng(30), rng_b = make_rng(30);
        agents::Td3Agent<double> a0(2, 2, 2, 1.0, cfg0, rng_a);
        agents::Td3Agent<double> a10(2, 2, 2, 1.0, cfg10, rng_b);
        CHECK(same_network(a0.actor(), a10.actor()));

        Rng rng_t = make_rng(31);
        std::vector<replay::Transition<double>> storage;
        agents::Td3Agent<double>::Batch batch;
        for (int i = 0; i < 6; ++i) storage.push_back(random_transition<double>(rng_t, 2, 2, 2, false));
        for (const auto& t : storage) batch.push_back(&t);

        Rng n1 = make_rng(32), n2 = make_rng(32);
        a0.critic_update(batch, pref::identity_interpolator(2), n1);
        a10.critic_update(batch, pref::identity_interpolator(2), n2);
        a0.maybe_actor_update(batch, pref::identity_interpolator(2));
        a10.maybe_actor_update(batch, pref::identity_interpolator(2));
        CHECK_FALSE(same_network(a0.actor(), a10.actor()));
    }
}

TEST_CASE("training loop accounting and determinism") {
    const auto proto = env::FruitTree(env::builtin_ftn_config(5));
    const Eigen::VectorXd ref = Eigen::VectorXd::Zero(6);

    SECTION("smoke: 500 single-worker rounds fill the buffer 4x with HER") {
        agents::TrainConfig cfg = small_ddqn_config();
        cfg.steps = 500;
        cfg.her_samples = 3;
        Rng rng = make_rng(60);
        agents::DdqnAgent<float> agent(2, 2, 6, cfg, rng);
        auto align = agents::AlignmentState::from_front(6, env::true_pareto_front(proto, cfg.gamma));
        replay::ReplayBuffer<float> buffer(cfg.buffer_capacity);
        const auto log = agents::train_ddqn(agent, proto, cfg, align, ref, buffer);
        CHECK(buffer.size() == 4 * 500);
        CHECK(log.episodes == 100); // depth-5 episodes
    }

    SECTION("buffer size is min(capacity, rounds * workers * (1 + extras))") {
        agents::TrainConfig cfg = small_ddqn_config();
        cfg.steps = 30;
        cfg.workers = 2;
        cfg.her_samples = 3;
        cfg.buffer_capacity = 64;
        Rng rng = make_rng(61);
        agents::DdqnAgent<float> agent(2, 2, 6, cfg, rng);
        auto align = agents::AlignmentState::from_front(6, env::true_pareto_front(proto, cfg.gamma));
        replay::ReplayBuffer<float> buffer(cfg.buffer_capacity);
        agents::train_ddqn(agent, proto, cfg, align, ref, buffer);
        CHECK(buffer.size() == 64);

        agents::TrainConfig cfg2 = cfg;
        cfg2.steps = 5;
        cfg2.buffer_capacity = 10000;
        Rng rng2 = make_rng(61);
        agents::DdqnAgent<float> agent2(2, 2, 6, cfg2, rng2);
        replay::ReplayBuffer<float> buffer2(cfg2.buffer_capacity);
        agents::train_ddqn(agent2, proto, cfg2, align, ref, buffer2);
        CHECK(buffer2.size() == 5 * 2 * 4);
    }

    SECTION("fixed-seed runs are bitwise reproducible") {
        agents::TrainConfig cfg = small_ddqn_config();
        cfg.steps = 120;
        cfg.eval_every = 40;

        auto run = [&]() {
            Rng rng = make_rng(62);
            agents::DdqnAgent<float> agent(2, 2, 6, cfg, rng);
            auto align =
                agents::AlignmentState::from_front(6, env::true_pareto_front(proto, cfg.gamma));
            const auto log = agents::train_ddqn(agent, proto, cfg, align, ref);
            return std::make_pair(agent, log);
        };
        const auto [agent_a, log_a] = run();
        const auto [agent_b, log_b] = run();
        CHECK(same_network(agent_a.online(), agent_b.online()));
        REQUIRE(log_a.rows.size() == log_b.rows.size());
        for (std::size_t i = 0; i < log_a.rows.size(); ++i) {
            CHECK(log_a.rows[i].loss == log_b.rows[i].loss);
            CHECK(log_a.rows[i].hypervolume == log_b.rows[i].hypervolume);
        }
    }

    SECTION("threaded explorers reproduce the sequential run exactly") {
        agents::TrainConfig cfg = small_ddqn_config();
        cfg.steps = 60;
        cfg.workers = 4;

        auto run = [&](bool parallel) {
            agents::TrainConfig c = cfg;
            c.parallel = parallel;
            Rng rng = make_rng(63);
            agents::DdqnAgent<float> agent(2, 2, 6, c, rng);
            auto align =
                agents::AlignmentState::from_front(6, env::true_pareto_front(proto, c.gamma));
            agents::train_ddqn(agent, proto, c, align, ref);
            return agent;
        };
        const auto seq = run(false);
        const auto par = run(true);
        CHECK(same_network(seq.online(), par.online()));
    }

    SECTION("ftn evaluation returns live in the discounted leaf table") {
        agents::TrainConfig cfg = small_ddqn_config();
        cfg.steps = 200;
        Rng rng = make_rng(64);
        agents::DdqnAgent<float> agent(2, 2, 6, cfg, rng);
        auto align = agents::AlignmentState::from_front(6, env::true_pareto_front(proto, cfg.gamma));
        agents::train_ddqn(agent, proto, cfg, align, ref);

        const auto grid = pref::evaluation_grid(6, 0.5);
        const auto sweep = agents::sweep_returns(agent, proto, grid, cfg.gamma);
        REQUIRE(sweep.size() == grid.size());

        double disc = 1.0;
        for (int t = 0; t < 4; ++t) disc *= cfg.gamma;
        for (const auto& ret : sweep) {
            bool found = false;
            for (const auto& leaf : proto.config().leaves)
                if (ret == disc * leaf) found = true;
            CHECK(found);
        }

        const auto again = agents::sweep_returns(agent, proto, grid, cfg.gamma);
        for (std::size_t i = 0; i < sweep.size(); ++i) CHECK(sweep[i] == again[i]);
    }
}

TEST_CASE("td3 with a zero alignment coefficient ignores the projection entirely") {
    // Reduction to scalarized twin-delayed learning: with alpha = 0 neither
    // loss touches the projected preference, so wildly different
    // interpolators must produce bit-identical trainings.
    const env::ContinuousPoint proto;
    agents::TrainConfig cfg = small_td3_config();
    cfg.steps = 40;
    cfg.angle_coefficient = 0.0;
    const Eigen::VectorXd ref = Eigen::VectorXd::Zero(2);

    auto run = [&](agents::AlignmentState align) {
        Rng rng = make_rng(65);
        agents::Td3Agent<float> agent(proto.state_dim(), proto.action_dim(), proto.objectives(),
                                      proto.action_bound(), cfg, rng);
        agents::train_td3(agent, proto, cfg, align, ref);
        return agent;
    };

    auto weird = agents::AlignmentState::identity(2);
    {
        std::vector<pref::PreferenceVector> keys = pref::key_preference_set(2);
        std::vector<Vec> sols;
        sols.push_back(pref::normalize_solution((Vec(2) << 5, 1).finished()));
        sols.push_back(pref::normalize_solution((Vec(2) << 1, 9).finished()));
        sols.push_back(pref::normalize_solution((Vec(2) << 2, 2).finished()));
        weird.interpolator = pref::RbfInterpolator::fit(keys, sols);
    }
    const auto a = run(agents::AlignmentState::identity(2));
    const auto b = run(std::move(weird));
    CHECK(same_network(a.actor(), b.actor()));
    CHECK(same_network(a.critic(0), b.critic(0)));
}

TEST_CASE("checkpoints restore identical behavior") {
    const auto proto = env::FruitTree(env::builtin_ftn_config(5));
    agents::TrainConfig cfg = small_ddqn_config();
    cfg.steps = 80;
    Rng rng = make_rng(66);
    agents::DdqnAgent<float> agent(2, 2, 6, cfg, rng);
    auto align = agents::AlignmentState::from_front(6, env::true_pareto_front(proto, cfg.gamma));
    agents::train_ddqn(agent, proto, cfg, align, Eigen::VectorXd::Zero(6));

    agents::Manifest manifest;
    manifest.fields["env"] = "ftn5";
    manifest.fields["gamma"] = std::to_string(cfg.gamma);
    manifest.fields["step"] = "80";
    manifest.fields["config_hash"] = "0";
    agents::save_checkpoint("ckpt_test", agent, align, manifest);

    auto loaded = agents::load_ddqn_checkpoint<float>("ckpt_test", cfg);
    CHECK(same_network(loaded.agent.online(), agent.online()));
    CHECK(loaded.manifest.get("env") == "ftn5");

    const auto grid = pref::evaluation_grid(6, 0.5);
    const auto a = agents::sweep_returns(agent, proto, grid, cfg.gamma);
    const auto b = agents::sweep_returns(loaded.agent, proto, grid, cfg.gamma);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    std::filesystem::remove_all("ckpt_test");
}
