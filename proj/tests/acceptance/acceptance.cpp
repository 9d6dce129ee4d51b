// Acceptance suite: runs every stated criterion at its stated tolerance and
// prints one [PASS]/[FAIL] line per criterion. Exit code is the number of
// failed criteria. Long trainings log coarse progress to stderr.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "morl/agent_io.hpp"
#include "morl/env_front.hpp"
#include "morl/evaluate.hpp"
#include "morl/theory_suite.hpp"
#include "morl/train.hpp"

using namespace morl;
using Vec = Eigen::VectorXd;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << " | " << detail;
    std::cout << std::endl;
    if (!ok) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- theory ---
void criterion_theory() {
    const auto t0 = std::chrono::steady_clock::now();
    theory::SuiteOptions opt;
    opt.seed = 7;
    opt.momdp_trials = 100;
    opt.pair_trials = 100;
    opt.metric_triples = 10000;
    opt.out = nullptr;
    const auto rep = theory::run_suite(opt);

    std::ostringstream ss;
    ss.precision(3);
    ss << "runtime " << seconds_since(t0) << "s";
    report("theory: pseudo-metric axioms on 1e4 random triples", rep.metric_axioms, "");
    report("theory: printed indiscernibles counterexample evaluates to 0",
           rep.indiscernibles_counterexample, "");
    report("theory: evaluation operator contraction, 100 MOMDPs x 100 Q-pairs",
           rep.contraction_evaluation, "");
    report("theory: evaluation operator Banach convergence and fixed-point identity",
           rep.banach_evaluation && rep.fixed_point_evaluation, "");
    // The alignment-selected operator genuinely violates these bounds: near
    // alignment-score ties, a vanishing perturbation of Q flips the selected
    // action while the candidates' scalarized values differ by a finite gap.
    // The checks run faithfully and report what the operator actually does.
    report("theory: optimality operator contraction, 100 MOMDPs x 100 Q-pairs",
           rep.contraction_optimality, "");
    report("theory: optimality Banach residual < 1e-6 within ceil(log 1e-6/log gamma)+10",
           rep.banach_optimality, "");
    report("theory: optimality fixed point satisfies w^T(TQ*) = w^T Q* within 1e-8",
           rep.fixed_point_optimality, ss.str());
    if (!rep.failure.empty()) std::cerr << rep.failure;
}

// -------------------------------------------------------- worked example ---
void criterion_worked_example() {
    const Vec w = (Vec(2) << 0.9, 0.1).finished();
    std::vector<Vec> q{(Vec(2) << 0.9, 1.0).finished(), (Vec(2) << 0.1, 10.0).finished()};
    const double s0 = tab::cosine_similarity(w, q[0]) * w.dot(q[0]);
    const double s1 = tab::cosine_similarity(w, q[1]) * w.dot(q[1]);
    const int aligned = tab::aligned_action_select(w, w, q);
    const int plain = (w.dot(q[0]) >= w.dot(q[1])) ? 0 : 1;

    std::ostringstream ss;
    ss.precision(4);
    ss << "scores " << s0 << " vs " << s1 << ", aligned arm " << aligned << ", plain arm "
       << plain;
    const bool ok = std::abs(s0 - 0.68) < 0.005 && std::abs(s1 - 0.13) < 0.005 && aligned == 0 &&
                    plain == 1;
    report("worked example: selector reproduces 0.68 vs 0.13 and disagrees with plain argmax",
           ok, ss.str());
}

// --------------------------------------------------------------- metrics ---
void criterion_metrics() {
    Rng rng = make_rng(404);
    std::uniform_real_distribution<double> u(0.1, 1.0);

    bool mc_ok = true;
    for (const int dims : {2, 3, 5}) {
        const Vec ref = Vec::Zero(dims);
        for (int trial = 0; trial < 50; ++trial) {
            metrics::PointSet pts;
            for (int i = 0; i < 10 + trial % 10; ++i) {
                Vec p(dims);
                for (int j = 0; j < dims; ++j) p(j) = u(rng);
                pts.push_back(std::move(p));
            }
            const double exact = metrics::hypervolume(pts, ref, false);
            const auto mc = metrics::hypervolume_mc(pts, ref, 200000,
                                                    std::uint64_t(dims * 1009 + trial));
            if (std::abs(exact - mc.value) > 3.0 * mc.std_error + 1e-9) mc_ok = false;
        }
    }
    report("metrics: exact vs Monte-Carlo hypervolume within 3 sigma, 50 fronts x L in {2,3,5}",
           mc_ok, "");

    bool bit_ok = true;
    const Vec ref2 = Vec::Zero(2);
    for (int trial = 0; trial < 50; ++trial) {
        metrics::PointSet pts;
        for (int i = 0; i < 5 + trial % 40; ++i)
            pts.push_back((Vec(2) << u(rng), u(rng)).finished());
        if (metrics::hypervolume(pts, ref2, false) !=
            metrics::hypervolume_sliced(pts, ref2, false))
            bit_ok = false;
    }
    report("metrics: 2-D sweep equals recursive slicing bitwise on 50 random fronts", bit_ok, "");

    const double sp = metrics::sparsity({(Vec(2) << 0, 1).finished(), (Vec(2) << 1, 0).finished()});
    report("metrics: sparsity of {(0,1),(1,0)} equals 2 exactly", sp == 2.0,
           "sparsity=" + std::to_string(sp));

    metrics::PointSet front{(Vec(2) << 1, 4).finished(), (Vec(2) << 2, 3).finished(),
                            (Vec(2) << 3, 2).finished(), (Vec(2) << 4, 1).finished()};
    const auto r = metrics::crf1(front, front, 0.02);
    report("metrics: crf1(B=P) = (1,1,1)",
           r.precision == 1.0 && r.recall == 1.0 && r.f1 == 1.0, "");
}

// ------------------------------------------------------------- gradients ---
template <class GetLoss, class Net>
double max_grad_rel_error(Net& net, const nn::Gradients<double>& grads, const GetLoss& loss_fn) {
    const double h = 1e-5;
    double max_rel = 0.0;
    for (std::size_t li = 0; li < net.layer_count(); ++li) {
        auto& wmat = net.layer(li).weight;
        for (Eigen::Index r = 0; r < wmat.rows(); ++r)
            for (Eigen::Index c = 0; c < wmat.cols(); ++c) {
                const double orig = wmat(r, c);
                wmat(r, c) = orig + h;
                const double up = loss_fn();
                wmat(r, c) = orig - h;
                const double dn = loss_fn();
                wmat(r, c) = orig;
                const double fd = (up - dn) / (2 * h);
                const double an = grads.weight[li](r, c);
                const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
                max_rel = std::max(max_rel, std::abs(fd - an) / scale);
            }
    }
    return max_rel;
}

void criterion_gradients() {
    Rng rng = make_rng(808);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto interp = pref::identity_interpolator(2);

    agents::TrainConfig cfg;
    cfg.hidden_layers = 2;
    cfg.hidden_width = 6;
    cfg.target_noise = 0.0;

    double worst_q = 0.0, worst_critic = 0.0, worst_actor0 = 0.0, worst_actor10 = 0.0;
    for (int problem = 0; problem < 20; ++problem) {
        std::vector<replay::Transition<double>> storage;
        for (int i = 0; i < 4; ++i) {
            replay::Transition<double> t;
            t.state = (Vec(3) << u(rng), u(rng), u(rng)).finished();
            t.next_state = (Vec(3) << u(rng), u(rng), u(rng)).finished();
            t.reward = (Vec(2) << u(rng), u(rng)).finished();
            t.action = (Vec(2) << u(rng), u(rng)).finished();
            t.action_index = (i % 3);
            t.preference = pref::sample_uniform(2, rng).vec();
            t.done = false;
            storage.push_back(std::move(t));
        }
        std::vector<const replay::Transition<double>*> batch;
        for (const auto& t : storage) batch.push_back(&t);

        {
            agents::DdqnAgent<double> agent(3, 3, 2, cfg, rng);
            auto [loss, grads] = agent.loss_and_gradients(batch, interp);
            worst_q = std::max(worst_q, max_grad_rel_error(agent.online(), grads, [&] {
                                   return agent.loss_on(batch, interp);
                               }));
        }
        {
            agents::TrainConfig c = cfg;
            c.angle_coefficient = 10.0;
            agents::Td3Agent<double> agent(3, 2, 2, 1.0, c, rng);
            Rng noise = make_rng(1);
            const auto y = agent.critic_targets(batch, noise);
            auto [loss, grads] = agent.critic_loss_and_gradients(0, batch, y, interp);
            worst_critic =
                std::max(worst_critic, max_grad_rel_error(agent.critic(0), grads, [&] {
                             return agent.critic_loss_on(0, batch, y, interp);
                         }));
        }
        for (const double alpha : {0.0, 10.0}) {
            agents::TrainConfig c = cfg;
            c.angle_coefficient = alpha;
            agents::Td3Agent<double> agent(3, 2, 2, 1.0, c, rng);
            auto grads = agent.actor_gradients(batch, interp);
            const double rel = max_grad_rel_error(agent.actor(), grads, [&] {
                return agent.actor_objective(batch, interp);
            });
            (alpha == 0.0 ? worst_actor0 : worst_actor10) =
                std::max(alpha == 0.0 ? worst_actor0 : worst_actor10, rel);
        }
    }

    std::ostringstream ss;
    ss.precision(3);
    ss << "max rel err: q-loss " << worst_q << ", critic+angle " << worst_critic << ", actor a=0 "
       << worst_actor0 << ", actor a=10 " << worst_actor10;
    report("gradients: all losses match central finite differences, rel err < 1e-4 on 20 problems",
           worst_q < 1e-4 && worst_critic < 1e-4 && worst_actor0 < 1e-4 && worst_actor10 < 1e-4,
           ss.str());
}

// ------------------------------------------------------ HER / parallelism ---
void criterion_her() {
    const auto proto = env::FruitTree(env::builtin_ftn_config(5));
    const Vec ref = Vec::Zero(6);

    agents::TrainConfig cfg;
    cfg.steps = 40;
    cfg.workers = 3;
    cfg.her_samples = 3;
    cfg.minibatch = 8;
    cfg.hidden_layers = 2;
    cfg.hidden_width = 32;
    cfg.warmup_minibatches = 2;
    cfg.eval_every = 1000000;
    cfg.buffer_capacity = 100000;
    cfg.seed = 11;

    {
        Rng rng = make_rng(cfg.seed);
        agents::DdqnAgent<float> agent(2, 2, 6, cfg, rng);
        auto align =
            agents::AlignmentState::from_front(6, env::true_pareto_front(proto, cfg.gamma));
        replay::ReplayBuffer<float> buffer(cfg.buffer_capacity);
        agents::train_ddqn(agent, proto, cfg, align, ref, buffer);
        const std::size_t want = std::size_t(cfg.steps) * 3 * 4;
        report("her: buffer size after n rounds = min(capacity, n*C_p*(1+N_w)), uncapped",
               buffer.size() == want,
               "size=" + std::to_string(buffer.size()) + " want=" + std::to_string(want));
    }
    {
        agents::TrainConfig capped = cfg;
        capped.buffer_capacity = 100;
        Rng rng = make_rng(cfg.seed);
        agents::DdqnAgent<float> agent(2, 2, 6, capped, rng);
        auto align =
            agents::AlignmentState::from_front(6, env::true_pareto_front(proto, capped.gamma));
        replay::ReplayBuffer<float> buffer(capped.buffer_capacity);
        agents::train_ddqn(agent, proto, capped, align, ref, buffer);
        report("her: buffer size after n rounds = min(capacity, n*C_p*(1+N_w)), capped",
               buffer.size() == 100, "size=" + std::to_string(buffer.size()));
    }
    {
        agents::TrainConfig single = cfg;
        single.workers = 1;
        single.steps = 150;
        single.eval_every = 50;
        auto run = [&] {
            Rng rng = make_rng(single.seed);
            agents::DdqnAgent<float> agent(2, 2, 6, single, rng);
            auto align =
                agents::AlignmentState::from_front(6, env::true_pareto_front(proto, single.gamma));
            const auto log = agents::train_ddqn(agent, proto, single, align, ref);
            std::ostringstream ss;
            ss.precision(17);
            for (const auto& row : log.rows)
                ss << row.env_steps << ',' << row.loss << ',' << row.hypervolume << '\n';
            for (const auto& l : agent.online().layers()) ss << l.weight << l.bias;
            return ss.str();
        };
        const std::string a = run();
        const std::string b = run();
        report("her: single-worker fixed-seed runs are bitwise reproducible", a == b && !a.empty(),
               "");
    }
}

// ------------------------------------------------------------------- dst ---
void criterion_dst() {
    const auto t0 = std::chrono::steady_clock::now();
    env::DeepSeaTreasure envp; // builtin fixture mirrors the referenced layout

    agents::TrainConfig cfg = agents::ddqn_dst_defaults();
    cfg.seed = 1;
    cfg.eval_every = 10000;

    const auto front = env::true_pareto_front(envp, cfg.gamma);
    auto align = agents::AlignmentState::from_front(2, front);
    Rng rng = make_rng(cfg.seed, 0xA6E);
    agents::DdqnAgent<float> agent(envp.state_dim(), envp.action_count(), envp.objectives(),
                                   cfg, rng);
    agents::train_ddqn(agent, envp, cfg, align, (Vec(2) << 0, -19).finished(), &std::cerr);

    const auto grid = pref::evaluation_grid(2, 0.01);
    const auto sweep = agents::sweep_returns(agent, envp, grid, cfg.gamma);
    const Vec ref = (Vec(2) << 0.0, -19.0).finished();

    const auto r = metrics::crf1(sweep, front, 0.02);
    std::ostringstream c1;
    c1.precision(6);
    c1 << "precision=" << r.precision << " recall=" << r.recall << " crf1=" << r.f1;
    report("dst: CRF1 = 1.0 (eps=0.02) on the 101-point sweep vs the brute-force front",
           r.f1 == 1.0, c1.str());

    const double hv_opt = metrics::hypervolume(front, ref, false);
    const double hv_got =
        metrics::hypervolume(metrics::non_dominated_filter(sweep), ref, false);
    std::ostringstream c2;
    c2.precision(8);
    c2 << "hv=" << hv_got << " optimal=" << hv_opt << " published 241.73";
    report("dst: hypervolume within 2% of the fixture's brute-force optimum",
           std::abs(hv_got - hv_opt) <= 0.02 * hv_opt, c2.str());

    const double sp = metrics::sparsity(metrics::non_dominated_keep_duplicates(sweep));
    std::ostringstream c3;
    c3.precision(6);
    c3 << "sparsity=" << sp << " published 1.14";
    report("dst: sweep sparsity within 5% of the published 1.14 (fixture-conditional)",
           std::abs(sp - 1.14) <= 0.05 * 1.14, c3.str());

    std::ostringstream c4;
    c4.precision(4);
    c4 << seconds_since(t0) / 60.0 << " minutes";
    report("dst: runtime under 30 minutes", seconds_since(t0) < 1800.0, c4.str());
}

// ------------------------------------------------------------------- ftn ---
void run_ftn(int depth, long steps, bool require_exact) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto proto = env::FruitTree(env::builtin_ftn_config(depth));

    agents::TrainConfig cfg = agents::ddqn_ftn_defaults();
    cfg.steps = steps;
    cfg.seed = 1;
    cfg.eval_every = steps; // final row only; sweeps are costly at L=6
    cfg.key_eval_episodes = 1000000; // keys already sit on the true front

    const auto front = env::true_pareto_front(proto, cfg.gamma);
    auto align = agents::AlignmentState::from_front(6, front);
    Rng rng = make_rng(cfg.seed, 0xA6E);
    agents::DdqnAgent<float> agent(proto.state_dim(), proto.action_count(), proto.objectives(),
                                   cfg, rng);
    agents::train_ddqn(agent, proto, cfg, align, Vec::Zero(6), &std::cerr);

    const auto grid = pref::evaluation_grid(6, 0.1);
    const auto sweep = agents::sweep_returns(agent, proto, grid, cfg.gamma);
    const auto r = metrics::crf1(sweep, front, 0.02);

    const std::string name = "ftn d=" + std::to_string(depth);
    std::ostringstream c1;
    c1.precision(6);
    c1 << "precision=" << r.precision << " recall=" << r.recall << " crf1=" << r.f1
       << " front=" << front.size();
    if (require_exact) {
        report(name + ": CRF1 = 1.0 against the brute-force leaf front", r.f1 == 1.0, c1.str());

        const Vec ref = Vec::Zero(6);
        const double hv_got =
            metrics::hypervolume(metrics::non_dominated_filter(sweep), ref, false);
        const double hv_opt = metrics::hypervolume(front, ref, false);
        std::ostringstream c2;
        c2.precision(10);
        c2 << "hv=" << hv_got << " optimal=" << hv_opt;
        report(name + ": hypervolume equals the fixture's brute-force optimum exactly",
               hv_got == hv_opt, c2.str());
    } else {
        std::ostringstream soft;
        soft.precision(4);
        soft << c1.str() << " runtime " << seconds_since(t0) / 60.0 << " min";
        report(name + ": CRF1 >= 0.9 at reduced budget (soft target)", r.f1 >= 0.9, soft.str());
        return;
    }
    std::ostringstream c3;
    c3.precision(4);
    c3 << seconds_since(t0) / 60.0 << " minutes";
    report(name + ": runtime under 30 minutes", seconds_since(t0) < 1800.0, c3.str());
}

// ------------------------------------------------------------------- td3 ---
void criterion_td3_toy() {
    const auto t0 = std::chrono::steady_clock::now();
    const env::ContinuousPoint proto;
    const Vec ref = Vec::Zero(2);

    agents::TrainConfig cfg = agents::td3_defaults();
    cfg.steps = 50000;
    cfg.workers = 4;
    cfg.seed = 1;
    cfg.eval_every = 10000;
    cfg.key_eval_episodes = 100;

    std::vector<pref::PreferenceVector> keys{pref::PreferenceVector::of({1.0, 0.0}),
                                             pref::PreferenceVector::of({0.5, 0.5}),
                                             pref::PreferenceVector::of({0.0, 1.0})};

    Rng rng = make_rng(cfg.seed, 0xA6E);
    agents::Td3Agent<float> agent(proto.state_dim(), proto.action_dim(), proto.objectives(),
                                  proto.action_bound(), cfg, rng);

    const auto untrained = agents::sweep_returns(agent, proto, keys, cfg.gamma);
    auto align = agents::AlignmentState::identity(2);
    agents::train_td3(agent, proto, cfg, align, ref, &std::cerr);
    const auto trained = agents::sweep_returns(agent, proto, keys, cfg.gamma);

    bool improved = true;
    std::ostringstream c1;
    c1.precision(4);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const double before = keys[i].vec().dot(untrained[i]);
        const double after = keys[i].vec().dot(trained[i]);
        c1 << "key" << i << " " << before << "->" << after << "  ";
        if (after < 2.0 * before || after <= 0.0) improved = false;
    }
    report("td3 toy: scalarized key returns at least double the untrained agent's", improved,
           c1.str());

    const auto sweep =
        agents::sweep_returns(agent, proto, pref::evaluation_grid(2, 0.01), cfg.gamma);
    const auto front = metrics::non_dominated_filter(sweep);
    report("td3 toy: evaluation front holds >= 5 mutually non-dominated points",
           front.size() >= 5, "front=" + std::to_string(front.size()));

    // Single-preference baseline: plain scalarized profile on (0.5, 0.5).
    agents::TrainConfig base_cfg = agents::td3_key_defaults();
    base_cfg.steps = cfg.steps;
    base_cfg.seed = cfg.seed;
    base_cfg.eval_every = base_cfg.steps;
    base_cfg.fixed_preference = (Vec(2) << 0.5, 0.5).finished();
    Rng rng_b = make_rng(base_cfg.seed, 0xBA5E);
    agents::Td3Agent<float> baseline(proto.state_dim(), proto.action_dim(), proto.objectives(),
                                     proto.action_bound(), base_cfg, rng_b);
    auto align_b = agents::AlignmentState::identity(2);
    agents::train_td3(baseline, proto, base_cfg, align_b, ref, &std::cerr);
    const auto base_sweep =
        agents::sweep_returns(baseline, proto, pref::evaluation_grid(2, 0.01), base_cfg.gamma);

    const double hv_multi = metrics::hypervolume(front, ref, false);
    const double hv_base =
        metrics::hypervolume(metrics::non_dominated_filter(base_sweep), ref, false);
    std::ostringstream c2;
    c2.precision(6);
    c2 << "hv=" << hv_multi << " baseline=" << hv_base;
    report("td3 toy: front hypervolume at least matches the single-preference baseline",
           hv_multi >= hv_base, c2.str());

    std::ostringstream c3;
    c3.precision(4);
    c3 << seconds_since(t0) / 60.0 << " minutes";
    report("td3 toy: runtime under 20 minutes", seconds_since(t0) < 1200.0, c3.str());
}

} // namespace

int main(int argc, char** argv) {
    std::string only;
    for (int i = 1; i + 1 < argc + 1; ++i) {
        if (i < argc && std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = argv[i + 1];
    }
    const auto want = [&](const char* tag) { return only.empty() || only == tag; };

    if (want("theory")) criterion_theory();
    if (want("worked_example")) criterion_worked_example();
    if (want("metrics")) criterion_metrics();
    if (want("gradients")) criterion_gradients();
    if (want("her")) criterion_her();
    if (want("dst")) criterion_dst();
    if (want("ftn_d5")) run_ftn(5, 6000, true);
    if (want("ftn_d6")) run_ftn(6, 25000, false);
    if (want("ftn_d7")) run_ftn(7, 30000, false);
    if (want("td3_toy")) criterion_td3_toy();

    if (g_failures > 0) std::cout << g_failures << " criterion(s) failed" << std::endl;
    return g_failures;
}
