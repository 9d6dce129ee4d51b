// Command-line front end: train agents, sweep trained policies over the
// preference grid, score solution sets, verify the operator theory, and
// render Pareto scatters.
//
// Exit codes: 0 success, 1 property violation, 2 usage/config error,
// 3 numeric failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "morl/agent_io.hpp"
#include "morl/env_front.hpp"
#include "morl/evaluate.hpp"
#include "morl/run_config.hpp"
#include "morl/solution_io.hpp"
#include "morl/svg.hpp"
#include "morl/theory_suite.hpp"
#include "morl/train.hpp"

namespace {

using namespace morl;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

Eigen::VectorXd reference_for_env(const std::string& env) {
    if (env == "dst") return (Eigen::VectorXd(2) << 0.0, -19.0).finished();
    if (env == "point") return Eigen::VectorXd::Zero(2);
    if (env.rfind("ftn", 0) == 0) return Eigen::VectorXd::Zero(6);
    throw ArgumentError("unknown environment '" + env + "'");
}

env::DeepSeaTreasure make_dst(const std::string& fixture) {
    return env::DeepSeaTreasure(fixture.empty() ? env::default_dst_config()
                                                : env::load_dst_fixture(fixture));
}

env::FruitTree make_ftn(const std::string& env_name, const std::string& fixture) {
    const int depth = env_name.back() - '0';
    if (depth < 5 || depth > 7) throw ArgumentError("ftn depth must be 5, 6, or 7");
    return env::FruitTree(fixture.empty() ? env::builtin_ftn_config(depth)
                                          : env::load_ftn_fixture(fixture));
}

void write_training_log(const std::string& path, const agents::TrainLog& log) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write training log '" + path + "'");
    os.precision(12);
    os << "step,loss,hypervolume,sparsity";
    const std::size_t keys = log.rows.empty() ? 0 : log.rows.front().key_returns.size();
    for (std::size_t k = 0; k < keys; ++k) os << ",key_" << k;
    os << "\n";
    for (const auto& row : log.rows) {
        os << row.env_steps << ',' << row.loss << ',' << row.hypervolume << ',' << row.sparsity;
        for (const double v : row.key_returns) os << ',' << v;
        os << "\n";
    }
}

int cmd_train(io::RunConfig cfg) {
    cfg.train.validate();
    if (const char* env_dir = std::getenv("MORL_OUT_DIR")) cfg.out_dir = env_dir;
    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ofstream os(std::filesystem::path(cfg.out_dir) / "config.txt");
        cfg.serialize(os);
    }

    Rng init_rng = make_rng(cfg.train.seed, 0xA6E);
    agents::Manifest manifest;
    manifest.fields["env"] = cfg.env;
    manifest.fields["gamma"] = std::to_string(cfg.train.gamma);
    manifest.fields["step"] = std::to_string(cfg.train.steps * cfg.train.workers);
    manifest.fields["config_hash"] = std::to_string(cfg.hash());

    const Eigen::VectorXd log_ref = reference_for_env(cfg.env);
    agents::TrainLog log;
    const std::string ckpt_dir = (std::filesystem::path(cfg.out_dir) / "checkpoint").string();

    if (cfg.algo == "ddqn") {
        if (cfg.env == "point") throw ArgumentError("ddqn needs a discrete environment");
        if (cfg.env == "dst") {
            auto envp = make_dst(cfg.fixture);
            auto align = agents::AlignmentState::from_front(
                2, env::true_pareto_front(envp, cfg.train.gamma));
            agents::DdqnAgent<float> agent(envp.state_dim(), envp.action_count(),
                                           envp.objectives(), cfg.train, init_rng);
            log = agents::train_ddqn(agent, envp, cfg.train, align, log_ref, &std::cerr);
            agents::save_checkpoint(ckpt_dir, agent, align, manifest);
        } else {
            auto envp = make_ftn(cfg.env, cfg.fixture);
            auto align = agents::AlignmentState::from_front(
                6, env::true_pareto_front(envp, cfg.train.gamma));
            agents::DdqnAgent<float> agent(envp.state_dim(), envp.action_count(),
                                           envp.objectives(), cfg.train, init_rng);
            log = agents::train_ddqn(agent, envp, cfg.train, align, log_ref, &std::cerr);
            agents::save_checkpoint(ckpt_dir, agent, align, manifest);
        }
    } else if (cfg.algo == "td3" || cfg.algo == "td3-key") {
        if (cfg.env != "point") throw ArgumentError("td3 runs on the continuous environment");
        env::ContinuousPoint envp;
        auto align = agents::AlignmentState::identity(envp.objectives());
        agents::Td3Agent<float> agent(envp.state_dim(), envp.action_dim(), envp.objectives(),
                                      envp.action_bound(), cfg.train, init_rng);
        log = agents::train_td3(agent, envp, cfg.train, align, log_ref, &std::cerr);
        agents::save_checkpoint(ckpt_dir, agent, align, manifest);
    } else {
        throw ArgumentError("unknown algorithm '" + cfg.algo + "'");
    }

    write_training_log((std::filesystem::path(cfg.out_dir) / "training_log.csv").string(), log);
    std::cout << "checkpoint=" << ckpt_dir << "\n";
    std::cout << "log=" << (std::filesystem::path(cfg.out_dir) / "training_log.csv").string()
              << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& env_name,
             const std::string& fixture, double step, const std::string& out_path) {
    const auto manifest = agents::read_manifest(checkpoint);
    const std::string algo = manifest.get("algo");
    const double gamma = manifest.get_double("gamma");
    if (manifest.get("env") != env_name)
        std::cerr << "note: checkpoint was trained on '" << manifest.get("env") << "'\n";

    metrics::PointSet sweep;
    Eigen::VectorXd ref;
    if (algo == "ddqn") {
        auto loaded = agents::load_ddqn_checkpoint<float>(checkpoint, agents::TrainConfig{});
        if (env_name == "dst") {
            auto envp = make_dst(fixture);
            if (envp.state_dim() != loaded.agent.state_dim() ||
                envp.action_count() != loaded.agent.action_count())
                throw DimensionError("checkpoint/environment width mismatch");
            sweep = agents::sweep_returns(loaded.agent, envp,
                                          pref::evaluation_grid(2, step), gamma);
        } else {
            auto envp = make_ftn(env_name, fixture);
            if (envp.state_dim() != loaded.agent.state_dim() ||
                envp.action_count() != loaded.agent.action_count())
                throw DimensionError("checkpoint/environment width mismatch");
            sweep = agents::sweep_returns(loaded.agent, envp,
                                          pref::evaluation_grid(6, step), gamma);
        }
    } else {
        if (env_name != "point") throw ArgumentError("td3 checkpoints evaluate on 'point'");
        auto loaded = agents::load_td3_checkpoint<float>(checkpoint, agents::TrainConfig{});
        env::ContinuousPoint envp;
        if (envp.state_dim() != loaded.agent.state_dim())
            throw DimensionError("checkpoint/environment width mismatch");
        sweep = agents::sweep_returns(loaded.agent, envp, pref::evaluation_grid(2, step), gamma);
    }
    ref = reference_for_env(env_name);
    io::write_solutions(out_path, sweep, ref);
    std::cout << "solutions=" << out_path << "\n" << "count=" << sweep.size() << "\n";
    return kExitOk;
}

int cmd_metrics(const std::string& solutions_path, const std::string& ref_str,
                const std::string& truth_path, double eps, bool keep_duplicates) {
    const auto file = io::read_solutions(solutions_path);
    Eigen::VectorXd ref;
    if (!ref_str.empty()) {
        std::istringstream ss(ref_str);
        std::vector<double> vals;
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        ref.resize(Eigen::Index(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) ref(Eigen::Index(i)) = vals[i];
    } else if (file.reference.has_value()) {
        ref = *file.reference;
    } else {
        throw ArgumentError("metrics: no reference point given and none in the file");
    }

    const auto front = keep_duplicates ? metrics::non_dominated_keep_duplicates(file.points)
                                       : metrics::non_dominated_filter(file.points);
    std::cout.precision(10);
    std::cout << "points=" << file.points.size() << "\n";
    std::cout << "front=" << front.size() << "\n";
    std::cout << "hypervolume=" << metrics::hypervolume(front, ref) << "\n";
    std::cout << "sparsity=" << metrics::sparsity(front) << "\n";

    if (!truth_path.empty()) {
        const auto truth = io::read_solutions(truth_path);
        const auto truth_front = metrics::non_dominated_filter(truth.points);
        const auto r = metrics::crf1(file.points, truth_front, eps);
        std::cout << "precision=" << r.precision << "\n";
        std::cout << "recall=" << r.recall << "\n";
        std::cout << "crf1=" << r.f1 << "\n";
    }
    return kExitOk;
}

int cmd_verify_theory(std::uint64_t seed, int trials, bool corrupt) {
    theory::SuiteOptions opt;
    opt.seed = seed;
    opt.momdp_trials = trials;
    opt.pair_trials = 100;
    opt.corrupt_projector = corrupt;
    opt.out = &std::cout;
    const auto rep = theory::run_suite(opt);
    if (!rep.all_passed()) {
        std::cerr << "theory violation:\n" << rep.failure;
        return kExitViolation;
    }
    return kExitOk;
}

int cmd_plot(const std::string& solutions_path, const std::string& out_path,
             const std::string& ref_str) {
    const auto file = io::read_solutions(solutions_path);
    if (file.points.empty()) throw ArgumentError("plot: empty solution set");
    Eigen::VectorXd ref;
    if (!ref_str.empty()) {
        std::istringstream ss(ref_str);
        std::vector<double> vals;
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        ref.resize(Eigen::Index(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) ref(Eigen::Index(i)) = vals[i];
    } else if (file.reference.has_value()) {
        ref = *file.reference;
    } else {
        ref = Eigen::VectorXd::Zero(2);
    }
    io::write_scatter_svg(out_path, file.points, ref);
    std::cout << "plot=" << out_path << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"preference-conditioned multi-objective reinforcement learning"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train an agent");
    std::string t_algo = "ddqn", t_env = "dst", t_config = "defaults", t_out, t_fixture,
                t_fixed_pref;
    long t_steps = -1;
    int t_workers = -1;
    long t_seed = -1;
    bool t_no_her = false, t_parallel = false;
    train->add_option("--algo", t_algo, "ddqn | td3 | td3-key");
    train->add_option("--env", t_env, "dst | ftn5 | ftn6 | ftn7 | point");
    train->add_option("--config", t_config, "config file path, or 'defaults'");
    train->add_option("--steps", t_steps, "override: rounds per worker");
    train->add_option("--workers", t_workers, "override: explorer count");
    train->add_option("--seed", t_seed, "override: master seed");
    train->add_option("--out", t_out, "override: output directory");
    train->add_option("--fixture", t_fixture, "override: environment fixture file");
    train->add_option("--fixed-preference", t_fixed_pref,
                      "comma-separated preference; disables sub-space exploration");
    train->add_flag("--no-her", t_no_her, "disable hindsight preference relabeling");
    train->add_flag("--parallel", t_parallel, "threaded explorers");

    // eval
    auto* eval = app.add_subcommand("eval", "sweep the preference grid with a checkpoint");
    std::string e_ckpt, e_env = "dst", e_fixture, e_out = "solutions.csv";
    double e_step = 0.01;
    eval->add_option("--checkpoint", e_ckpt, "checkpoint directory")->required();
    eval->add_option("--env", e_env, "environment name");
    eval->add_option("--fixture", e_fixture, "environment fixture file");
    eval->add_option("--step", e_step, "preference grid step");
    eval->add_option("--out", e_out, "output solutions CSV");

    // metrics
    auto* met = app.add_subcommand("metrics", "score a solution set");
    std::string m_solutions, m_ref, m_truth;
    double m_eps = 0.02;
    bool m_keep_dups = false;
    met->add_option("--solutions", m_solutions, "solutions CSV")->required();
    met->add_option("--ref", m_ref, "reference point, comma-separated");
    met->add_option("--truth", m_truth, "true front CSV for coverage scoring");
    met->add_option("--eps", m_eps, "relative L1 tolerance for coverage");
    met->add_flag("--keep-duplicates", m_keep_dups,
                  "keep duplicate non-dominated points in the front");

    // verify-theory
    auto* theory_cmd = app.add_subcommand("verify-theory", "operator property suite");
    long v_seed = 7;
    int v_trials = 100;
    bool v_corrupt = false;
    theory_cmd->add_option("--seed", v_seed, "suite seed");
    theory_cmd->add_option("--trials", v_trials, "random instances per property");
    theory_cmd->add_flag("--corrupt-projector", v_corrupt,
                         "negate the projected preference (negative control)");

    // plot
    auto* plot = app.add_subcommand("plot", "render a 2-D Pareto scatter as SVG");
    std::string p_solutions, p_out = "front.svg", p_ref;
    plot->add_option("--solutions", p_solutions, "solutions CSV")->required();
    plot->add_option("--out", p_out, "output SVG path");
    plot->add_option("--ref", p_ref, "reference point, comma-separated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed()) {
            io::RunConfig cfg;
            if (t_config == "defaults")
                cfg = io::RunConfig::defaults(t_algo, t_env);
            else
                cfg = io::RunConfig::parse_file(t_config);
            if (train->count("--algo") || t_config == "defaults") cfg.algo = t_algo;
            if (train->count("--env") || t_config == "defaults") cfg.env = t_env;
            if (t_steps > 0) cfg.train.steps = t_steps;
            if (t_workers > 0) cfg.train.workers = t_workers;
            if (t_seed >= 0) cfg.train.seed = std::uint64_t(t_seed);
            if (!t_out.empty()) cfg.out_dir = t_out;
            if (!t_fixture.empty()) cfg.fixture = t_fixture;
            if (t_no_her) cfg.train.use_her = false;
            if (t_parallel) cfg.train.parallel = true;
            if (!t_fixed_pref.empty()) {
                std::istringstream ss(t_fixed_pref);
                std::vector<double> vals;
                std::string cell;
                while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
                Eigen::VectorXd w(Eigen::Index(vals.size()));
                for (std::size_t i = 0; i < vals.size(); ++i) w(Eigen::Index(i)) = vals[i];
                cfg.train.fixed_preference = w;
            }
            return cmd_train(std::move(cfg));
        }
        if (eval->parsed()) return cmd_eval(e_ckpt, e_env, e_fixture, e_step, e_out);
        if (met->parsed()) return cmd_metrics(m_solutions, m_ref, m_truth, m_eps, m_keep_dups);
        if (theory_cmd->parsed())
            return cmd_verify_theory(std::uint64_t(v_seed), v_trials, v_corrupt);
        if (plot->parsed()) return cmd_plot(p_solutions, p_out, p_ref);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
