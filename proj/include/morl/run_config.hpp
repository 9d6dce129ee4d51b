#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "morl/agents_config.hpp"
#include "morl/errors.hpp"

namespace morl::io {

// Flat key=value run configuration with section headers, chosen for easy
// diffing. Unknown keys are rejected; serialization is canonical so
// parse -> serialize -> parse is the identity.
struct RunConfig {
    std::string algo = "ddqn"; // ddqn | td3
    std::string env = "dst";   // dst | ftn5 | ftn6 | ftn7 | point
    std::string out_dir = "runs/out";
    std::string fixture; // optional fixture path overriding the builtin table
    agents::TrainConfig train;

    static RunConfig defaults(const std::string& algo, const std::string& env) {
        RunConfig c;
        c.algo = algo;
        c.env = env;
        if (algo == "ddqn")
            c.train = (env == "dst") ? agents::ddqn_dst_defaults() : agents::ddqn_ftn_defaults();
        else if (algo == "td3")
            c.train = agents::td3_defaults();
        else if (algo == "td3-key")
            c.train = agents::td3_key_defaults();
        else
            throw ArgumentError("config: unknown algorithm '" + algo + "'");
        return c;
    }

    void serialize(std::ostream& os) const {
        os.precision(17);
        os << "[run]\n";
        os << "algo = " << algo << "\n";
        os << "env = " << env << "\n";
        os << "out_dir = " << out_dir << "\n";
        os << "fixture = " << fixture << "\n";
        os << "seed = " << train.seed << "\n";
        os << "[train]\n";
        os << "steps = " << train.steps << "\n";
        os << "minibatch = " << train.minibatch << "\n";
        os << "gamma = " << train.gamma << "\n";
        os << "tau = " << train.tau << "\n";
        os << "buffer = " << train.buffer_capacity << "\n";
        os << "workers = " << train.workers << "\n";
        os << "her_samples = " << train.her_samples << "\n";
        os << "her = " << (train.use_her ? "true" : "false") << "\n";
        os << "lr = " << train.lr << "\n";
        os << "actor_lr = " << train.actor_lr << "\n";
        os << "hidden_layers = " << train.hidden_layers << "\n";
        os << "hidden_width = " << train.hidden_width << "\n";
        os << "loss = " << (train.loss == nn::LossKind::MeanSquaredError ? "mse" : "smooth_l1")
           << "\n";
        os << "epsilon_start = " << train.epsilon_start << "\n";
        os << "epsilon_end = " << train.epsilon_end << "\n";
        os << "epsilon_fraction = " << train.epsilon_fraction << "\n";
        os << "warmup_minibatches = " << train.warmup_minibatches << "\n";
        os << "eval_every = " << train.eval_every << "\n";
        os << "eval_step = " << train.eval_step << "\n";
        os << "key_eval_episodes = " << train.key_eval_episodes << "\n";
        os << "parallel = " << (train.parallel ? "true" : "false") << "\n";
        os << "fixed_preference = ";
        if (train.fixed_preference.has_value()) {
            for (Eigen::Index j = 0; j < train.fixed_preference->size(); ++j)
                os << (*train.fixed_preference)(j)
                   << (j + 1 == train.fixed_preference->size() ? "" : ",");
        }
        os << "\n";
        os << "[td3]\n";
        os << "policy_delay = " << train.policy_delay << "\n";
        os << "exploration_noise = " << train.exploration_noise << "\n";
        os << "target_noise = " << train.target_noise << "\n";
        os << "noise_clip = " << train.noise_clip << "\n";
        os << "angle_coefficient = " << train.angle_coefficient << "\n";
    }

    std::string to_string() const {
        std::ostringstream ss;
        serialize(ss);
        return ss.str();
    }

    // FNV-1a over the canonical serialization.
    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (const char c : to_string()) {
            h ^= std::uint64_t(static_cast<unsigned char>(c));
            h *= 1099511628211ull;
        }
        return h;
    }

    void apply(const std::string& key, const std::string& value) {
        const auto to_long = [&](const std::string& v) {
            try {
                std::size_t used = 0;
                const long out = std::stol(v, &used);
                if (used != v.size()) throw ArgumentError("config: bad integer for " + key);
                return out;
            } catch (const std::logic_error&) {
                throw ArgumentError("config: bad integer for " + key);
            }
        };
        const auto to_double = [&](const std::string& v) {
            try {
                std::size_t used = 0;
                const double out = std::stod(v, &used);
                if (used != v.size()) throw ArgumentError("config: bad number for " + key);
                return out;
            } catch (const std::logic_error&) {
                throw ArgumentError("config: bad number for " + key);
            }
        };
        const auto to_bool = [&](const std::string& v) {
            if (v == "true") return true;
            if (v == "false") return false;
            throw ArgumentError("config: bad boolean for " + key);
        };

        if (key == "algo") algo = value;
        else if (key == "env") env = value;
        else if (key == "out_dir") out_dir = value;
        else if (key == "fixture") fixture = value;
        else if (key == "seed") train.seed = std::uint64_t(to_long(value));
        else if (key == "steps") train.steps = to_long(value);
        else if (key == "minibatch") train.minibatch = int(to_long(value));
        else if (key == "gamma") train.gamma = to_double(value);
        else if (key == "tau") train.tau = to_double(value);
        else if (key == "buffer") train.buffer_capacity = std::size_t(to_long(value));
        else if (key == "workers") train.workers = int(to_long(value));
        else if (key == "her_samples") train.her_samples = int(to_long(value));
        else if (key == "her") train.use_her = to_bool(value);
        else if (key == "lr") train.lr = to_double(value);
        else if (key == "actor_lr") train.actor_lr = to_double(value);
        else if (key == "hidden_layers") train.hidden_layers = int(to_long(value));
        else if (key == "hidden_width") train.hidden_width = int(to_long(value));
        else if (key == "loss") {
            if (value == "mse") train.loss = nn::LossKind::MeanSquaredError;
            else if (value == "smooth_l1") train.loss = nn::LossKind::SmoothL1;
            else throw ArgumentError("config: loss must be mse or smooth_l1");
        }
        else if (key == "epsilon_start") train.epsilon_start = to_double(value);
        else if (key == "epsilon_end") train.epsilon_end = to_double(value);
        else if (key == "epsilon_fraction") train.epsilon_fraction = to_double(value);
        else if (key == "warmup_minibatches") train.warmup_minibatches = int(to_long(value));
        else if (key == "eval_every") train.eval_every = to_long(value);
        else if (key == "eval_step") train.eval_step = to_double(value);
        else if (key == "key_eval_episodes") train.key_eval_episodes = to_long(value);
        else if (key == "parallel") train.parallel = to_bool(value);
        else if (key == "fixed_preference") {
            if (value.empty()) {
                train.fixed_preference.reset();
            } else {
                std::istringstream ss(value);
                std::vector<double> vals;
                std::string cell;
                while (std::getline(ss, cell, ',')) vals.push_back(to_double(cell));
                Eigen::VectorXd w(Eigen::Index(vals.size()));
                for (std::size_t j = 0; j < vals.size(); ++j) w(Eigen::Index(j)) = vals[j];
                train.fixed_preference = w;
            }
        }
        else if (key == "policy_delay") train.policy_delay = int(to_long(value));
        else if (key == "exploration_noise") train.exploration_noise = to_double(value);
        else if (key == "target_noise") train.target_noise = to_double(value);
        else if (key == "noise_clip") train.noise_clip = to_double(value);
        else if (key == "angle_coefficient") train.angle_coefficient = to_double(value);
        else throw ArgumentError("config: unknown key '" + key + "'");
    }

    static RunConfig parse(std::istream& is) {
        RunConfig c;
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto last = line.find_last_not_of(" \t\r");
            line = line.substr(first, last - first + 1);
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ArgumentError("config: bad section header at line " +
                                        std::to_string(lineno));
                const std::string section = line.substr(1, line.size() - 2);
                if (section != "run" && section != "train" && section != "td3")
                    throw ArgumentError("config: unknown section '" + section + "'");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ArgumentError("config: expected key = value at line " +
                                    std::to_string(lineno));
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t");
                if (a == std::string::npos) return std::string();
                const auto b = s.find_last_not_of(" \t");
                return s.substr(a, b - a + 1);
            };
            c.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        return c;
    }

    static RunConfig parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw IoError("config: cannot open '" + path + "'");
        return parse(is);
    }
};

} // namespace morl::io
