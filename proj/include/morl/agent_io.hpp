#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "morl/agent_ddqn.hpp"
#include "morl/agent_td3.hpp"
#include "morl/checkpoint.hpp"
#include "morl/errors.hpp"
#include "morl/train.hpp"

namespace morl::agents {

// A checkpoint is a directory: a manifest with run identity, the network
// files in the binary format, and the key-solution table for the projection.
struct Manifest {
    std::map<std::string, std::string> fields;

    const std::string& get(const std::string& key) const {
        const auto it = fields.find(key);
        if (it == fields.end()) throw IoError("manifest: missing field '" + key + "'");
        return it->second;
    }

    long get_long(const std::string& key) const { return std::stol(get(key)); }
    double get_double(const std::string& key) const { return std::stod(get(key)); }
};

inline void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
    std::ofstream os(dir / "manifest.txt");
    if (!os) throw IoError("manifest: cannot write in '" + dir.string() + "'");
    for (const auto& [k, v] : m.fields) os << k << " = " << v << "\n";
}

inline Manifest read_manifest(const std::filesystem::path& dir) {
    std::ifstream is(dir / "manifest.txt");
    if (!is) throw IoError("manifest: cannot open '" + (dir / "manifest.txt").string() + "'");
    Manifest m;
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        m.fields[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return m;
}

template <class S>
void save_checkpoint(const std::string& dir_path, const DdqnAgent<S>& agent,
                     const AlignmentState& align, Manifest manifest) {
    const std::filesystem::path dir(dir_path);
    std::filesystem::create_directories(dir);
    manifest.fields["format"] = "1";
    manifest.fields["algo"] = "ddqn";
    manifest.fields["state_dim"] = std::to_string(agent.state_dim());
    manifest.fields["actions"] = std::to_string(agent.action_count());
    manifest.fields["objectives"] = std::to_string(agent.objectives());
    nn::save_network(agent.online(), (dir / "qnet.mrlc").string());
    nn::save_network(agent.target(), (dir / "qtarget.mrlc").string());
    align.interpolator.save((dir / "keys.txt").string());
    write_manifest(dir, manifest);
}

template <class S>
void save_checkpoint(const std::string& dir_path, const Td3Agent<S>& agent,
                     const AlignmentState& align, Manifest manifest) {
    const std::filesystem::path dir(dir_path);
    std::filesystem::create_directories(dir);
    manifest.fields["format"] = "1";
    manifest.fields["algo"] = "td3";
    manifest.fields["state_dim"] = std::to_string(agent.state_dim());
    manifest.fields["action_dim"] = std::to_string(agent.action_dim());
    manifest.fields["objectives"] = std::to_string(agent.objectives());
    manifest.fields["action_bound"] = std::to_string(agent.action_bound());
    nn::save_network(agent.actor(), (dir / "actor.mrlc").string());
    nn::save_network(agent.actor_target(), (dir / "actor_target.mrlc").string());
    nn::save_network(agent.critic(0), (dir / "critic1.mrlc").string());
    nn::save_network(agent.critic_target(0), (dir / "critic1_target.mrlc").string());
    nn::save_network(agent.critic(1), (dir / "critic2.mrlc").string());
    nn::save_network(agent.critic_target(1), (dir / "critic2_target.mrlc").string());
    align.interpolator.save((dir / "keys.txt").string());
    write_manifest(dir, manifest);
}

template <class S>
struct LoadedDdqn {
    DdqnAgent<S> agent;
    AlignmentState align;
    Manifest manifest;
};

template <class S>
LoadedDdqn<S> load_ddqn_checkpoint(const std::string& dir_path, const TrainConfig& cfg) {
    const std::filesystem::path dir(dir_path);
    Manifest m = read_manifest(dir);
    if (m.get("algo") != "ddqn") throw IoError("checkpoint: not a ddqn checkpoint");
    auto online = nn::load_network<S>((dir / "qnet.mrlc").string());
    auto target = nn::load_network<S>((dir / "qtarget.mrlc").string());
    AlignmentState align;
    align.interpolator = pref::RbfInterpolator::load((dir / "keys.txt").string());
    align.keys = align.interpolator.keys();
    align.raw_solutions.assign(align.keys.size(), std::nullopt);
    DdqnAgent<S> agent(std::move(online), std::move(target), int(m.get_long("actions")),
                       int(m.get_long("objectives")), cfg);
    return {std::move(agent), std::move(align), std::move(m)};
}

template <class S>
struct LoadedTd3 {
    Td3Agent<S> agent;
    AlignmentState align;
    Manifest manifest;
};

template <class S>
LoadedTd3<S> load_td3_checkpoint(const std::string& dir_path, const TrainConfig& cfg) {
    const std::filesystem::path dir(dir_path);
    Manifest m = read_manifest(dir);
    if (m.get("algo") != "td3") throw IoError("checkpoint: not a td3 checkpoint");
    auto actor = nn::load_network<S>((dir / "actor.mrlc").string());
    auto actor_t = nn::load_network<S>((dir / "actor_target.mrlc").string());
    auto c1 = nn::load_network<S>((dir / "critic1.mrlc").string());
    auto c1t = nn::load_network<S>((dir / "critic1_target.mrlc").string());
    auto c2 = nn::load_network<S>((dir / "critic2.mrlc").string());
    auto c2t = nn::load_network<S>((dir / "critic2_target.mrlc").string());
    AlignmentState align;
    align.interpolator = pref::RbfInterpolator::load((dir / "keys.txt").string());
    align.keys = align.interpolator.keys();
    align.raw_solutions.assign(align.keys.size(), std::nullopt);
    Td3Agent<S> agent(std::move(actor), std::move(actor_t), std::move(c1), std::move(c1t),
                      std::move(c2), std::move(c2t), int(m.get_long("action_dim")),
                      int(m.get_long("objectives")), m.get_double("action_bound"), cfg);
    return {std::move(agent), std::move(align), std::move(m)};
}

} // namespace morl::agents
