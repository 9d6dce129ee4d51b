#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "morl/env_dst.hpp" // StepResult
#include "morl/errors.hpp"
#include "morl/rng.hpp"

namespace morl::env {

// Full binary tree of depth d. Rewards live only on the 2^d leaves as
// six-component nutrition vectors; an episode is exactly d left/right moves.
struct FtnConfig {
    int depth = 5;
    std::vector<Vec> leaves; // 2^depth rows of 6 values
};

constexpr int kFtnObjectives = 6;

// Nonnegative unit-norm leaf rewards from a seeded generator.
inline FtnConfig generate_ftn_config(int depth, std::uint64_t seed) {
    if (depth < 1 || depth > 20) throw ArgumentError("ftn: depth out of range");
    FtnConfig cfg;
    cfg.depth = depth;
    Rng rng = make_rng(seed, 0x46544e); // "FTN" stream
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t n = std::size_t(1) << depth;
    cfg.leaves.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec leaf(kFtnObjectives);
        for (int j = 0; j < kFtnObjectives; ++j) leaf(j) = std::abs(gauss(rng));
        leaf /= leaf.norm();
        cfg.leaves.push_back(std::move(leaf));
    }
    return cfg;
}

// Default leaf tables shipped with the project; the fixture files under
// data/ are generated from these seeds.
inline FtnConfig builtin_ftn_config(int depth) {
    return generate_ftn_config(depth, 1000 + std::uint64_t(depth));
}

class FruitTree {
public:
    static constexpr int kActions = 2; // left, right

    explicit FruitTree(FtnConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.leaves.size() != (std::size_t(1) << cfg_.depth))
            throw ArgumentError("ftn: leaf table size must be 2^depth");
        for (const auto& l : cfg_.leaves) {
            if (l.size() != kFtnObjectives) throw ArgumentError("ftn: leaves must have 6 values");
            if ((l.array() < 0.0).any()) throw ArgumentError("ftn: leaf rewards must be >=0");
        }
    }

    int state_dim() const { return 2; } // (depth, index within level)
    int action_count() const { return kActions; }
    int objectives() const { return kFtnObjectives; }
    int depth() const { return cfg_.depth; }
    const FtnConfig& config() const { return cfg_; }

    Vec reset() {
        level_ = 0;
        index_ = 0;
        return state();
    }

    StepResult step(int action) {
        if (action != 0 && action != 1) throw ArgumentError("ftn: action must be 0 or 1");
        if (level_ >= cfg_.depth) throw StateError("ftn: episode already finished");
        index_ = index_ * 2 + action;
        ++level_;
        StepResult out;
        out.state = state();
        out.done = (level_ == cfg_.depth);
        out.reward = out.done ? cfg_.leaves[std::size_t(index_)] : Vec::Zero(kFtnObjectives);
        return out;
    }

private:
    Vec state() const {
        Vec s(2);
        s << double(level_), double(index_);
        return s;
    }

    FtnConfig cfg_;
    int level_ = 0;
    long index_ = 0;
};

// Fixture rows: one leaf per line, six whitespace-separated values.
inline FtnConfig load_ftn_fixture(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("ftn fixture: cannot open '" + path + "'");
    FtnConfig cfg;
    cfg.leaves.clear();
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (vals.empty()) continue;
        if (vals.size() != kFtnObjectives)
            throw IoError("ftn fixture: expected 6 values per leaf in '" + path + "'");
        Vec leaf(kFtnObjectives);
        for (int j = 0; j < kFtnObjectives; ++j) leaf(j) = vals[std::size_t(j)];
        cfg.leaves.push_back(std::move(leaf));
    }
    const std::size_t n = cfg.leaves.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw IoError("ftn fixture: leaf count must be a power of two");
    cfg.depth = int(std::lround(std::log2(double(n))));
    return cfg;
}

inline void save_ftn_fixture(const FtnConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("ftn fixture: cannot open '" + path + "' for writing");
    os << "# fruit tree leaf rewards, depth " << cfg.depth << "\n";
    os.precision(17);
    for (const auto& leaf : cfg.leaves) {
        for (int j = 0; j < kFtnObjectives; ++j)
            os << leaf(j) << (j + 1 == kFtnObjectives ? '\n' : ' ');
    }
}

} // namespace morl::env
