#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "morl/errors.hpp"

namespace morl::env {

using Vec = Eigen::VectorXd;

struct StepResult {
    Vec state;
    Vec reward;
    bool done = false;
};

struct Treasure {
    int col = 0;
    int row = 0;
    double value = 0.0;
};

// Grid-world submarine hunt: two objectives (treasure value, time penalty).
// The sea floor sits at each column's treasure depth; moves into walls or
// below the floor leave the agent in place and still cost a time step.
struct DstConfig {
    int width = 10;  // columns
    int height = 11; // rows, row 0 is the surface
    std::vector<Treasure> treasures;
    double time_penalty = -1.0;
    int step_limit = 50;
};

// Layout mirroring the classic 10-treasure map: values grow with the
// shortest-path distance from the top-left start, deepest run is 19 steps.
inline DstConfig default_dst_config() {
    DstConfig cfg;
    cfg.treasures = {
        {0, 1, 0.7},  {1, 2, 8.2},  {2, 3, 11.5}, {3, 4, 14.0}, {4, 4, 15.1},
        {5, 4, 16.1}, {6, 7, 19.6}, {7, 7, 20.3}, {8, 9, 22.4}, {9, 10, 23.7},
    };
    return cfg;
}

class DeepSeaTreasure {
public:
    static constexpr int kActions = 4; // up, down, left, right
    static constexpr int kObjectives = 2;

    explicit DeepSeaTreasure(DstConfig cfg = default_dst_config()) : cfg_(std::move(cfg)) {
        validate();
    }

    int state_dim() const { return 2; }
    int action_count() const { return kActions; }
    int objectives() const { return kObjectives; }
    const DstConfig& config() const { return cfg_; }

    Vec reset() {
        row_ = 0;
        col_ = 0;
        steps_ = 0;
        return state();
    }

    // Pure transition; the step limit is layered on by step().
    StepResult transition(int row, int col, int action) const {
        if (action < 0 || action >= kActions)
            throw ArgumentError("dst: action must be in [0,4)");
        int nr = row, nc = col;
        switch (action) {
            case 0: --nr; break;
            case 1: ++nr; break;
            case 2: --nc; break;
            case 3: ++nc; break;
        }
        if (!valid_cell(nr, nc)) {
            nr = row;
            nc = col;
        }
        StepResult out;
        out.state = make_state(nr, nc);
        out.reward = Vec::Zero(2);
        out.reward(1) = cfg_.time_penalty;
        out.done = false;
        if (const Treasure* t = treasure_at(nr, nc)) {
            out.reward(0) = t->value;
            out.done = true;
        }
        return out;
    }

    StepResult step(int action) {
        StepResult out = transition(row_, col_, action);
        row_ = int(out.state(1));
        col_ = int(out.state(0));
        ++steps_;
        if (steps_ >= cfg_.step_limit) out.done = true;
        return out;
    }

    bool valid_cell(int row, int col) const {
        if (row < 0 || row >= cfg_.height || col < 0 || col >= cfg_.width) return false;
        return row <= floor_row(col);
    }

    int floor_row(int col) const {
        for (const auto& t : cfg_.treasures)
            if (t.col == col) return t.row;
        return cfg_.height - 1;
    }

    const Treasure* treasure_at(int row, int col) const {
        for (const auto& t : cfg_.treasures)
            if (t.row == row && t.col == col) return &t;
        return nullptr;
    }

    // Breadth-first shortest path lengths from the start to every treasure.
    std::vector<int> treasure_distances() const {
        std::vector<int> dist(std::size_t(cfg_.width * cfg_.height), -1);
        std::deque<std::pair<int, int>> queue;
        dist[0] = 0;
        queue.emplace_back(0, 0);
        while (!queue.empty()) {
            auto [r, c] = queue.front();
            queue.pop_front();
            if (treasure_at(r, c)) continue; // episodes end on treasure cells
            const int d = dist[std::size_t(r * cfg_.width + c)];
            const int nr[4] = {r - 1, r + 1, r, r};
            const int nc[4] = {c, c, c - 1, c + 1};
            for (int k = 0; k < 4; ++k) {
                if (!valid_cell(nr[k], nc[k])) continue;
                auto& slot = dist[std::size_t(nr[k] * cfg_.width + nc[k])];
                if (slot < 0) {
                    slot = d + 1;
                    queue.emplace_back(nr[k], nc[k]);
                }
            }
        }
        std::vector<int> out;
        out.reserve(cfg_.treasures.size());
        for (const auto& t : cfg_.treasures) out.push_back(dist[std::size_t(t.row * cfg_.width + t.col)]);
        return out;
    }

private:
    Vec make_state(int row, int col) const {
        Vec s(2);
        s << double(col), double(row);
        return s;
    }

    Vec state() const { return make_state(row_, col_); }

    void validate() const {
        if (cfg_.width <= 0 || cfg_.height <= 0) throw ArgumentError("dst: empty grid");
        if (cfg_.treasures.empty()) throw ArgumentError("dst: no treasures");
        for (const auto& t : cfg_.treasures)
            if (t.row < 0 || t.row >= cfg_.height || t.col < 0 || t.col >= cfg_.width)
                throw ArgumentError("dst: treasure outside the grid");
        auto dist = treasure_distances();
        std::vector<std::pair<int, double>> by_dist;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            if (dist[i] < 0) throw ArgumentError("dst: unreachable treasure");
            by_dist.emplace_back(dist[i], cfg_.treasures[i].value);
        }
        std::sort(by_dist.begin(), by_dist.end());
        for (std::size_t i = 0; i + 1 < by_dist.size(); ++i)
            if (by_dist[i + 1].second <= by_dist[i].second)
                throw ArgumentError("dst: treasure values must increase with path distance");
        if (cfg_.step_limit <= by_dist.back().first)
            throw ArgumentError("dst: step limit must exceed the longest optimal path");
    }

    DstConfig cfg_;
    int row_ = 0;
    int col_ = 0;
    int steps_ = 0;
};

// Fixture rows: column row value, '#' starts a comment.
inline DstConfig load_dst_fixture(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("dst fixture: cannot open '" + path + "'");
    DstConfig cfg;
    cfg.treasures.clear();
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        Treasure t;
        if (ss >> t.col >> t.row >> t.value) {
            double extra;
            if (ss >> extra) throw IoError("dst fixture: too many columns in '" + path + "'");
            cfg.treasures.push_back(t);
        } else {
            std::string word;
            std::istringstream check(line);
            if (check >> word) throw IoError("dst fixture: malformed line in '" + path + "'");
        }
    }
    if (cfg.treasures.empty()) throw IoError("dst fixture: no treasures in '" + path + "'");
    for (const auto& t : cfg.treasures) {
        cfg.width = std::max(cfg.width, t.col + 1);
        cfg.height = std::max(cfg.height, t.row + 1);
    }
    return cfg;
}

inline void save_dst_fixture(const DstConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("dst fixture: cannot open '" + path + "' for writing");
    os << "# deep sea treasure layout: column row value\n";
    for (const auto& t : cfg.treasures) os << t.col << ' ' << t.row << ' ' << t.value << '\n';
}

} // namespace morl::env
