#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "morl/errors.hpp"
#include "morl/rng.hpp"
#include "morl/simplex.hpp"

namespace morl::replay {

// One stored experience. The action is an index for discrete control or a
// vector for continuous control; the unused representation stays empty.
template <class S>
struct Transition {
    Eigen::Matrix<S, Eigen::Dynamic, 1> state;
    int action_index = -1;
    Eigen::Matrix<S, Eigen::Dynamic, 1> action;
    Eigen::Matrix<S, Eigen::Dynamic, 1> reward;
    Eigen::Matrix<S, Eigen::Dynamic, 1> next_state;
    Eigen::Matrix<S, Eigen::Dynamic, 1> preference;
    bool done = false;
};

// Fixed-capacity FIFO ring with hindsight preference relabeling: each stored
// transition is duplicated under extra preferences drawn from the full
// simplex so under-visited preferences still receive learning signal.
template <class S>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw ArgumentError("replay: capacity must be positive");
        storage_.reserve(capacity_);
    }

    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }

    void store(const Transition<S>& t) {
        if (storage_.size() < capacity_) {
            storage_.push_back(t);
        } else {
            storage_[cursor_] = t;
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    void store_with_her(const Transition<S>& t, int n_extra, Rng& rng) {
        if (n_extra < 0) throw ArgumentError("replay: negative relabel count");
        store(t);
        const int L = int(t.preference.size());
        for (int i = 0; i < n_extra; ++i) {
            Transition<S> relabeled = t;
            relabeled.preference =
                pref::sample_uniform(L, rng).vec().template cast<S>();
            store(relabeled);
        }
    }

    // Uniform draws with replacement.
    std::vector<const Transition<S>*> sample_minibatch(std::size_t n, Rng& rng) const {
        if (storage_.size() < n) throw StateError("replay: buffer smaller than minibatch");
        std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
        std::vector<const Transition<S>*> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(&storage_[pick(rng)]);
        return out;
    }

    const Transition<S>& at(std::size_t i) const { return storage_[i]; }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition<S>> storage_;
};

} // namespace morl::replay
