#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <vector>

#include "morl/errors.hpp"
#include "morl/rng.hpp"

namespace morl::pref {

using Vec = Eigen::VectorXd;

constexpr double kSimplexTol = 1e-9;

inline bool is_valid_preference(const Vec& w, double tol = kSimplexTol) {
    if (w.size() < 2) return false;
    if ((w.array() < -tol).any()) return false;
    return std::abs(w.sum() - 1.0) <= tol;
}

// Point on the preference simplex: nonnegative components summing to one.
class PreferenceVector {
public:
    PreferenceVector() = default;

    explicit PreferenceVector(Vec w) : w_(std::move(w)) {
        if (!is_valid_preference(w_))
            throw ArgumentError("preference: components must be >=0 and sum to 1");
    }

    static PreferenceVector of(std::initializer_list<double> vals) {
        Vec w(Eigen::Index(vals.size()));
        Eigen::Index i = 0;
        for (double v : vals) w(i++) = v;
        return PreferenceVector(std::move(w));
    }

    const Vec& vec() const { return w_; }
    Eigen::Index size() const { return w_.size(); }
    double operator[](Eigen::Index i) const { return w_(i); }

private:
    Vec w_;
};

// Repairs a vector that is a simplex point up to storage quantization (for
// example a preference round-tripped through 32-bit floats): clamps negative
// dust and rescales to unit sum.
inline PreferenceVector renormalized_preference(Vec w) {
    w = w.cwiseMax(0.0);
    const double sum = w.sum();
    if (!(sum > 0.0)) throw ArgumentError("preference: cannot renormalize a zero vector");
    return PreferenceVector(w / sum);
}

// Uniform sample via sorted-uniform spacings (equivalent to Dirichlet(1,..,1)).
inline PreferenceVector sample_uniform(int L, Rng& rng) {
    if (L < 2) throw ArgumentError("sample_uniform: need at least 2 objectives");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> cuts(std::size_t(L) - 1);
    for (auto& c : cuts) c = u(rng);
    std::sort(cuts.begin(), cuts.end());
    Vec w(L);
    double prev = 0.0;
    for (int i = 0; i + 1 < L; ++i) {
        w(i) = cuts[std::size_t(i)] - prev;
        prev = cuts[std::size_t(i)];
    }
    w(L - 1) = 1.0 - prev;
    w = w.cwiseMax(0.0);
    w /= w.sum();
    return PreferenceVector(std::move(w));
}

// One band of the simplex: the first component confined to an interval.
// Bands tile the simplex, so a worker per band covers the whole space.
struct PreferenceSubspace {
    int index = 0;
    int count = 1;
    int objectives = 2;
    double lo = 0.0;
    double hi = 1.0;
};

inline std::vector<PreferenceSubspace> partition(int L, int parts) {
    if (L < 2) throw ArgumentError("partition: need at least 2 objectives");
    if (parts < 1) throw ArgumentError("partition: need at least 1 sub-space");
    std::vector<PreferenceSubspace> out;
    out.reserve(std::size_t(parts));
    for (int k = 0; k < parts; ++k)
        out.push_back({k, parts, L, double(k) / parts, double(k + 1) / parts});
    return out;
}

inline PreferenceVector sample_from(const PreferenceSubspace& sub, Rng& rng) {
    if (sub.count == 1) return sample_uniform(sub.objectives, rng);
    std::uniform_real_distribution<double> u(sub.lo, sub.hi);
    const double first = u(rng);
    if (sub.objectives == 2) {
        Vec w(2);
        w << first, 1.0 - first;
        return PreferenceVector(std::move(w));
    }
    // Remaining mass spread uniformly over the lower-dimensional simplex.
    PreferenceVector rest = sample_uniform(sub.objectives - 1, rng);
    Vec w(sub.objectives);
    w(0) = first;
    w.tail(sub.objectives - 1) = (1.0 - first) * rest.vec();
    return PreferenceVector(std::move(w));
}

// All simplex lattice points with the given resolution, e.g. step 0.01 for
// L=2 yields the 101 vectors {0,1},{0.01,0.99},...,{1,0}.
inline std::vector<PreferenceVector> evaluation_grid(int L, double step) {
    if (L < 2) throw ArgumentError("evaluation_grid: need at least 2 objectives");
    if (step <= 0.0 || step > 1.0) throw ArgumentError("evaluation_grid: step must be in (0,1]");
    const double kf = 1.0 / step;
    const long k = std::lround(kf);
    if (k < 1 || std::abs(kf - double(k)) > 1e-9 * kf)
        throw ArgumentError("evaluation_grid: step must divide 1");

    std::vector<PreferenceVector> grid;
    std::vector<long> counts(std::size_t(L), 0);
    // Enumerate compositions of k into L nonnegative parts.
    const std::function<void(int, long)> rec = [&](int dim, long remaining) {
        if (dim == L - 1) {
            counts[std::size_t(dim)] = remaining;
            Vec w(L);
            for (int i = 0; i < L; ++i) w(i) = double(counts[std::size_t(i)]) / double(k);
            grid.emplace_back(std::move(w));
            return;
        }
        for (long c = remaining; c >= 0; --c) {
            counts[std::size_t(dim)] = c;
            rec(dim + 1, remaining - c);
        }
    };
    rec(0, k);
    return grid;
}

// Unit vector of a solution in objective space.
inline Vec normalize_solution(const Vec& f) {
    const double n = f.norm();
    if (!(n > 0.0)) throw ArgumentError("normalize_solution: zero-length solution");
    return f / n;
}

} // namespace morl::pref
