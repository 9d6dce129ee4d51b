#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <vector>

#include "morl/errors.hpp"
#include "morl/rng.hpp"

namespace morl::metrics {

using Vec = Eigen::VectorXd;
using PointSet = std::vector<Vec>;

// Maximization dominance: a >= b in every coordinate, > in at least one.
inline bool dominates(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("dominates: dimension mismatch");
    bool strict = false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) < b(i)) return false;
        if (a(i) > b(i)) strict = true;
    }
    return strict;
}

inline bool lex_less(const Vec& a, const Vec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) != b(i)) return a(i) < b(i);
    }
    return false;
}

// Maximal non-dominated subset with exact duplicates collapsed; output in
// lexicographic order so downstream artifacts are stable.
inline PointSet non_dominated_filter(const PointSet& points) {
    PointSet sorted = points;
    std::sort(sorted.begin(), sorted.end(), lex_less);
    sorted.erase(std::unique(sorted.begin(), sorted.end(),
                             [](const Vec& a, const Vec& b) { return a == b; }),
                 sorted.end());
    PointSet front;
    for (const auto& p : sorted) {
        bool dominated = false;
        for (const auto& q : sorted) {
            if (dominates(q, p)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) front.push_back(p);
    }
    return front;
}

// Drops only strictly dominated points, keeping duplicates and input order.
// Matches the solution-set convention where every evaluation sweep entry that
// sits on the front counts toward the sparsity divisor.
inline PointSet non_dominated_keep_duplicates(const PointSet& points) {
    PointSet out;
    for (const auto& p : points) {
        bool dominated = false;
        for (const auto& q : points) {
            if (dominates(q, p)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) out.push_back(p);
    }
    return out;
}

namespace detail {

inline PointSet clip_to_reference(const PointSet& points, const Vec& ref, bool warn) {
    PointSet kept;
    std::size_t clipped = 0;
    for (const auto& p : points) {
        if (p.size() != ref.size()) throw DimensionError("hypervolume: point/reference mismatch");
        if ((p.array() >= ref.array()).all())
            kept.push_back(p);
        else
            ++clipped;
    }
    if (clipped > 0 && warn)
        std::cerr << "hypervolume: clipped " << clipped
                  << " point(s) not dominating the reference point\n";
    return kept;
}

// Shared slab decomposition: points sorted descending in dimension `dim`,
// slabs between consecutive values down to ref(dim). The 2-D sweep and the
// recursive slicer both accumulate these terms in the same order so their
// results agree bitwise on two objectives.
inline void sort_desc_by_dim(PointSet& pts, Eigen::Index dim) {
    std::stable_sort(pts.begin(), pts.end(),
                     [dim](const Vec& a, const Vec& b) { return a(dim) > b(dim); });
}

inline double hv_recursive(PointSet pts, const Vec& ref, Eigen::Index dims) {
    if (pts.empty()) return 0.0;
    if (dims == 1) {
        double best = ref(0);
        for (const auto& p : pts) best = std::max(best, p(0));
        return best - ref(0);
    }
    const Eigen::Index d = dims - 1;
    sort_desc_by_dim(pts, d);
    double total = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double z = pts[k](d);
        const double z_next = (k + 1 < pts.size()) ? pts[k + 1](d) : ref(d);
        if (z <= z_next) continue;
        PointSet slab(pts.begin(), pts.begin() + long(k) + 1);
        total += (z - z_next) * hv_recursive(std::move(slab), ref, d);
    }
    return total;
}

} // namespace detail

// Exact hypervolume for two objectives: descending sweep over the second
// coordinate with a running maximum of the first.
inline double hypervolume_2d(const PointSet& front, const Vec& ref, bool warn = true) {
    if (ref.size() != 2) throw ArgumentError("hypervolume_2d: reference must be 2-D");
    PointSet pts = detail::clip_to_reference(front, ref, warn);
    if (pts.empty()) return 0.0;
    detail::sort_desc_by_dim(pts, 1);
    double total = 0.0;
    double xmax = ref(0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        xmax = std::max(xmax, pts[k](0));
        const double z = pts[k](1);
        const double z_next = (k + 1 < pts.size()) ? pts[k + 1](1) : ref(1);
        if (z <= z_next) continue;
        total += (z - z_next) * (xmax - ref(0));
    }
    return total;
}

// Lebesgue measure of the region dominated by the front and bounded below by
// the reference point. Exact sweep for L=2, recursive slicing for 3..6.
inline double hypervolume(const PointSet& front, const Vec& ref, bool warn = true) {
    const Eigen::Index L = ref.size();
    if (L < 2 || L > 6) throw ArgumentError("hypervolume: supported for 2..6 objectives");
    if (front.empty()) return 0.0;
    if (L == 2) return hypervolume_2d(front, ref, warn);
    PointSet pts = detail::clip_to_reference(front, ref, warn);
    return detail::hv_recursive(std::move(pts), ref, L);
}

// Recursive slicing entry point usable at any supported dimension, including
// L=2 where it must reproduce the exact sweep bit for bit.
inline double hypervolume_sliced(const PointSet& front, const Vec& ref, bool warn = true) {
    const Eigen::Index L = ref.size();
    if (L < 2 || L > 6) throw ArgumentError("hypervolume: supported for 2..6 objectives");
    PointSet pts = detail::clip_to_reference(front, ref, warn);
    return detail::hv_recursive(std::move(pts), ref, L);
}

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Monte-Carlo cross-check: box volume times dominated-sample fraction.
inline McEstimate hypervolume_mc(const PointSet& front, const Vec& ref, std::size_t samples,
                                 std::uint64_t seed) {
    if (samples == 0) throw ArgumentError("hypervolume_mc: need at least one sample");
    PointSet pts = detail::clip_to_reference(front, ref, false);
    if (pts.empty()) return {0.0, 0.0};

    Vec hi = pts.front();
    for (const auto& p : pts) hi = hi.cwiseMax(p);
    double box = 1.0;
    for (Eigen::Index i = 0; i < ref.size(); ++i) box *= hi(i) - ref(i);
    if (!(box > 0.0)) return {0.0, 0.0};

    Rng rng = make_rng(seed, 0x4d43); // "MC" stream
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec z(ref.size());
    std::size_t hits = 0;
    for (std::size_t n = 0; n < samples; ++n) {
        for (Eigen::Index i = 0; i < ref.size(); ++i) z(i) = ref(i) + u(rng) * (hi(i) - ref(i));
        for (const auto& p : pts) {
            if ((z.array() <= p.array()).all()) {
                ++hits;
                break;
            }
        }
    }
    const double frac = double(hits) / double(samples);
    return {box * frac, box * std::sqrt(frac * (1.0 - frac) / double(samples))};
}

// Mean squared gap between consecutive solutions, per objective (smaller is
// denser). Defined as 0 for sets smaller than two points.
inline double sparsity(const PointSet& points) {
    const std::size_t n = points.size();
    if (n <= 1) return 0.0;
    const Eigen::Index L = points.front().size();
    double total = 0.0;
    std::vector<double> col(n);
    for (Eigen::Index j = 0; j < L; ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = points[i](j);
        std::sort(col.begin(), col.end());
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double gap = col[i + 1] - col[i];
            total += gap * gap;
        }
    }
    return total / double(n - 1);
}

struct Crf1Result {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Coverage ratio F1: a solution b matches the front if some true point p has
// |b - p|_1 / |p|_1 <= eps. Candidate set is deduplicated before counting.
inline Crf1Result crf1(const PointSet& candidates, const PointSet& front, double eps) {
    if (front.empty()) throw ArgumentError("crf1: true front must be nonempty");
    PointSet b = candidates;
    std::sort(b.begin(), b.end(), lex_less);
    b.erase(std::unique(b.begin(), b.end(), [](const Vec& x, const Vec& y) { return x == y; }),
            b.end());
    if (b.empty()) return {0.0, 0.0, 0.0};

    std::size_t matched = 0;
    for (const auto& cand : b) {
        for (const auto& p : front) {
            const double denom = p.template lpNorm<1>();
            if (!(denom > 0.0)) continue;
            if ((cand - p).template lpNorm<1>() / denom <= eps) {
                ++matched;
                break;
            }
        }
    }
    Crf1Result r;
    r.precision = double(matched) / double(b.size());
    r.recall = double(matched) / double(front.size());
    r.f1 = (r.precision + r.recall > 0.0)
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

} // namespace morl::metrics
