#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "morl/errors.hpp"
#include "morl/simplex.hpp"

namespace morl::pref {

// Radial basis function interpolation with a linear kernel phi(r) = r,
// mapping preferences to the normalized solution space. Exact at every
// center: fit solves A w = T with A_ij = |c_i - c_j|.
//
// Projected outputs are floored per coordinate at min(0, lowest center
// target) so positive solution spaces stay nonnegative without breaking
// exactness when a solution coordinate is legitimately negative (e.g. a
// time-penalty objective), then renormalized to unit Euclidean length.
class RbfInterpolator {
public:
    RbfInterpolator() = default;

    static RbfInterpolator fit(const std::vector<PreferenceVector>& keys,
                               const std::vector<Vec>& key_solutions) {
        if (keys.empty() || keys.size() != key_solutions.size())
            throw ArgumentError("rbf: need matching key preferences and solutions");
        const Eigen::Index L = keys.front().size();
        if (Eigen::Index(keys.size()) < L + 1)
            throw ArgumentError("rbf: need at least L+1 centers");
        for (const auto& k : keys)
            if (k.size() != L) throw DimensionError("rbf: inconsistent key width");
        for (const auto& s : key_solutions) {
            if (s.size() != L) throw DimensionError("rbf: inconsistent solution width");
            if (std::abs(s.norm() - 1.0) > 1e-6)
                throw ArgumentError("rbf: key solutions must be normalized");
        }

        const Eigen::Index m = Eigen::Index(keys.size());
        Eigen::MatrixXd A(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                A(i, j) = (keys[std::size_t(i)].vec() - keys[std::size_t(j)].vec()).norm();
        Eigen::MatrixXd T(m, L);
        for (Eigen::Index i = 0; i < m; ++i) T.row(i) = key_solutions[std::size_t(i)].transpose();

        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) throw NumericError("rbf: singular interpolation system");

        RbfInterpolator out;
        out.centers_ = keys;
        out.targets_ = key_solutions;
        out.weights_ = lu.solve(T);
        out.floor_ = Vec::Zero(L);
        for (Eigen::Index j = 0; j < L; ++j) {
            double lo = 0.0;
            for (const auto& s : key_solutions) lo = std::min(lo, s(j));
            out.floor_(j) = lo;
        }
        return out;
    }

    Vec project(const PreferenceVector& w) const {
        if (centers_.empty()) throw StateError("rbf: interpolator not fitted");
        if (w.size() != dimension()) throw DimensionError("rbf: query width mismatch");
        Vec out = Vec::Zero(dimension());
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            const double r = (w.vec() - centers_[i].vec()).norm();
            out += r * weights_.row(Eigen::Index(i)).transpose();
        }
        out = out.cwiseMax(floor_);
        const double n = out.norm();
        if (!(n > 0.0)) throw NumericError("rbf: projected preference collapsed to zero");
        return out / n;
    }

    Eigen::Index dimension() const { return centers_.empty() ? 0 : centers_.front().size(); }
    const std::vector<PreferenceVector>& keys() const { return centers_; }
    const std::vector<Vec>& key_solutions() const { return targets_; }

    // Text table: key preference components then solution components per line.
    void save(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw IoError("rbf: cannot open '" + path + "' for writing");
        os << "# key preference | normalized key solution\n";
        os.precision(17);
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            for (Eigen::Index j = 0; j < dimension(); ++j) os << centers_[i].vec()(j) << ' ';
            for (Eigen::Index j = 0; j < dimension(); ++j)
                os << targets_[i](j) << (j + 1 == dimension() ? '\n' : ' ');
        }
        if (!os) throw IoError("rbf: write failed for '" + path + "'");
    }

    static RbfInterpolator load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw IoError("rbf: cannot open '" + path + "'");
        std::vector<PreferenceVector> keys;
        std::vector<Vec> sols;
        std::string line;
        while (std::getline(is, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ss(line);
            std::vector<double> vals;
            double v;
            while (ss >> v) vals.push_back(v);
            if (vals.empty()) continue;
            if (vals.size() % 2 != 0) throw IoError("rbf: malformed key table line");
            const Eigen::Index L = Eigen::Index(vals.size() / 2);
            Vec w(L), s(L);
            for (Eigen::Index j = 0; j < L; ++j) {
                w(j) = vals[std::size_t(j)];
                s(j) = vals[std::size_t(L + j)];
            }
            keys.emplace_back(std::move(w));
            sols.push_back(std::move(s));
        }
        return fit(keys, sols);
    }

private:
    std::vector<PreferenceVector> centers_;
    std::vector<Vec> targets_;
    Eigen::MatrixXd weights_; // m x L
    Vec floor_;
};

// The canonical key preference set: the L one-hot vectors plus the uniform
// vector (1/L, ..., 1/L).
inline std::vector<PreferenceVector> key_preference_set(int L) {
    if (L < 2) throw ArgumentError("key_preference_set: need at least 2 objectives");
    std::vector<PreferenceVector> keys;
    for (int i = 0; i < L; ++i) {
        Vec w = Vec::Zero(L);
        w(i) = 1.0;
        keys.emplace_back(std::move(w));
    }
    keys.emplace_back(Vec::Constant(L, 1.0 / L));
    return keys;
}

// Fallback when no key solutions are known yet: each key preference acts as
// its own pseudo-solution, making the projection near-identity until the
// first refit replaces it with observed returns.
inline RbfInterpolator identity_interpolator(int L) {
    auto keys = key_preference_set(L);
    std::vector<Vec> sols;
    sols.reserve(keys.size());
    for (const auto& k : keys) sols.push_back(normalize_solution(k.vec()));
    return RbfInterpolator::fit(keys, sols);
}

} // namespace morl::pref
