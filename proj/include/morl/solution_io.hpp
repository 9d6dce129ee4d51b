#pragma once

#include <Eigen/Dense>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "morl/errors.hpp"
#include "morl/metrics.hpp"

namespace morl::io {

struct SolutionFile {
    metrics::PointSet points;
    std::optional<Eigen::VectorXd> reference;
};

// CSV with a comment header carrying the dimension and, when known, the
// reference point:
//   # L=2
//   # ref=0,-19
//   f0,f1
//   0.7,-1
inline void write_solutions(const std::string& path, const metrics::PointSet& points,
                            const std::optional<Eigen::VectorXd>& reference = std::nullopt) {
    if (points.empty() && !reference.has_value())
        throw ArgumentError("solutions: refusing to write an empty, dimensionless file");
    const Eigen::Index L = points.empty() ? reference->size() : points.front().size();
    std::ofstream os(path);
    if (!os) throw IoError("solutions: cannot open '" + path + "' for writing");
    os.precision(17);
    os << "# L=" << L << "\n";
    if (reference.has_value()) {
        os << "# ref=";
        for (Eigen::Index j = 0; j < L; ++j)
            os << (*reference)(j) << (j + 1 == L ? '\n' : ',');
    }
    for (Eigen::Index j = 0; j < L; ++j) os << 'f' << j << (j + 1 == L ? '\n' : ',');
    for (const auto& p : points) {
        if (p.size() != L) throw DimensionError("solutions: inconsistent point width");
        for (Eigen::Index j = 0; j < L; ++j) os << p(j) << (j + 1 == L ? '\n' : ',');
    }
    if (!os) throw IoError("solutions: write failed for '" + path + "'");
}

inline SolutionFile read_solutions(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("solutions: cannot open '" + path + "'");
    SolutionFile out;
    std::string line;
    Eigen::Index L = -1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (line.find("L=") != std::string::npos && eq != std::string::npos)
                L = std::stol(line.substr(eq + 1));
            else if (line.find("ref=") != std::string::npos && eq != std::string::npos) {
                std::istringstream ss(line.substr(eq + 1));
                std::vector<double> vals;
                std::string cell;
                while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
                Eigen::VectorXd ref(Eigen::Index(vals.size()));
                for (std::size_t j = 0; j < vals.size(); ++j) ref(Eigen::Index(j)) = vals[j];
                out.reference = ref;
            }
            continue;
        }
        if (line.find_first_of("0123456789+-.") != 0) continue; // column header
        std::istringstream ss(line);
        std::vector<double> vals;
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw IoError("solutions: malformed number '" + cell + "' in '" + path + "'");
            }
            if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos)
                throw IoError("solutions: malformed number '" + cell + "' in '" + path + "'");
            vals.push_back(v);
        }
        if (L >= 0 && Eigen::Index(vals.size()) != L)
            throw IoError("solutions: row width mismatch in '" + path + "'");
        Eigen::VectorXd p(Eigen::Index(vals.size()));
        for (std::size_t j = 0; j < vals.size(); ++j) p(Eigen::Index(j)) = vals[j];
        out.points.push_back(std::move(p));
    }
    if (out.points.empty() && !out.reference.has_value())
        throw IoError("solutions: no data in '" + path + "'");
    return out;
}

} // namespace morl::io
