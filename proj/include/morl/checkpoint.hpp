#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "morl/errors.hpp"
#include "morl/nn.hpp"

// Versioned network checkpoint:
//   magic "MRLC", u32 version, u32 layer count,
//   per layer: u32 in width, u32 out width, u8 activation tag,
//   then per layer the weight matrix row-major and the bias vector,
//   all as little-endian IEEE-754 64-bit floats.

namespace morl::nn {

namespace detail {

constexpr char kMagic[4] = {'M', 'R', 'L', 'C'};
constexpr std::uint32_t kVersion = 1;

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

inline void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace detail

template <class S>
inline void save_network(const DenseNetwork<S>& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");
    os.write(detail::kMagic, 4);
    detail::put_u32(os, detail::kVersion);
    detail::put_u32(os, std::uint32_t(net.layer_count()));
    for (const auto& l : net.layers()) {
        detail::put_u32(os, std::uint32_t(l.in_width()));
        detail::put_u32(os, std::uint32_t(l.out_width()));
        os.put(char(static_cast<std::uint8_t>(l.act)));
    }
    for (const auto& l : net.layers()) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
                detail::put_f64(os, double(l.weight(r, c)));
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) detail::put_f64(os, double(l.bias(r)));
    }
    if (!os) throw IoError("checkpoint: write failed for '" + path + "'");
}

template <class S>
inline DenseNetwork<S> load_network(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("checkpoint: cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, detail::kMagic, 4) != 0)
        throw IoError("checkpoint: bad magic in '" + path + "'");
    const std::uint32_t version = detail::get_u32(is);
    if (version != detail::kVersion)
        throw IoError("checkpoint: unsupported format version " + std::to_string(version));
    const std::uint32_t n_layers = detail::get_u32(is);
    if (n_layers == 0 || n_layers > 1024) throw IoError("checkpoint: implausible layer count");

    std::vector<Eigen::Index> widths;
    std::vector<Activation> acts;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        const std::uint32_t in = detail::get_u32(is);
        const std::uint32_t out = detail::get_u32(is);
        const int act = is.get();
        if (!is || act < 0 || act > 2) throw IoError("checkpoint: corrupt layer header");
        if (i == 0)
            widths.push_back(in);
        else if (widths.back() != Eigen::Index(in))
            throw IoError("checkpoint: inconsistent layer widths");
        widths.push_back(out);
        acts.push_back(static_cast<Activation>(act));
    }

    DenseNetwork<S> net(widths, acts);
    for (auto& l : net.layers()) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
                l.weight(r, c) = S(detail::get_f64(is));
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = S(detail::get_f64(is));
    }
    if (!is) throw IoError("checkpoint: truncated file '" + path + "'");
    return net;
}

} // namespace morl::nn
