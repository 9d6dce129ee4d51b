#pragma once

#include <cstdint>
#include <random>

#if defined(__SSE2__)
#include <immintrin.h>
#endif

namespace morl {

// Long trainings decay Adam's moment buffers into the subnormal range, where
// x86 cores take large penalties. Values below ~1e-38 are meaningless next to
// the optimizer epsilon, so training threads flush them to zero.
inline void enable_flush_to_zero() {
#if defined(__SSE2__)
    _MM_SET_FLUSH_ZERO_MODE(_MM_FLUSH_ZERO_ON);
    _MM_SET_DENORMALS_ZERO_MODE(_MM_DENORMALS_ZERO_ON);
#endif
}

using Rng = std::mt19937_64;

// Derives an independent stream from a master seed. Used to give each
// explorer worker and the trainer their own generator so results do not
// depend on thread scheduling.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    const std::uint64_t material[3] = {seed, stream ^ 0x9e3779b97f4a7c15ull, stream};
    std::seed_seq seq(material, material + 3);
    return Rng(seq);
}

} // namespace morl
