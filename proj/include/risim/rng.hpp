#pragma once

#include <cstdint>
#include <random>

namespace risim {

// All randomness in the simulator flows from explicit 64-bit seeds. Derived
// seeds are produced by hashing the master seed with small integer tags
// (bin index, shape index, episode index, ...) so that every sub-task owns an
// independent stream whose value does not depend on execution order.
inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t h = mix64(master + kGolden);
    h = mix64(h ^ (a + kGolden));
    h = mix64(h ^ (b + kGolden));
    h = mix64(h ^ (c + kGolden));
    return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace risim
