#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace ammi {

// Shared probability clamp: every table probability passes through this
// before any log is taken.
inline constexpr double kProbEps = 1e-7;

inline double clamp_prob(double p) {
    return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits; stable across platforms.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

uint64_t fnv1a64(std::string_view data, uint64_t seed = 1469598103934665603ULL);

// Shortest round-trip decimal representation ("%.17g").
std::string fmt_g17(double v);

std::string hex_u64(uint64_t v);

}  // namespace ammi
