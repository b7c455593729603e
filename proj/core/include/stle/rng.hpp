#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace stle {

// Counter-based random streams.  Every Gaussian draw is keyed by
// (master seed, path, step, slot), so ensembles are reproducible and
// independent of execution order: workers never share generator state.

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct StreamKey {
    std::uint64_t master = 0;
    std::uint64_t path = 0;

    std::uint64_t word(std::uint64_t step, std::uint64_t slot, std::uint64_t salt) const {
        std::uint64_t h = mix64(master);
        h = mix64(h ^ path);
        h = mix64(h ^ step);
        h = mix64(h ^ slot);
        return mix64(h ^ salt);
    }
};

inline double uniform01(std::uint64_t bits) {
    // 53 random bits mapped to (0,1]; never returns 0 so log() is safe.
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Two independent N(0,1) draws (Box-Muller) for a given (step, slot).
inline void gauss_pair(const StreamKey& key, std::uint64_t step, std::uint64_t slot, double& g0,
                       double& g1) {
    const double u1 = uniform01(key.word(step, slot, 0x243f6a8885a308d3ULL));
    const double u2 = uniform01(key.word(step, slot, 0x13198a2e03707344ULL));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    g0 = r * std::cos(a);
    g1 = r * std::sin(a);
}

/// Standard complex Gaussian increment with Re, Im ~ N(0, dt) independent.
inline std::complex<double> complex_increment(const StreamKey& key, std::uint64_t step,
                                              std::uint64_t slot, double dt) {
    double g0, g1;
    gauss_pair(key, step, slot, g0, g1);
    const double sd = std::sqrt(dt);
    return {sd * g0, sd * g1};
}

/// Real Gaussian increment ~ N(0, dt) (used by the d = 1 noise).
inline double real_increment(const StreamKey& key, std::uint64_t step, std::uint64_t slot,
                             double dt) {
    double g0, g1;
    gauss_pair(key, step, slot, g0, g1);
    (void)g1;
    return std::sqrt(dt) * g0;
}

}  // namespace stle
