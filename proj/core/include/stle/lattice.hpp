#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stle/errors.hpp"

namespace stle {

// Lattice modes live in Z^d, d <= 3; unused trailing components stay zero so a
// single Mode type serves every dimension.
using Mode = std::array<int, 3>;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mode mode(int k0, int k1 = 0, int k2 = 0) { return {k0, k1, k2}; }

inline Mode negate(const Mode& k) { return {-k[0], -k[1], -k[2]}; }

inline long norm2(const Mode& k) {
    return static_cast<long>(k[0]) * k[0] + static_cast<long>(k[1]) * k[1] +
           static_cast<long>(k[2]) * k[2];
}

inline bool is_zero(const Mode& k) { return k[0] == 0 && k[1] == 0 && k[2] == 0; }

inline Mode add(const Mode& a, const Mode& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Mode sub(const Mode& a, const Mode& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

// Lambda = { k != 0 : first nonzero component positive }.  Lambda and -Lambda
// partition the nonzero modes; all conventions that need one representative
// per +/- pair (bases, Brownian pairing) use this set.
inline bool in_half_lattice(const Mode& k) {
    for (int i = 0; i < 3; ++i) {
        if (k[i] > 0) return true;
        if (k[i] < 0) return false;
    }
    return false;  // zero mode is in neither half
}

inline Mode half_lattice_rep(const Mode& k) { return in_half_lattice(k) ? k : negate(k); }

/// Orbit label under the lattice isometry group (coordinate swaps and sign
/// reflections): component magnitudes sorted ascending.
inline Mode canonical_form(const Mode& k, int dim) {
    Mode c = {0, 0, 0};
    for (int i = 0; i < dim; ++i) c[i] = std::abs(k[i]);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            if (c[j] < c[i]) std::swap(c[i], c[j]);
    return c;
}

/// Compact 64-bit key for hash tables; components limited to |k_i| < 2^20.
inline std::uint64_t encode(const Mode& k) {
    constexpr std::uint64_t off = 1u << 20;
    return ((static_cast<std::uint64_t>(k[0] + off)) << 42) |
           ((static_cast<std::uint64_t>(k[1] + off)) << 21) |
           (static_cast<std::uint64_t>(k[2] + off));
}

/// All modes with |k| <= radius, lexicographically sorted (deterministic).
std::vector<Mode> modes_in_ball(int dim, int radius, bool include_zero);

// --- small real vector helpers (for k-perp bases and projector checks) ---

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double dot(const Vec3& a, const Mode& k) { return a[0] * k[0] + a[1] * k[1] + a[2] * k[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Mode-wise Leray projector P_k = I - (k/|k|) (x) (k/|k|); P_0 = 0.
Mat3 leray_matrix(const Mode& k, int dim);

/// Deterministic orthonormal basis {a_k^(1), ..., a_k^(d-1)} of k-perp.
///
/// Computed for the half-lattice representative so that a_{-k} = a_k holds by
/// construction.  d = 2: rotate the representative by 90 degrees.  d = 3:
/// Gram-Schmidt seeded with the canonical axis e_i minimising |k . e_i| (ties
/// broken by lowest index), second vector k x a1.
std::vector<Vec3> basis_kperp(const Mode& k, int dim);

}  // namespace stle
