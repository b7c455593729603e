#include "stle/lattice.hpp"

namespace stle {

std::vector<Mode> modes_in_ball(int dim, int radius, bool include_zero) {
    if (dim < 1 || dim > 3) throw ContractError("modes_in_ball: dim must be in {1,2,3}");
    if (radius < 0) throw ContractError("modes_in_ball: negative radius");
    const long r2 = static_cast<long>(radius) * radius;
    std::vector<Mode> out;
    const int lo1 = dim >= 2 ? -radius : 0, hi1 = dim >= 2 ? radius : 0;
    const int lo2 = dim >= 3 ? -radius : 0, hi2 = dim >= 3 ? radius : 0;
    for (int k0 = -radius; k0 <= radius; ++k0)
        for (int k1 = lo1; k1 <= hi1; ++k1)
            for (int k2 = lo2; k2 <= hi2; ++k2) {
                Mode k = {k0, k1, k2};
                if (norm2(k) > r2) continue;
                if (is_zero(k) && !include_zero) continue;
                out.push_back(k);
            }
    return out;  // loop order is already lexicographic
}

Mat3 leray_matrix(const Mode& k, int dim) {
    Mat3 p{};
    if (is_zero(k)) return p;  // P_0 = 0 by convention
    const double kk = static_cast<double>(norm2(k));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            p[i][j] = (i == j ? 1.0 : 0.0) - static_cast<double>(k[i]) * k[j] / kk;
    return p;
}

std::vector<Vec3> basis_kperp(const Mode& k, int dim) {
    if (is_zero(k)) throw ContractError("basis_kperp: k = 0 has no perpendicular basis");
    if (dim < 2 || dim > 3)
        throw ContractError("basis_kperp: defined for d in {2,3} only");
    const Mode r = half_lattice_rep(k);
    const double len = std::sqrt(static_cast<double>(norm2(r)));

    if (dim == 2) {
        return {Vec3{-r[1] / len, r[0] / len, 0.0}};
    }

    Vec3 khat = {r[0] / len, r[1] / len, r[2] / len};
    int seed = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(r[i]) < std::abs(r[seed])) seed = i;  // ties keep lowest index
    Vec3 e{};
    e[seed] = 1.0;
    const double proj = dot(e, khat);
    Vec3 a1 = {e[0] - proj * khat[0], e[1] - proj * khat[1], e[2] - proj * khat[2]};
    const double n1 = norm(a1);
    a1 = {a1[0] / n1, a1[1] / n1, a1[2] / n1};
    Vec3 a2 = cross(khat, a1);
    return {a1, a2};
}

}  // namespace stle
