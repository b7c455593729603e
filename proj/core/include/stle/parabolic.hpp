#pragma once

#include "stle/galerkin.hpp"

namespace stle {

/// Exact heat propagation: u_k(t) = e^{-nu |k|^2 t} u_k(0).
SpectralField heat_exact(const SpectralField& u0, double nu, double t);

enum class ParabolicScheme { etd1, etd2 };

/// Deterministic spectral solver for du/dt = nu Delta u + Pi_N(b . grad u)
/// with exponential time differencing: diffusion factors are exact per step,
/// only the transport term is discretized (etd2 adds the trapezoidal
/// corrector stage and is second order).
Trajectory solve_parabolic(const SpectralField& u0, const DriftSnapshots& b, double nu, double T,
                           double dt, int N, const std::vector<double>& output_times,
                           ParabolicScheme scheme = ParabolicScheme::etd2);

struct PicardReport {
    std::vector<double> iterate_distances;   // sup-t L2 gap between successive iterates
    std::vector<double> contraction_factors; // ratios of successive gaps
    double distance_to_solver = 0.0;         // sup-t L2 gap fixed point vs solve_parabolic
    bool contracted = false;                  // gaps decayed below tolerance
};

/// Picard iteration on the mild formulation
///   u(t) = P_t u0 + int_0^t P_{t-s} (b . grad u)(s) ds
/// with exact heat factors and composite-trapezoid quadrature in s on the
/// same time grid.  Divergent iterations are reported, not thrown.
PicardReport picard_mild_check(const SpectralField& u0, const DriftSnapshots& b, double nu,
                               double T, double dt, int N, int iterations);

}  // namespace stle
