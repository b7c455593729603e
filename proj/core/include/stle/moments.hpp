#pragma once

#include <Eigen/Dense>

#include "stle/galerkin.hpp"

namespace stle {

/// Generator of the closed evolution of x_k = E|u_k|^2 for b = 0:
///   dx_k/dt = q_kk x_k + sum_{l != k} q_kl x_l,
///   q_kl = 2 eps theta_{k-l}^2 |P_{k-l} k|^2  (k != l),
///   q_kk = -2 eps c |k|^2.
/// Modes beyond |k| <= K are dropped (absorbing truncation); the discarded
/// flux is measurable through the column-sum defect.
struct QMatrix {
    int dim = 0;
    int K = 0;
    double epsilon = 0.0;
    std::vector<Mode> modes;        // all k in Z^d_0 with |k| <= K, sorted
    Eigen::MatrixXd q;              // row convention: dx/dt = q x
    std::vector<int> interior;      // indices with |k| <= K - support radius
    std::string warning;            // set when no interior modes exist

    int index_of(const Mode& k) const;
};

QMatrix build_q_matrix(const NoiseSpectrum& spectrum, double eps, int K);

struct MomentTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> x;
    std::vector<double> boundary_outflux;  // cumulative energy lost to |k| > K
};

/// Classical fixed-step RK4 on dx/dt = Q x; requires dt max|q_kk| <= 0.5.
/// Components dipping below -1e-10 abort (integrator misconfiguration).
MomentTrajectory integrate_moments(const QMatrix& q, const Eigen::VectorXd& x0, double T,
                                   double dt, const std::vector<double>& output_times);

struct StationarityReport {
    double interior_residual_of_ones = 0.0;  // max_k interior |(Q 1)_k|
    double smallest_singular_value = 0.0;    // of the truncated generator
    bool constant_vector_stationary_on_interior = false;
    bool truncated_kernel_trivial = false;
    std::string note;
};

/// The computational shadow of "the only L^2 invariant measure is delta_0":
/// constants annihilate interior rows (they are not summable on the infinite
/// lattice), and the truncated generator has trivial kernel.
StationarityReport stationarity_check(const QMatrix& q);

struct MomentComparisonRow {
    Mode k;
    double t = 0.0;
    double mc_mean = 0.0;
    double mc_stderr = 0.0;
    double ode_value = 0.0;
    double z = 0.0;
    bool interior = false;
};

struct MomentComparison {
    std::vector<MomentComparisonRow> rows;
    double max_interior_abs_z = 0.0;
    double total_energy_mc = 0.0;      // empirical E|u(T)|^2
    double total_energy_mc_stderr = 0.0;
    double total_energy_ode = 0.0;
    int paths = 0;
};

/// Runs M independent Galerkin paths (b = 0) and compares empirical E|u_k|^2
/// per half-lattice representative against the RK4 moment oracle with K equal
/// to the Galerkin cutoff, where the two systems coincide exactly.
MomentComparison moments_vs_montecarlo(const SdeRunConfig& config, const SpectralField& u0,
                                       int m_paths, const std::vector<double>& checkpoints,
                                       int threads = 0);

}  // namespace stle
