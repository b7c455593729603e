#pragma once

#include <functional>
#include <unordered_map>

#include "stle/noise.hpp"
#include "stle/spectral_field.hpp"

namespace stle {

enum class Scheme { euler_maruyama, heun_stratonovich };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& s);

/// Drift snapshots: b(t) is piecewise constant, b(t) = field of the last
/// snapshot with time <= t.  An empty list means b = 0.
using DriftSnapshots = std::vector<std::pair<double, SpectralField>>;

struct SdeRunConfig {
    int dim = 2;
    int cutoff = 0;           // Galerkin cutoff N
    NoiseSpectrum spectrum;
    double epsilon = 0.0;     // noise intensity scale, >= 0
    DriftSnapshots drift;
    bool drift_divergence_free = false;  // when set, b is checked mode-wise
    double T = 0.0;
    double dt = 0.0;
    Scheme scheme = Scheme::euler_maruyama;
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    std::vector<double> output_times;  // snapped to the step grid
    bool test_zero_noise = false;      // test hook: skip the martingale term
    // Increments for one step are sampled as `noise_substeps` sub-increments
    // on the dt/noise_substeps grid and summed, so runs at different dt share
    // one Brownian path in refinement studies.
    int noise_substeps = 1;

    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> energy;           // |u(t)|_{L^2}^2 at output times
    std::vector<SpectralField> fields;
};

/// Pi_N(b . grad u) + eps c Delta u: mode k gets (conv)_k - eps c |k|^2 u_k.
SpectralField drift_rhs(const SpectralField& u, const SpectralField* b,
                        const NoiseSpectrum& spectrum, double eps, int N);

/// Martingale increment: mode k receives
///   i sqrt(eps) sum_{j,l} theta_{k-l} (a_{k-l}^(j) . k) u_l dW^(j)_{k-l},
/// truncated to |k| <= N.  Output is Hermitian-symmetric by construction.
SpectralField noise_apply(const SpectralField& u, const NoiseSpectrum& spectrum, double eps,
                          const NoiseIncrements& incr, int N);

/// Time-stepped Galerkin system in Ito form (euler_maruyama) or as a
/// predictor-corrector on the Stratonovich form with the corrector term
/// excluded (heun_stratonovich).  A compiled engine holds flat mode tables
/// and precomputed interaction plans; construction is pure, `run` is
/// reentrant, so one engine can serve many paths in parallel.
class GalerkinEngine {
  public:
    explicit GalerkinEngine(const SdeRunConfig& config, const SpectralField& u0);

    const SdeRunConfig& config() const { return config_; }
    long n_steps() const { return n_steps_; }
    const std::vector<long>& output_steps() const { return output_steps_; }
    const std::vector<Mode>& modes() const { return modes_; }

    /// Called at every output time with the flat coefficient vector.
    using Observer = std::function<void(int output_index, double t, const std::vector<Complex>&)>;

    void run_path(std::uint64_t path_id, const Observer& observe) const;
    Trajectory run(std::uint64_t path_id) const;

    double energy_of(const std::vector<Complex>& state) const;
    Complex coeff_of(const std::vector<Complex>& state, const Mode& k) const;
    SpectralField to_field(const std::vector<Complex>& state) const;
    /// Pairing <u, phi> against a Hermitian test function (real by symmetry).
    double pairing(const std::vector<Complex>& state, const SpectralField& phi) const;

  private:
    struct NoiseTerm {
        int out;
        int l_minus;  // index of k - m, or -1
        int l_plus;   // index of k + m, or -1
        int slot;     // rep-major, j-minor increment slot
        double coeff; // theta_m (a_m^(j) . k)
    };
    struct TransportTerm {
        int out;
        int in;
        Complex coeff;  // i (b_{k-l} . l)
    };

    void apply_noise(const std::vector<Complex>& u, const NoiseIncrements& incr,
                     std::vector<Complex>& out) const;
    void apply_transport(const std::vector<Complex>& u, int snapshot,
                         std::vector<Complex>& out) const;
    int snapshot_at(double t) const;

    SdeRunConfig config_;
    std::vector<Complex> u0_;
    std::vector<Mode> modes_;
    std::unordered_map<std::uint64_t, int> index_;
    std::vector<int> mirror_;
    std::vector<double> k2_;
    std::vector<NoiseTerm> noise_plan_;
    std::vector<std::vector<TransportTerm>> transport_plans_;  // one per drift snapshot
    std::vector<double> snapshot_times_;
    double sqrt_eps_ = 0.0;
    double eps_c_ = 0.0;
    long n_steps_ = 0;
    std::vector<long> output_steps_;
};

/// Simulates one path and records snapshots at the configured output times.
/// Deterministic in (config.seed, config.path_id).
Trajectory simulate_path(const SdeRunConfig& config, const SpectralField& u0);

struct EnergyInequalityReport {
    double slack = 0.0;        // max_t e^{-1/2 int ||div b||_inf} |u(t)| - |u(0)|
    double tolerance = 0.0;
    bool pass = false;
    std::vector<double> weighted_norms;
};

/// Discrete check of the energy inequality
///   sup_t e^{-1/2 int_0^t ||div b(s)||_inf ds} |u(t)|_{L^2} <= |u_0|_{L^2}.
EnergyInequalityReport energy_inequality_check(const Trajectory& traj, const DriftSnapshots& b,
                                               double tol);

}  // namespace stle
