#pragma once

#include <map>

#include "stle/galerkin.hpp"

namespace stle {

/// Coefficients in the real Fourier basis on the circle:
///   e_k = sqrt(2) cos(kx) for k > 0,  e_0 = 1,  e_k = sqrt(2) sin(kx) for k < 0.
/// No symmetry constraint; the basis is real and orthonormal, and
/// e_k' = k e_{-k} uniformly.
struct RealField1D {
    std::map<int, double> c;

    double at(int k) const {
        auto it = c.find(k);
        return it == c.end() ? 0.0 : it->second;
    }
    void set(int k, double v) {
        if (v == 0.0)
            c.erase(k);
        else
            c[k] = v;
    }
    void add(int k, double v) { set(k, at(k) + v); }
    double energy() const;
    int radius() const;  // max |k| over the support
};

/// Expansion of e_a * e_b in the real basis (product-to-sum identities).
std::vector<std::pair<int, double>> basis_product_1d(int a, int b);

RealField1D derivative_1d(const RealField1D& u);
RealField1D multiply_1d(const RealField1D& b, const RealField1D& u, int cutoff);

/// Pointwise evaluation (test oracle and diagnostics).
double evaluate_1d(const RealField1D& u, double x);

/// Noise shape sigma_k = lambda_k e_k with lambda_k = lambda_{-k}, lambda_0 = 0.
struct Spectrum1D {
    std::map<int, double> lambda;
    double sum_sq = 0.0;     // sum lambda_k^2
    double sum_k2 = 0.0;     // sum k^2 lambda_k^2
    double sup_k2 = 0.0;     // sup_k k^2 lambda_k^2
    std::vector<int> support;  // sorted, both signs

    double lambda_at(int k) const {
        auto it = lambda.find(k);
        return it == lambda.end() ? 0.0 : it->second;
    }
    /// sup k^2 lambda^2 / sum k^2 lambda^2 — the d=1 roughness ratio.
    double concentration_ratio() const { return sup_k2 / sum_k2; }
};

Spectrum1D build_spectrum_1d(const std::map<int, double>& lambda);
/// lambda = 1 on 0 < |k| <= n.
Spectrum1D shell_spectrum_1d(int n);

/// M_k u = lambda_k (2 e_k u' + e_k' u), expanded in the real basis and
/// truncated to |k| <= cutoff.
RealField1D apply_Mk(const RealField1D& u, int k, double lambda_k, int cutoff);

/// Ito corrector of sum_k M_k: friction = 1/2 sum k^2 lambda^2 (zero order),
/// diffusion = 2 sum lambda^2 (coefficient of u_xx); used as
/// -friction u + diffusion u_xx.
std::pair<double, double> ito_corrector_1d(const Spectrum1D& s);

/// epsilon = 2 nu / sum k^2 lambda^2, so that epsilon * friction = nu.
double epsilon_1d(const Spectrum1D& s, double nu);

struct Config1D {
    int cutoff = 0;
    Spectrum1D spectrum;
    double epsilon = 0.0;
    RealField1D drift_b;  // constant in time
    double T = 0.0;
    double dt = 0.0;
    Scheme scheme = Scheme::euler_maruyama;
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    std::vector<double> output_times;
    bool test_zero_noise = false;
    int noise_substeps = 1;  // shared-Brownian-path refinement, as in d >= 2

    void validate() const;
};

struct Trajectory1D {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<RealField1D> fields;
};

/// Euler-Maruyama on
///   du = b u_x dt + eps(-friction u + diffusion u_xx) dt + sqrt(eps) sum M_k u dW_k
/// or Heun on the Stratonovich form (no corrector terms stepped).
/// The W_k are independent real Brownian motions, one per support index.
class Engine1D {
  public:
    Engine1D(const Config1D& config, const RealField1D& u0);

    using Observer = std::function<void(int output_index, double t, const std::vector<double>&)>;
    void run_path(std::uint64_t path_id, const Observer& observe) const;
    Trajectory1D run(std::uint64_t path_id) const;

    const Config1D& config() const { return config_; }
    const std::vector<long>& output_steps() const { return output_steps_; }
    double coeff_of(const std::vector<double>& state, int k) const;
    double energy_of(const std::vector<double>& state) const;

  private:
    struct Term {
        int out, in;
        double coeff;
    };
    void apply_sparse(const std::vector<Term>& plan, const std::vector<double>& u,
                      std::vector<double>& out) const;

    Config1D config_;
    std::vector<double> u0_;
    int n_ = 0;  // 2 cutoff + 1 coefficients, index = k + cutoff
    std::vector<double> diag_;           // corrector: -eps (friction + diffusion k^2)
    std::vector<Term> transport_;
    std::vector<std::vector<Term>> noise_ops_;  // lambda_k M_k / lambda_k, scaled by lambda_k
    double sqrt_eps_ = 0.0;
    long n_steps_ = 0;
    std::vector<long> output_steps_;
};

Trajectory1D simulate_1d(const Config1D& config, const RealField1D& u0);

struct FrictionRow {
    int member = 0;
    double epsilon = 0.0;
    double sum_sq = 0.0;
    double sum_k2 = 0.0;
    double ratio = 0.0;            // sup k^2 lambda^2 / sum k^2 lambda^2
    double eps_friction = 0.0;     // = nu identically
    double eps_diffusion = 0.0;    // the dying Laplacian coefficient
    std::string phi;
    double dist_path_mean = 0.0;   // E[sup_t |<u,phi> - e^{-nu t} <u0,phi>|]
    double dist_path_max = 0.0;
    double var_sup_t = 0.0;
    double measured_diffusion = 0.0;  // slope of fitted decay rates vs k^2
    double measured_friction = 0.0;   // intercept of the same fit
    int m_paths = 0;
};

struct FrictionLimitConfig {
    std::vector<Spectrum1D> sequence;
    double nu = 0.0;
    RealField1D u0;
    RealField1D drift_b;
    double T = 0.0;
    double cfl = 0.2;
    int checkpoints = 10;
    int m_paths = 0;
    std::vector<int> test_modes;  // pairing against basis functions e_j
    std::uint64_t seed = 0;
    int threads = 0;
    int extra_cutoff = 2;
};

struct FrictionTable {
    std::vector<FrictionRow> rows;  // member-major, phi-minor
    std::vector<double> checkpoint_times;
    size_t n_phis = 0;
};

/// The d = 1 experiment: renormalized ensembles against the friction limit
/// u(t) = e^{-nu t} u0 (b = 0 reference), plus a least-squares fit of the mean
/// equation's decay rates against k^2 to expose the dying diffusion term.
FrictionTable run_friction_limit(const FrictionLimitConfig& config);

}  // namespace stle
