#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stle/rng.hpp"
#include "stle/spectral_field.hpp"

namespace stle {

enum class SpectrumFamily {
    shell_indicator,    // theta_k = 1 on alpha |k| <= 1   (closed ball)
    smooth_cutoff,      // theta_k = F(alpha |k|), F = exp(1 - 1/(1-r^2)) on [0,1)
    power_law_sobolev,  // theta_k = (1 + alpha |k|^2)^beta, beta < -d/2
    power_law_exponent, // theta_k = (1 + |k|^2)^(-d/2 - alpha)
    explicit_list,
};

std::string family_name(SpectrumFamily f);
SpectrumFamily family_from_name(const std::string& s);

/// Isotropic coefficient family {theta_k} on Z^d \ {0}, finitely supported.
///
/// Invariants: theta_{-k} = theta_k, theta invariant under coordinate swaps
/// and sign reflections, sum theta_k^2 finite (cached).  Zero coefficients are
/// not stored; the support and its half-lattice representatives are frozen at
/// construction so every consumer sees one deterministic mode order.
struct NoiseSpectrum {
    int dim = 0;
    std::map<Mode, double> theta;
    std::string family_tag;
    SpectrumFamily family = SpectrumFamily::explicit_list;
    double alpha = 0.0;
    double beta = 0.0;
    int support_cutoff = 0;

    double sum_sq = 0.0;        // sum_k theta_k^2
    double sup_sq = 0.0;        // sup_k theta_k^2
    double support_radius = 0.0;
    int support_radius_int = 0;  // ceil of the Euclidean support radius
    std::vector<Mode> reps;      // half-lattice representatives, sorted

    double theta_at(const Mode& k) const {
        auto it = theta.find(k);
        return it == theta.end() ? 0.0 : it->second;
    }
    /// sup theta^2 / sum theta^2 — the quantity (H3) sends to zero.
    double concentration_ratio() const { return sup_sq / sum_sq; }
};

NoiseSpectrum build_spectrum(SpectrumFamily family, double alpha, double beta, int dim,
                             int support_cutoff);
NoiseSpectrum build_spectrum_explicit(int dim, const std::map<Mode, double>& theta,
                                      const std::string& tag = "explicit_list");

struct SpectrumValidation {
    bool symmetric = true;   // theta_{-k} = theta_k
    bool isotropic = true;   // theta constant on isometry orbits
    bool finite = true;      // nonempty support, finite sum of squares
    double sum_sq = 0.0;
    // Upper bound on the sum of theta^2 dropped by the support_cutoff
    // truncation.  Zero for compactly supported families already inside the
    // cutoff; an integral bound for the power-law families.
    double truncation_tail_bound = 0.0;
    std::string detail;      // first offending orbit / pair, when any

    bool ok() const { return symmetric && isotropic && finite; }
};

/// Bound on sum_{|k| > radius} theta_k^2 for a family-built spectrum.
double truncation_tail_bound(const NoiseSpectrum& s);

SpectrumValidation validate_spectrum(const NoiseSpectrum& s);

/// sum_k theta_k^2 P_k assembled entry-wise with compensated summation.
Mat3 corrector_matrix(const NoiseSpectrum& s);

/// The Ito-Stratonovich corrector constant c = ((d-1)/d) sum theta^2.
///
/// The full matrix sum theta^2 P_k is assembled and required to equal c I
/// entry-wise within `tol`; an anisotropic spectrum fails here with the
/// offending entry named.
double corrector_constant(const NoiseSpectrum& s, double tol = 1e-12);

/// Renormalization constant: epsilon with epsilon * c = nu, i.e.
/// nu * (d/(d-1)) / sum theta^2.
double epsilon_for_nu(const NoiseSpectrum& s, double nu);

/// Ordered spectra (one per N) targeting a fixed nu; the finite-sequence
/// surrogate of (H3) is that the concentration ratio strictly decreases.
struct SpectrumSequence {
    std::vector<NoiseSpectrum> members;
    double nu = 0.0;
};

/// Checks H1/H2 for every member and strict decrease of sup/sum ratios.
void validate_sequence(const SpectrumSequence& seq);

struct NuRelationRow {
    int index = 0;
    double sum_sq = 0.0;
    double epsilon = 0.0;
    double expected_noise_l2 = 0.0;  // E |W^N(1,.)|^2 = 2 (d-1) sum theta^2
    double product = 0.0;            // epsilon * E |W^N(1,.)|^2  (= 2 d nu)
    double c_dim = 0.0;              // nu / product = 1/(2d)
    double residual = 0.0;           // |c_dim * product - nu|
};

/// Per-N table for the relation nu = C(d) lim epsilon^N E|W^N(1,.)|^2.
/// With E|W^N(1,.)|^2 = 2(d-1) sum theta^2 and epsilon^N = nu (d/(d-1)) /
/// sum theta^2, the product epsilon^N E|W^N|^2 equals 2 d nu identically,
/// so the dimensional constant is C(d) = 1/(2d).
std::vector<NuRelationRow> nu_relation_check(const SpectrumSequence& seq);

/// One time step of complex Brownian increments dW(k,j) over the spectrum
/// support.  Only half-lattice representatives are sampled; dW(-k,j) is the
/// exact conjugate.  Layout: reps-major, j-minor.
struct NoiseIncrements {
    double dt = 0.0;
    int dim = 0;
    int n_reps = 0;
    std::vector<Complex> w;  // size n_reps * (dim - 1)

    Complex at(int rep_index, int j) const { return w[static_cast<size_t>(rep_index) * (dim - 1) + j]; }
};

/// Draws increments for step `step` of path `key.path`.  Re and Im parts are
/// independent N(0, dt), hence [dW(k,j), dW(-k,j)] = 2 dt and E[dW(k,j)^2] = 0.
NoiseIncrements sample_increments(const NoiseSpectrum& s, double dt, const StreamKey& key,
                                  std::uint64_t step);

}  // namespace stle
