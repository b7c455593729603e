#pragma once

#include <complex>
#include <map>
#include <vector>

#include "stle/lattice.hpp"

namespace stle {

using Complex = std::complex<double>;

/// Coefficient of one Fourier mode; only the first ncomp entries are used
/// (1 for scalar fields, d for vector fields).
using CoeffVec = std::array<Complex, 3>;

inline CoeffVec coeff_scalar(Complex z) { return {z, Complex{}, Complex{}}; }

/// Sparse container of complex Fourier coefficients of a real-valued field on
/// the torus: f(x) = sum_k f_k e^{i k.x}.  Reality means f_{-k} = conj(f_k);
/// both halves are stored and every operation maintains the symmetry exactly
/// (minus modes are written as mirrored conjugates, never recomputed).
class SpectralField {
  public:
    SpectralField(int dim, int ncomp, int cutoff);

    static SpectralField scalar(int dim, int cutoff) { return {dim, 1, cutoff}; }
    static SpectralField vector(int dim, int cutoff) { return {dim, dim, cutoff}; }

    int dim() const { return dim_; }
    int ncomp() const { return ncomp_; }
    int cutoff() const { return cutoff_; }
    bool is_scalar() const { return ncomp_ == 1; }

    const std::map<Mode, CoeffVec>& coeffs() const { return coeffs_; }

    /// Stored coefficient, or zero when the mode is absent.
    CoeffVec at(const Mode& k) const;
    Complex scalar_at(const Mode& k) const { return at(k)[0]; }

    /// Sets coefficient of k only (caller keeps the symmetry).
    void set(const Mode& k, const CoeffVec& v);
    void set_scalar(const Mode& k, Complex z) { set(k, coeff_scalar(z)); }

    /// Sets coefficient of k and the conjugate at -k in one go.
    void set_pair(const Mode& k, const CoeffVec& v);
    void set_pair_scalar(const Mode& k, Complex z) { set_pair(k, coeff_scalar(z)); }

    void erase(const Mode& k) { coeffs_.erase(k); }
    void clear() { coeffs_.clear(); }

    /// sum_k |f_k|^2 = |f|_{L^2}^2 under the normalized inner product.
    double energy() const;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator*=(double s);

  private:
    int dim_;
    int ncomp_;
    int cutoff_;
    std::map<Mode, CoeffVec> coeffs_;
};

bool is_hermitian(const SpectralField& f, double tol = 1e-12);
bool is_divergence_free(const SpectralField& f, double tol = 1e-12);

/// <f, g> = sum_k f_k . conj(g_k); real for Hermitian-symmetric inputs.
Complex inner(const SpectralField& f, const SpectralField& g);
double inner_real(const SpectralField& f, const SpectralField& g);

/// Mode-wise Leray projection P_k f_k (and P_0 = 0): divergence-free,
/// mean-zero output.  Scalar input is a contract violation.
SpectralField leray_project(const SpectralField& f);

/// Fourier cutoff projector Pi_N: drops every mode with |k| > N.
SpectralField project_modes(const SpectralField& f, int N);

/// Pi_N(b . grad u) in spectral form: mode k gets i sum_l (b_{k-l} . l) u_l.
/// Direct mode-pair summation; exact at desk-scale cutoffs.
SpectralField transport_convolution(const SpectralField& b, const SpectralField& u, int N);

/// Point samples of a field on the uniform grid; layout [comp][x0][x1][x2].
struct PhysicalGrid {
    int dim = 0;
    int n = 0;  // points per axis
    int ncomp = 0;
    std::vector<double> values;

    double max_abs() const;
};

/// Samples sum_k f_k e^{i k.x} on an n^d grid; requires n >= 2 cutoff + 1 and
/// Hermitian input (the imaginary residue must vanish to rounding).
PhysicalGrid evaluate_physical(const SpectralField& f, int grid_points_per_axis);

/// Scalar field div f with (div f)_k = i k . f_k.
SpectralField divergence(const SpectralField& f);

/// sup-norm of div f estimated on a fine uniform grid.
double divergence_sup_norm(const SpectralField& f);

}  // namespace stle
