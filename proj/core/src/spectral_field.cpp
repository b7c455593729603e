#include "stle/spectral_field.hpp"

#include <algorithm>
#include <cmath>

namespace stle {

namespace {

CoeffVec conj(const CoeffVec& v) {
    return {std::conj(v[0]), std::conj(v[1]), std::conj(v[2])};
}

double abs2(const CoeffVec& v, int ncomp) {
    double s = 0.0;
    for (int i = 0; i < ncomp; ++i) s += std::norm(v[i]);
    return s;
}

}  // namespace

SpectralField::SpectralField(int dim, int ncomp, int cutoff) : dim_(dim), ncomp_(ncomp), cutoff_(cutoff) {
    if (dim < 1 || dim > 3) throw ContractError("SpectralField: dim must be in {1,2,3}");
    if (ncomp != 1 && ncomp != dim) throw ContractError("SpectralField: ncomp must be 1 or dim");
    if (cutoff < 0) throw ContractError("SpectralField: negative cutoff");
}

CoeffVec SpectralField::at(const Mode& k) const {
    auto it = coeffs_.find(k);
    return it == coeffs_.end() ? CoeffVec{} : it->second;
}

void SpectralField::set(const Mode& k, const CoeffVec& v) {
    for (int i = dim_; i < 3; ++i)
        if (k[i] != 0) throw ContractError("SpectralField::set: mode has components beyond dim");
    if (norm2(k) > static_cast<long>(cutoff_) * cutoff_)
        throw ContractError("SpectralField::set: |k| exceeds cutoff");
    coeffs_[k] = v;
}

void SpectralField::set_pair(const Mode& k, const CoeffVec& v) {
    set(k, v);
    if (!is_zero(k)) set(negate(k), conj(v));
}

double SpectralField::energy() const {
    double s = 0.0;
    for (const auto& [k, v] : coeffs_) s += abs2(v, ncomp_);
    return s;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    if (other.dim_ != dim_ || other.ncomp_ != ncomp_)
        throw ContractError("SpectralField::operator+=: shape mismatch");
    for (const auto& [k, v] : other.coeffs_) {
        CoeffVec cur = at(k);
        for (int i = 0; i < ncomp_; ++i) cur[i] += v[i];
        set(k, cur);
    }
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& [k, v] : coeffs_)
        for (int i = 0; i < ncomp_; ++i) v[i] *= s;
    return *this;
}

bool is_hermitian(const SpectralField& f, double tol) {
    for (const auto& [k, v] : f.coeffs()) {
        const CoeffVec w = f.at(negate(k));
        for (int i = 0; i < f.ncomp(); ++i)
            if (std::abs(w[i] - std::conj(v[i])) > tol * (1.0 + std::abs(v[i]))) return false;
    }
    return true;
}

bool is_divergence_free(const SpectralField& f, double tol) {
    if (f.is_scalar()) throw ContractError("is_divergence_free: vector field expected");
    for (const auto& [k, v] : f.coeffs()) {
        Complex d{};
        for (int i = 0; i < f.dim(); ++i) d += static_cast<double>(k[i]) * v[i];
        if (std::abs(d) > tol) return false;
    }
    return true;
}

Complex inner(const SpectralField& f, const SpectralField& g) {
    if (f.dim() != g.dim() || f.ncomp() != g.ncomp())
        throw ContractError("inner: shape mismatch");
    Complex s{};
    for (const auto& [k, v] : f.coeffs()) {
        const CoeffVec w = g.at(k);
        for (int i = 0; i < f.ncomp(); ++i) s += v[i] * std::conj(w[i]);
    }
    return s;
}

double inner_real(const SpectralField& f, const SpectralField& g) { return inner(f, g).real(); }

SpectralField leray_project(const SpectralField& f) {
    if (f.is_scalar()) throw ContractError("leray_project: scalar field input");
    SpectralField out(f.dim(), f.ncomp(), f.cutoff());
    for (const auto& [k, v] : f.coeffs()) {
        if (is_zero(k)) continue;  // P_0 = 0: output is mean-zero
        const double kk = static_cast<double>(norm2(k));
        Complex kf{};
        for (int i = 0; i < f.dim(); ++i) kf += static_cast<double>(k[i]) * v[i];
        CoeffVec w{};
        for (int i = 0; i < f.dim(); ++i) w[i] = v[i] - kf * (static_cast<double>(k[i]) / kk);
        out.set(k, w);
    }
    return out;
}

SpectralField project_modes(const SpectralField& f, int N) {
    if (N < 0) throw ContractError("project_modes: N must be >= 0");
    SpectralField out(f.dim(), f.ncomp(), std::min(f.cutoff(), N));
    const long n2 = static_cast<long>(N) * N;
    for (const auto& [k, v] : f.coeffs())
        if (norm2(k) <= n2) out.set(k, v);
    return out;
}

SpectralField transport_convolution(const SpectralField& b, const SpectralField& u, int N) {
    if (b.is_scalar()) throw ContractError("transport_convolution: b must be a vector field");
    if (!u.is_scalar()) throw ContractError("transport_convolution: u must be a scalar field");
    if (b.dim() != u.dim()) throw ContractError("transport_convolution: dimension mismatch");
    SpectralField out = SpectralField::scalar(u.dim(), N);
    const long n2 = static_cast<long>(N) * N;
    // Accumulate half-lattice representatives (plus mode 0) only and mirror,
    // so the output is Hermitian-symmetric bit-exactly.
    std::map<Mode, Complex> acc;
    for (const auto& [m, bm] : b.coeffs()) {
        for (const auto& [l, ul] : u.coeffs()) {
            const Mode k = add(m, l);
            if (norm2(k) > n2) continue;
            if (!is_zero(k) && !in_half_lattice(k)) continue;
            Complex bl{};
            for (int i = 0; i < b.dim(); ++i) bl += bm[i] * static_cast<double>(l[i]);
            acc[k] += Complex(0.0, 1.0) * bl * ul[0];
        }
    }
    for (const auto& [k, z] : acc) {
        if (is_zero(k)) {
            out.set_scalar(k, Complex(z.real(), 0.0));  // mode 0 of a real field
        } else {
            out.set_pair_scalar(k, z);
        }
    }
    return out;
}

double PhysicalGrid::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

PhysicalGrid evaluate_physical(const SpectralField& f, int n) {
    if (n < 2 * f.cutoff() + 1)
        throw ContractError("evaluate_physical: grid must have at least 2*cutoff+1 points per axis");
    if (!is_hermitian(f)) throw ContractError("evaluate_physical: non-Hermitian input");
    const int d = f.dim();
    long npts = 1;
    for (int i = 0; i < d; ++i) npts *= n;

    PhysicalGrid g;
    g.dim = d;
    g.n = n;
    g.ncomp = f.ncomp();
    g.values.assign(static_cast<size_t>(npts) * f.ncomp(), 0.0);

    const double h = 2.0 * M_PI / n;
    double worst_imag = 0.0, scale = 0.0;
    for (const auto& [k, v] : f.coeffs())
        for (int c = 0; c < f.ncomp(); ++c) scale = std::max(scale, std::abs(v[c]));

    for (long p = 0; p < npts; ++p) {
        long rem = p;
        double x[3] = {0, 0, 0};
        for (int i = d - 1; i >= 0; --i) {
            x[i] = h * (rem % n);
            rem /= n;
        }
        for (int c = 0; c < f.ncomp(); ++c) {
            Complex s{};
            for (const auto& [k, v] : f.coeffs()) {
                const double phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
                s += v[c] * Complex(std::cos(phase), std::sin(phase));
            }
            worst_imag = std::max(worst_imag, std::abs(s.imag()));
            g.values[static_cast<size_t>(c) * npts + p] = s.real();
        }
    }
    if (scale > 0.0 && worst_imag > 1e-10 * scale * static_cast<double>(f.coeffs().size() + 1))
        throw ContractError("evaluate_physical: imaginary residue above tolerance");
    return g;
}

SpectralField divergence(const SpectralField& f) {
    if (f.is_scalar()) throw ContractError("divergence: vector field expected");
    SpectralField out = SpectralField::scalar(f.dim(), f.cutoff());
    for (const auto& [k, v] : f.coeffs()) {
        Complex kf{};
        for (int i = 0; i < f.dim(); ++i) kf += static_cast<double>(k[i]) * v[i];
        const Complex z = Complex(0.0, 1.0) * kf;
        if (z != Complex{}) out.set_scalar(k, z);
    }
    return out;
}

double divergence_sup_norm(const SpectralField& f) {
    SpectralField div = divergence(f);
    if (div.coeffs().empty()) return 0.0;
    // Trig polynomials attain their sup close to a fine grid maximum.
    const int n = std::max(8 * f.cutoff() + 1, 33);
    return evaluate_physical(div, n).max_abs();
}

}  // namespace stle
