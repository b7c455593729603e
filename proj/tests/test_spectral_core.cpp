#include <doctest.h>

#include "oracles.hpp"
#include "stle/rng.hpp"
#include "stle/spectral_field.hpp"

using namespace stle;

namespace {

// Deterministic pseudo-random Hermitian scalar field.
SpectralField random_scalar(int dim, int cutoff, std::uint64_t seed) {
    SpectralField f = SpectralField::scalar(dim, cutoff);
    StreamKey key{seed, 0};
    std::uint64_t slot = 0;
    for (const Mode& k : modes_in_ball(dim, cutoff, true)) {
        if (!is_zero(k) && !in_half_lattice(k)) continue;
        double a, b;
        gauss_pair(key, 0, slot++, a, b);
        if (is_zero(k))
            f.set_scalar(k, Complex(a, 0.0));
        else
            f.set_pair_scalar(k, Complex(a, b) * 0.5);
    }
    return f;
}

SpectralField random_vector(int dim, int cutoff, std::uint64_t seed, bool div_free) {
    SpectralField f = SpectralField::vector(dim, cutoff);
    StreamKey key{seed, 1};
    std::uint64_t slot = 0;
    for (const Mode& k : modes_in_ball(dim, cutoff, false)) {
        if (!in_half_lattice(k)) continue;
        CoeffVec v{};
        for (int c = 0; c < dim; ++c) {
            double a, b;
            gauss_pair(key, 0, slot++, a, b);
            v[c] = Complex(a, b) * 0.5;
        }
        f.set_pair(k, v);
    }
    return div_free ? leray_project(f) : f;
}

}  // namespace

TEST_CASE("leray projection kills parallel components and fixes perpendicular ones") {
    SpectralField f = SpectralField::vector(2, 2);
    f.set_pair(mode(1, 0), {Complex(1, 0), Complex(0, 0)});
    SpectralField p = leray_project(f);
    CHECK(std::abs(p.at(mode(1, 0))[0]) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(p.at(mode(1, 0))[1]) == doctest::Approx(0.0).epsilon(1e-15));

    SpectralField g = SpectralField::vector(2, 2);
    g.set_pair(mode(1, 0), {Complex(0, 0), Complex(1, 0)});
    SpectralField q = leray_project(g);
    CHECK(q.at(mode(1, 0))[1] == Complex(1, 0));
}

TEST_CASE("leray projection, d=3 hand value") {
    // P_k with k = (1,1,0) applied to (1,0,0) gives (1/2, -1/2, 0).
    SpectralField f = SpectralField::vector(3, 2);
    f.set_pair(mode(1, 1, 0), {Complex(1, 0), Complex(0, 0), Complex(0, 0)});
    SpectralField p = leray_project(f);
    CHECK(p.at(mode(1, 1, 0))[0].real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p.at(mode(1, 1, 0))[1].real() == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(std::abs(p.at(mode(1, 1, 0))[2]) < 1e-15);
}

TEST_CASE("leray projection is idempotent and produces divergence-free fields") {
    SpectralField f = random_vector(3, 3, 7, false);
    SpectralField once = leray_project(f);
    SpectralField twice = leray_project(once);
    CHECK(is_divergence_free(once));
    // mode-wise fixed point at machine precision (the re-projection only
    // touches the last bits of an already-projected coefficient)
    for (const auto& [k, v] : once.coeffs())
        for (int c = 0; c < 3; ++c) CHECK(std::abs(v[c] - twice.at(k)[c]) < 1e-15);
    CHECK(std::abs(once.at(mode(0, 0, 0))[0]) == 0.0);  // mean-zero
}

TEST_CASE("leray projection rejects scalar input") {
    SpectralField f = SpectralField::scalar(2, 1);
    CHECK_THROWS_AS((void)leray_project(f), ContractError);
}

TEST_CASE("leray matrix properties: P_k k = 0, symmetric, eigenvalues {0, 1 x (d-1)}") {
    for (int dim : {2, 3}) {
        for (const Mode& k : modes_in_ball(dim, 3, false)) {
            const Mat3 p = leray_matrix(k, dim);
            // P_k k = 0
            for (int i = 0; i < dim; ++i) {
                double s = 0.0;
                for (int j = 0; j < dim; ++j) s += p[i][j] * k[j];
                CHECK(std::abs(s) < 1e-12);
            }
            // symmetry and idempotence (P^2 = P) pin the {0,1} spectrum
            double trace = 0.0;
            for (int i = 0; i < dim; ++i) {
                trace += p[i][i];
                for (int j = 0; j < dim; ++j) {
                    CHECK(p[i][j] == doctest::Approx(p[j][i]).epsilon(1e-15));
                    double pij2 = 0.0;
                    for (int l = 0; l < dim; ++l) pij2 += p[i][l] * p[l][j];
                    CHECK(pij2 == doctest::Approx(p[i][j]).epsilon(1e-13));
                }
            }
            CHECK(trace == doctest::Approx(dim - 1).epsilon(1e-13));
        }
    }
}

TEST_CASE("project_modes truncates, is idempotent, and nests") {
    SpectralField f = SpectralField::scalar(2, 3);
    f.set_pair_scalar(mode(1, 0), Complex(0.5, 0.25));
    f.set_pair_scalar(mode(3, 0), Complex(0.1, -0.3));

    SpectralField id = project_modes(f, 5);
    CHECK(id.coeffs().size() == f.coeffs().size());

    SpectralField cut = project_modes(f, 2);
    CHECK(cut.coeffs().count(mode(1, 0)) == 1);
    CHECK(cut.coeffs().count(mode(-1, 0)) == 1);
    CHECK(cut.coeffs().count(mode(3, 0)) == 0);

    SpectralField r = random_scalar(2, 4, 11);
    SpectralField nested = project_modes(project_modes(r, 4), 2);
    SpectralField direct = project_modes(r, 2);
    CHECK(nested.coeffs().size() == direct.coeffs().size());
    for (const auto& [k, v] : direct.coeffs()) CHECK(nested.at(k)[0] == v[0]);
}

TEST_CASE("basis_kperp: d=2 conventions") {
    const auto a = basis_kperp(mode(1, 0), 2);
    REQUIRE(a.size() == 1);
    CHECK(a[0][0] == doctest::Approx(0.0));
    CHECK(a[0][1] == doctest::Approx(1.0));
    const auto b = basis_kperp(mode(-1, 0), 2);
    CHECK(b[0][0] == a[0][0]);  // a_{-k} = a_k, exactly
    CHECK(b[0][1] == a[0][1]);
}

TEST_CASE("basis_kperp: d=3 deterministic pair for k=(0,0,2)") {
    const auto a = basis_kperp(mode(0, 0, 2), 3);
    REQUIRE(a.size() == 2);
    CHECK(a[0][0] == doctest::Approx(1.0));
    CHECK(a[0][1] == doctest::Approx(0.0));
    CHECK(a[1][0] == doctest::Approx(0.0));
    CHECK(a[1][1] == doctest::Approx(1.0));
}

TEST_CASE("basis_kperp errors: k = 0 and d = 1") {
    CHECK_THROWS_AS((void)basis_kperp(mode(0, 0), 2), ContractError);
    CHECK_THROWS_AS((void)basis_kperp(mode(1), 1), ContractError);
}

TEST_CASE("basis_kperp spans P_k: orthonormal, perpendicular, sum of dyads") {
    for (int dim : {2, 3}) {
        for (const Mode& k : modes_in_ball(dim, 3, false)) {
            const auto a = basis_kperp(k, dim);
            REQUIRE(static_cast<int>(a.size()) == dim - 1);
            for (int i = 0; i < dim - 1; ++i) {
                CHECK(norm(a[i]) == doctest::Approx(1.0).epsilon(1e-13));
                CHECK(std::abs(dot(a[i], k)) < 1e-12);
                for (int j = i + 1; j < dim - 1; ++j) CHECK(std::abs(dot(a[i], a[j])) < 1e-13);
            }
            const Mat3 p = leray_matrix(k, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) {
                    double d = 0.0;
                    for (const auto& v : a) d += v[i] * v[j];
                    CHECK(std::abs(d - p[i][j]) < 1e-12);
                }
        }
    }
}

TEST_CASE("transport_convolution: zero cases") {
    SpectralField u = random_scalar(2, 2, 3);
    SpectralField b0 = SpectralField::vector(2, 2);
    CHECK(transport_convolution(b0, u, 2).coeffs().empty());

    SpectralField uc = SpectralField::scalar(2, 2);
    uc.set_scalar(mode(0, 0), 4.2);
    SpectralField b = random_vector(2, 2, 5, true);
    CHECK(transport_convolution(b, uc, 2).energy() == 0.0);
}

TEST_CASE("transport_convolution: two-mode hand expansion") {
    SpectralField b = SpectralField::vector(2, 1);
    b.set_pair(mode(1, 0), {Complex(0, 0), Complex(0.5, 0)});
    SpectralField u = SpectralField::scalar(2, 1);
    u.set_pair_scalar(mode(0, 1), 0.5);

    SpectralField out = transport_convolution(b, u, 3);
    CHECK(out.scalar_at(mode(1, 1)) == Complex(0, 0.25));
    CHECK(out.scalar_at(mode(-1, -1)) == Complex(0, -0.25));
    CHECK(out.scalar_at(mode(-1, 1)) == Complex(0, 0.25));
    CHECK(out.scalar_at(mode(1, -1)) == Complex(0, -0.25));
    int nonzero = 0;
    for (const auto& [k, v] : out.coeffs())
        if (v[0] != Complex{}) ++nonzero;
    CHECK(nonzero == 4);
    CHECK(is_hermitian(out, 0.0));
}

TEST_CASE("transport_convolution: dimension mismatch is an error") {
    SpectralField b = SpectralField::vector(3, 1);
    SpectralField u = SpectralField::scalar(2, 1);
    CHECK_THROWS_AS((void)transport_convolution(b, u, 2), ContractError);
}

TEST_CASE("transport_convolution agrees with the physical-space product oracle") {
    // (b . grad u)(x) compared pointwise on a fine grid, cutoff <= 3 fields.
    SpectralField b = random_vector(2, 2, 21, false);
    SpectralField u = random_scalar(2, 2, 22);
    const int N = 5;  // no truncation: |k| <= 4 for every product mode
    SpectralField conv = transport_convolution(b, u, N);

    const int n = 16;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::array<double, 3> x = {2 * M_PI * i / n, 2 * M_PI * j / n, 0.0};
            Complex grad0{}, grad1{};
            for (const auto& [k, v] : u.coeffs()) {
                const Complex e =
                    v[0] * std::exp(Complex(0, k[0] * x[0] + k[1] * x[1]));
                grad0 += Complex(0, k[0]) * e;
                grad1 += Complex(0, k[1]) * e;
            }
            const Complex bx0 = oracles::eval_at(b, x, 0), bx1 = oracles::eval_at(b, x, 1);
            const Complex expect = bx0 * grad0 + bx1 * grad1;
            const Complex got = oracles::eval_at(conv, x);
            CHECK(std::abs(expect - got) < 1e-12);
        }
}

TEST_CASE("transport pairing <u, b.grad u> vanishes for divergence-free b") {
    SpectralField b = random_vector(2, 2, 31, true);
    SpectralField u = random_scalar(2, 2, 32);  // cutoff 2 <= N/2
    const int N = 5;
    SpectralField conv = transport_convolution(b, u, N);
    const double scale = std::sqrt(u.energy()) * std::sqrt(b.energy()) + 1.0;
    CHECK(std::abs(inner_real(u, conv)) < 1e-12 * scale);
}

TEST_CASE("evaluate_physical: constants, cosines, and the direct-sum oracle") {
    SpectralField c = SpectralField::scalar(2, 0);
    c.set_scalar(mode(0, 0), 3.0);
    PhysicalGrid g = evaluate_physical(c, 5);
    for (double v : g.values) CHECK(v == doctest::Approx(3.0));

    SpectralField cosx = SpectralField::scalar(2, 1);
    cosx.set_pair_scalar(mode(1, 0), 0.5);
    PhysicalGrid gc = evaluate_physical(cosx, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(gc.values[i * 8 + j] == doctest::Approx(std::cos(2 * M_PI * i / 8)).epsilon(1e-12));

    SpectralField r = random_scalar(2, 3, 55);
    const int n = 9;
    PhysicalGrid gr = evaluate_physical(r, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::array<double, 3> x = {2 * M_PI * i / n, 2 * M_PI * j / n, 0.0};
            CHECK(std::abs(gr.values[i * n + j] - oracles::eval_at(r, x).real()) < 1e-12);
        }
}

TEST_CASE("evaluate_physical rejects non-Hermitian input and tiny grids") {
    SpectralField f = SpectralField::scalar(2, 1);
    f.set_scalar(mode(1, 0), Complex(1.0, 0.0));  // partner missing
    CHECK_THROWS_AS((void)evaluate_physical(f, 9), ContractError);

    SpectralField ok = SpectralField::scalar(2, 2);
    ok.set_pair_scalar(mode(2, 0), 0.5);
    CHECK_THROWS_AS((void)evaluate_physical(ok, 4), ContractError);
}

TEST_CASE("spectral pairing equals physical-space quadrature") {
    SpectralField f = random_scalar(2, 2, 71);
    SpectralField g = random_scalar(2, 2, 72);
    const double spec = inner_real(f, g);
    const double quad = oracles::quadrature_inner(f, g, 16);
    CHECK(spec == doctest::Approx(quad).epsilon(1e-10));
}
