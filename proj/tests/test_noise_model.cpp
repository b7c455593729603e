#include <doctest.h>

#include <cmath>

#include "stle/noise.hpp"

using namespace stle;

TEST_CASE("shell_indicator support matches the closed-ball convention") {
    // alpha = 1/2: theta = 1 exactly on 0 < |k| <= 2.
    NoiseSpectrum s = build_spectrum(SpectrumFamily::shell_indicator, 0.5, 0.0, 2, 4);
    int count = 0;
    for (const auto& [k, th] : s.theta) {
        CHECK(th == 1.0);
        CHECK(norm2(k) <= 4);
        ++count;
    }
    CHECK(count == 12);  // lattice points with 0 < |k|^2 <= 4 in d = 2
    CHECK(s.sum_sq == doctest::Approx(12.0));
}

TEST_CASE("support_cutoff = 1 gives the isotropy orbit of (1,0)") {
    for (auto family : {SpectrumFamily::shell_indicator, SpectrumFamily::smooth_cutoff,
                        SpectrumFamily::power_law_sobolev, SpectrumFamily::power_law_exponent}) {
        const double beta = family == SpectrumFamily::power_law_sobolev ? -1.5 : 0.0;
        NoiseSpectrum s = build_spectrum(family, 0.5, beta, 2, 1);
        CHECK(s.theta.size() == 4);
        const double ref = s.theta_at(mode(1, 0));
        CHECK(ref > 0.0);
        CHECK(s.theta_at(mode(-1, 0)) == ref);
        CHECK(s.theta_at(mode(0, 1)) == ref);
        CHECK(s.theta_at(mode(0, -1)) == ref);
    }
}

TEST_CASE("power_law_exponent values") {
    NoiseSpectrum s = build_spectrum(SpectrumFamily::power_law_exponent, 1.0, 0.0, 2, 2);
    CHECK(s.theta_at(mode(1, 0)) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s.theta_at(mode(1, 1)) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("smooth_cutoff is a decreasing bump with F(0) = 1") {
    NoiseSpectrum s = build_spectrum(SpectrumFamily::smooth_cutoff, 0.2, 0.0, 2, 6);
    double prev = 1.0;
    for (int r = 1; r * r <= 36; ++r) {
        const double th = s.theta_at(mode(r, 0));
        CHECK(th <= prev + 1e-15);
        prev = th;
    }
    CHECK(s.theta_at(mode(1, 0)) < 1.0);
    CHECK(s.theta_at(mode(1, 0)) > 0.0);
}

TEST_CASE("build_spectrum parameter validation") {
    CHECK_THROWS_AS((void)build_spectrum(SpectrumFamily::power_law_sobolev, 1.0, -0.5, 2, 3),
                    ConfigError);  // beta >= -d/2
    CHECK_THROWS_AS((void)build_spectrum(SpectrumFamily::shell_indicator, -1.0, 0.0, 2, 3),
                    ConfigError);
    // alpha so large the ball is empty
    CHECK_THROWS_AS((void)build_spectrum(SpectrumFamily::shell_indicator, 10.0, 0.0, 2, 3),
                    ConfigError);
}

TEST_CASE("validate_spectrum: pass, isotropy violation, symmetry violation") {
    NoiseSpectrum good = build_spectrum(SpectrumFamily::shell_indicator, 1.0, 0.0, 2, 1);
    CHECK(validate_spectrum(good).ok());

    std::map<Mode, double> aniso = {{mode(1, 0), 1.0}, {mode(-1, 0), 1.0},
                                    {mode(0, 1), 2.0}, {mode(0, -1), 2.0}};
    SpectrumValidation v = validate_spectrum(build_spectrum_explicit(2, aniso));
    CHECK(v.symmetric);
    CHECK_FALSE(v.isotropic);
    CHECK(v.detail.find("orbit") != std::string::npos);

    std::map<Mode, double> asym = {{mode(1, 0), 1.0}, {mode(-1, 0), 2.0},
                                   {mode(0, 1), 1.0}, {mode(0, -1), 1.0}};
    SpectrumValidation w = validate_spectrum(build_spectrum_explicit(2, asym));
    CHECK_FALSE(w.symmetric);
}

TEST_CASE("corrector constant: hand values in d = 2 and d = 3") {
    NoiseSpectrum s2 = build_spectrum(SpectrumFamily::shell_indicator, 1.0, 0.0, 2, 1);
    CHECK(s2.sum_sq == doctest::Approx(4.0));
    CHECK(corrector_constant(s2) == doctest::Approx(2.0).epsilon(1e-15));
    const Mat3 m2 = corrector_matrix(s2);
    CHECK(m2[0][0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(m2[1][1] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(std::abs(m2[0][1]) < 1e-15);

    NoiseSpectrum s3 = build_spectrum(SpectrumFamily::shell_indicator, 1.0, 0.0, 3, 1);
    CHECK(s3.theta.size() == 6);
    CHECK(corrector_constant(s3) == doctest::Approx(4.0).epsilon(1e-15));

    NoiseSpectrum empty;
    empty.dim = 2;
    CHECK(corrector_constant(empty) == 0.0);
}

TEST_CASE("corrector matrix identity holds to 1e-12 across families and dimensions") {
    const std::vector<NoiseSpectrum> spectra = {
        build_spectrum(SpectrumFamily::shell_indicator, 0.25, 0.0, 2, 6),
        build_spectrum(SpectrumFamily::smooth_cutoff, 0.15, 0.0, 2, 7),
        build_spectrum(SpectrumFamily::power_law_sobolev, 0.5, -2.0, 2, 6),
        build_spectrum(SpectrumFamily::power_law_exponent, 0.7, 0.0, 3, 4),
        build_spectrum(SpectrumFamily::shell_indicator, 0.2, 0.0, 3, 5),
    };
    for (const auto& s : spectra) {
        const double c = (s.dim - 1.0) / s.dim * s.sum_sq;
        const Mat3 a = corrector_matrix(s);
        for (int i = 0; i < s.dim; ++i)
            for (int j = 0; j < s.dim; ++j)
                CHECK(std::abs(a[i][j] - (i == j ? c : 0.0)) < 1e-12);
    }
}

TEST_CASE("corrector constant rejects anisotropic spectra naming the defect") {
    std::map<Mode, double> aniso = {{mode(1, 0), 1.0}, {mode(-1, 0), 1.0},
                                    {mode(0, 1), 2.0}, {mode(0, -1), 2.0}};
    NoiseSpectrum s = build_spectrum_explicit(2, aniso);
    CHECK_THROWS_AS((void)corrector_constant(s), ContractError);
}

TEST_CASE("corrector basis-independence: dyadic assembly equals P_k assembly") {
    for (const auto& s : {build_spectrum(SpectrumFamily::shell_indicator, 0.34, 0.0, 3, 4),
                          build_spectrum(SpectrumFamily::power_law_exponent, 1.3, 0.0, 2, 5)}) {
        Mat3 dyadic{};
        for (const auto& [k, th] : s.theta) {
            const auto basis = basis_kperp(k, s.dim);
            for (const auto& a : basis)
                for (int i = 0; i < s.dim; ++i)
                    for (int j = 0; j < s.dim; ++j) dyadic[i][j] += th * th * a[i] * a[j];
        }
        const Mat3 proj = corrector_matrix(s);
        for (int i = 0; i < s.dim; ++i)
            for (int j = 0; j < s.dim; ++j) CHECK(std::abs(dyadic[i][j] - proj[i][j]) < 1e-11);
    }
}

TEST_CASE("epsilon_for_nu: values, fixed point, homogeneity, errors") {
    NoiseSpectrum s = build_spectrum(SpectrumFamily::shell_indicator, 1.0, 0.0, 2, 1);
    CHECK(epsilon_for_nu(s, 1.0) == doctest::Approx(0.5).epsilon(1e-15));

    const double c = corrector_constant(s);
    CHECK(epsilon_for_nu(s, c) == doctest::Approx(1.0).epsilon(1e-14));

    std::map<Mode, double> doubled;
    for (const auto& [k, th] : s.theta) doubled[k] = 2.0 * th;
    NoiseSpectrum s2 = build_spectrum_explicit(2, doubled);
    CHECK(epsilon_for_nu(s2, 1.0) == doctest::Approx(0.125).epsilon(1e-14));

    NoiseSpectrum empty;
    empty.dim = 2;
    CHECK_THROWS_AS((void)epsilon_for_nu(empty, 1.0), ConfigError);
    CHECK_THROWS_AS((void)epsilon_for_nu(s, 0.0), ConfigError);
}

TEST_CASE("epsilon * c == nu to machine precision for many spectra and nu") {
    for (double nu : {0.1, 1.0, 7.5}) {
        for (const auto& s : {build_spectrum(SpectrumFamily::shell_indicator, 0.5, 0.0, 2, 4),
                              build_spectrum(SpectrumFamily::power_law_exponent, 0.4, 0.0, 3, 3),
                              build_spectrum(SpectrumFamily::smooth_cutoff, 0.3, 0.0, 2, 4)}) {
            const double eps = epsilon_for_nu(s, nu);
            CHECK(std::abs(eps * corrector_constant(s) - nu) <= 1e-14 * nu);
        }
    }
}

TEST_CASE("H3 surrogate: shell ratio is 1/#support and strictly decreasing") {
    SpectrumSequence seq;
    seq.nu = 1.0;
    for (int n : {2, 4, 8}) {
        NoiseSpectrum s = build_spectrum(SpectrumFamily::shell_indicator, 1.0 / n, 0.0, 2, n);
        CHECK(s.concentration_ratio() == doctest::Approx(1.0 / s.theta.size()).epsilon(1e-15));
        seq.members.push_back(s);
    }
    CHECK_NOTHROW(validate_sequence(seq));

    // a non-decreasing ratio must be rejected
    SpectrumSequence bad;
    bad.nu = 1.0;
    bad.members = {seq.members[1], seq.members[1]};
    CHECK_THROWS_AS(validate_sequence(bad), ConfigError);
}

TEST_CASE("nu relation: epsilon E|W(1)|^2 = 2 d nu, so C(d) = 1/(2d)") {
    for (int dim : {2, 3}) {
        SpectrumSequence seq;
        seq.nu = 1.7;
        for (int n : {2, 3}) seq.members.push_back(
            build_spectrum(SpectrumFamily::shell_indicator, 1.0 / n, 0.0, dim, n));
        const auto rows = nu_relation_check(seq);
        for (const auto& r : rows) {
            CHECK(r.expected_noise_l2 == doctest::Approx(2.0 * (dim - 1) * r.sum_sq));
            CHECK(r.product == doctest::Approx(2.0 * dim * seq.nu).epsilon(1e-13));
            CHECK(r.c_dim == doctest::Approx(1.0 / (2.0 * dim)));
            CHECK(r.residual <= 1e-13 * seq.nu);
        }
    }
}

TEST_CASE("truncation tail: zero for exact cutoffs, small and decreasing for power laws") {
    // shell at alpha = 1/N truncated at N drops nothing
    NoiseSpectrum s = build_spectrum(SpectrumFamily::shell_indicator, 0.25, 0.0, 2, 4);
    CHECK(truncation_tail_bound(s) == 0.0);

    NoiseSpectrum p4 = build_spectrum(SpectrumFamily::power_law_exponent, 1.0, 0.0, 2, 4);
    NoiseSpectrum p8 = build_spectrum(SpectrumFamily::power_law_exponent, 1.0, 0.0, 2, 8);
    const double t4 = truncation_tail_bound(p4), t8 = truncation_tail_bound(p8);
    CHECK(t4 > 0.0);
    CHECK(t8 < t4);
    CHECK(t4 < 0.1 * p4.sum_sq);  // the kept mass dominates at this decay

    // the bound really is an upper bound: enlarging the cutoff recovers
    // at most tail_bound extra mass
    NoiseSpectrum wide = build_spectrum(SpectrumFamily::power_law_exponent, 1.0, 0.0, 2, 16);
    CHECK(wide.sum_sq - p4.sum_sq <= t4);

    CHECK(truncation_tail_bound(build_spectrum_explicit(
              2, {{mode(1, 0), 1.0}, {mode(-1, 0), 1.0}, {mode(0, 1), 1.0}, {mode(0, -1), 1.0}})) ==
          0.0);
}

TEST_CASE("sample_increments: conjugate symmetry is exact, moments are right") {
    NoiseSpectrum s = build_spectrum(SpectrumFamily::shell_indicator, 0.5, 0.0, 2, 2);
    const double dt = 0.01;
    const StreamKey key{987654321, 0};

    const int n_draws = 100000;
    const int nj = s.dim - 1;
    double sum_re = 0.0, sum_re2 = 0.0, sum_sq_re = 0.0, sum_sq_im = 0.0;
    double cov_conj = 0.0, cross = 0.0;
    for (int d = 0; d < n_draws; ++d) {
        const NoiseIncrements inc = sample_increments(s, dt, key, static_cast<std::uint64_t>(d));
        const Complex w = inc.at(0, 0);
        sum_re += w.real();
        sum_re2 += w.real() * w.real();
        // E[dW^2] = 0 (complex square), E[dW conj(dW)] = 2dt
        sum_sq_re += w.real() * w.real() - w.imag() * w.imag();
        sum_sq_im += 2.0 * w.real() * w.imag();
        cov_conj += std::norm(w);
        cross += w.real() * inc.at(1, 0).real();
        (void)nj;
    }
    const double mean_var = sum_re2 / n_draws;
    const double se_var = dt * std::sqrt(2.0 / n_draws);
    CHECK(std::abs(mean_var - dt) < 3.0 * se_var);

    // standard errors: mean of N(0,dt) has se sqrt(dt/n); products of two
    // such draws have variance dt^2
    CHECK(std::abs(sum_re / n_draws) < 3.0 * std::sqrt(dt / n_draws));
    const double se_prod = dt * std::sqrt(1.0 / n_draws);
    CHECK(std::abs(sum_sq_re / n_draws) < 3.0 * 2.0 * se_prod);
    CHECK(std::abs(sum_sq_im / n_draws) < 3.0 * 2.0 * se_prod);
    CHECK(std::abs(cov_conj / n_draws - 2.0 * dt) < 3.0 * 2.0 * se_var);
    CHECK(std::abs(cross / n_draws) < 3.0 * se_prod);
}

TEST_CASE("increments are reproducible and order-independent") {
    NoiseSpectrum s = build_spectrum(SpectrumFamily::shell_indicator, 1.0, 0.0, 2, 1);
    const StreamKey key{42, 7};
    const NoiseIncrements a = sample_increments(s, 0.5, key, 3);
    const NoiseIncrements b = sample_increments(s, 0.5, key, 3);
    REQUIRE(a.w.size() == b.w.size());
    for (size_t i = 0; i < a.w.size(); ++i) CHECK(a.w[i] == b.w[i]);

    const NoiseIncrements c = sample_increments(s, 0.5, StreamKey{42, 8}, 3);
    CHECK(c.w[0] != a.w[0]);
}
