#include <doctest.h>

#include "oracles.hpp"
#include "stle/parabolic.hpp"

using namespace stle;

namespace {

SpectralField cos_pair(const Mode& k, double amp = 0.5) {
    SpectralField f = SpectralField::scalar(2, 3);
    f.set_pair_scalar(k, amp);
    return f;
}

}  // namespace

TEST_CASE("heat_exact: identity at t = 0, closed-form decay, invariant mean") {
    SpectralField u0 = cos_pair(mode(1, 0));
    u0.set_scalar(mode(0, 0), 2.0);

    SpectralField id = heat_exact(u0, 1.0, 0.0);
    for (const auto& [k, v] : u0.coeffs()) CHECK(id.at(k)[0] == v[0]);

    SpectralField ht = heat_exact(u0, 1.0, 0.5);
    CHECK(ht.scalar_at(mode(1, 0)).real() ==
          doctest::Approx(0.5 * 0.60653065971263342).epsilon(1e-15));
    CHECK(ht.scalar_at(mode(0, 0)) == Complex(2.0, 0.0));
}

TEST_CASE("solve_parabolic with b = 0 reproduces heat_exact exactly") {
    SpectralField u0 = cos_pair(mode(1, 1), 0.3);
    for (auto scheme : {ParabolicScheme::etd2, ParabolicScheme::etd1}) {
        Trajectory traj = solve_parabolic(u0, {}, 2.0, 0.5, 0.01, 3, {0.0, 0.25, 0.5}, scheme);
        for (size_t i = 0; i < traj.times.size(); ++i) {
            SpectralField ref = heat_exact(u0, 2.0, traj.times[i]);
            for (const auto& [k, v] : ref.coeffs())
                CHECK(std::abs(traj.fields[i].scalar_at(k) - v[0]) < 1e-13);
        }
    }
}

TEST_CASE("etd1 converges at first order to the etd2 solution") {
    SpectralField braw = SpectralField::vector(2, 1);
    braw.set_pair(mode(0, 1), {Complex(0.2, 0.0), Complex(0, 0)});
    SpectralField b = leray_project(braw);
    SpectralField u0 = cos_pair(mode(1, 0), 0.5);
    Trajectory fine = solve_parabolic(u0, {{0.0, b}}, 1.0, 0.2, 1e-4, 3, {0.2});
    double err[2];
    int idx = 0;
    for (double dt : {4e-3, 1e-3}) {
        Trajectory t = solve_parabolic(u0, {{0.0, b}}, 1.0, 0.2, dt, 3, {0.2}, ParabolicScheme::etd1);
        double e = 0.0;
        for (const auto& [k, v] : fine.fields.back().coeffs())
            e = std::max(e, std::abs(t.fields.back().scalar_at(k) - v[0]));
        err[idx++] = e;
    }
    CHECK(err[1] < 0.35 * err[0]);  // ~ dt ratio of 1/4
}

TEST_CASE("large nu collapses the solution onto its mean") {
    SpectralField u0 = cos_pair(mode(1, 0), 0.5);
    u0.set_scalar(mode(0, 0), 1.5);
    Trajectory traj = solve_parabolic(u0, {}, 50.0, 0.5, 1e-3, 3, {0.5});
    const SpectralField& last = traj.fields.back();
    CHECK(std::abs(last.scalar_at(mode(0, 0)) - Complex(1.5, 0)) < 1e-12);
    CHECK(std::abs(last.scalar_at(mode(1, 0))) < 1e-10);
}

TEST_CASE("solve_parabolic matches a dense matrix-exponential oracle to 1e-8") {
    // cutoff-2 linear system du/dt = A u with A = -nu |k|^2 + transport.
    SpectralField braw = SpectralField::vector(2, 1);
    braw.set_pair(mode(0, 1), {Complex(0.05, 0.02), Complex(0, 0)});
    SpectralField b = leray_project(braw);
    SpectralField u0 = cos_pair(mode(1, 0), 0.5);
    const double nu = 1.0, T = 0.25;
    const int N = 2;

    Trajectory traj = solve_parabolic(u0, {{0.0, b}}, nu, T, 1e-4, N, {T});

    const auto modes = modes_in_ball(2, N, true);
    const int n = static_cast<int>(modes.size());
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = -nu * static_cast<double>(norm2(modes[i]));
        for (int l = 0; l < n; ++l) {
            Complex bl{};
            const CoeffVec bm = b.at(sub(modes[i], modes[l]));
            for (int c = 0; c < 2; ++c) bl += bm[c] * static_cast<double>(modes[l][c]);
            a(i, l) += Complex(0, 1) * bl;
        }
    }
    Eigen::VectorXcd x0 = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < n; ++i) x0(i) = u0.scalar_at(modes[i]);
    const Eigen::VectorXcd xT = oracles::expm(a * T) * x0;

    for (int i = 0; i < n; ++i)
        CHECK(std::abs(traj.fields.back().scalar_at(modes[i]) - xT(i)) < 1e-8);
}

TEST_CASE("divergence-free transport: L2 norm non-increasing, mean invariant") {
    SpectralField braw = SpectralField::vector(2, 1);
    braw.set_pair(mode(0, 1), {Complex(0.3, 0.0), Complex(0, 0)});
    SpectralField b = leray_project(braw);
    SpectralField u0 = cos_pair(mode(1, 0), 0.5);
    u0.set_scalar(mode(0, 0), 0.7);

    Trajectory traj =
        solve_parabolic(u0, {{0.0, b}}, 0.5, 1.0, 1e-3, 4, {0.0, 0.25, 0.5, 0.75, 1.0});
    for (size_t i = 1; i < traj.energy.size(); ++i)
        CHECK(traj.energy[i] <= traj.energy[i - 1] + 1e-12);
    for (const auto& f : traj.fields)
        CHECK(std::abs(f.scalar_at(mode(0, 0)) - Complex(0.7, 0)) < 1e-12);

    // dissipation rate: dE/dt = -2 nu sum |k|^2 |u_k|^2 when div b = 0
    const double dt_fine = 1e-3;
    Trajectory pairt = solve_parabolic(u0, {{0.0, b}}, 0.5, 0.5, dt_fine, 4, {0.25, 0.25 + dt_fine});
    const double discrete = (pairt.energy[1] - pairt.energy[0]) / dt_fine;
    double rate = 0.0;
    for (const auto& [k, v] : pairt.fields[0].coeffs())
        rate -= 2.0 * 0.5 * static_cast<double>(norm2(k)) * std::norm(v[0]);
    CHECK(discrete == doctest::Approx(rate).epsilon(0.01));
}

TEST_CASE("picard: b = 0 converges immediately to the free evolution") {
    SpectralField u0 = cos_pair(mode(1, 0), 0.5);
    PicardReport rep = picard_mild_check(u0, {}, 1.0, 0.2, 1e-2, 3, 3);
    CHECK(rep.iterate_distances.front() == 0.0);
    CHECK(rep.contracted);
    CHECK(rep.distance_to_solver < 1e-13);
}

TEST_CASE("picard: small smooth b contracts geometrically and matches the solver") {
    SpectralField braw = SpectralField::vector(2, 1);
    braw.set_pair(mode(0, 1), {Complex(0.01, 0.0), Complex(0, 0)});
    SpectralField b = leray_project(braw);
    SpectralField u0 = cos_pair(mode(1, 0), 0.5);

    PicardReport rep = picard_mild_check(u0, {{0.0, b}}, 1.0, 0.1, 1e-3, 3, 6);
    REQUIRE(rep.iterate_distances.size() == 6);
    // geometric decay of successive-iterate gaps until rounding noise
    for (size_t i = 0; i + 1 < rep.contraction_factors.size(); ++i) {
        if (rep.iterate_distances[i + 1] < 1e-14) break;
        CHECK(rep.contraction_factors[i] < 0.5);
    }
    CHECK(rep.contracted);
    CHECK(rep.distance_to_solver < 1e-6);
}
