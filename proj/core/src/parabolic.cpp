#include "stle/parabolic.hpp"

#include <algorithm>
#include <cmath>

namespace stle {

namespace {

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2, stable near z = 0.
double phi1(double z) {
    if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
    return std::expm1(z) / z;
}

double phi2(double z) {
    if (std::abs(z) < 1e-4) return 0.5 + z / 6.0 + z * z / 24.0;
    return (std::expm1(z) - z) / (z * z);
}

const SpectralField* snapshot_at(const DriftSnapshots& b, double t) {
    const SpectralField* cur = nullptr;
    for (const auto& [ts, f] : b)
        if (ts <= t + 1e-12) cur = &f;
    return cur;
}

double l2_distance(const SpectralField& f, const SpectralField& g) {
    double s = 0.0;
    for (const auto& [k, v] : f.coeffs()) s += std::norm(v[0] - g.scalar_at(k));
    for (const auto& [k, v] : g.coeffs())
        if (f.coeffs().find(k) == f.coeffs().end()) s += std::norm(v[0]);
    return std::sqrt(s);
}

}  // namespace

SpectralField heat_exact(const SpectralField& u0, double nu, double t) {
    if (nu < 0.0 || t < 0.0) throw ContractError("heat_exact: nu and t must be >= 0");
    SpectralField out(u0.dim(), u0.ncomp(), u0.cutoff());
    for (const auto& [k, v] : u0.coeffs()) {
        const double f = std::exp(-nu * static_cast<double>(norm2(k)) * t);
        CoeffVec w = v;
        for (int i = 0; i < u0.ncomp(); ++i) w[i] *= f;
        out.set(k, w);
    }
    return out;
}

Trajectory solve_parabolic(const SpectralField& u0, const DriftSnapshots& b, double nu, double T,
                           double dt, int N, const std::vector<double>& output_times,
                           ParabolicScheme scheme) {
    if (!(nu > 0.0)) throw ConfigError("solve_parabolic: nu must be > 0");
    if (!(dt > 0.0) || !(T > 0.0)) throw ConfigError("solve_parabolic: need dt > 0, T > 0");
    if (!u0.is_scalar()) throw ContractError("solve_parabolic: u0 must be scalar");
    const long steps = std::llround(T / dt);
    if (std::abs(steps * dt - T) > 1e-8 * std::max(1.0, T))
        throw ConfigError("solve_parabolic: T must be an integral multiple of dt");

    SpectralField u = project_modes(u0, N);
    std::vector<long> out_steps;
    for (double t : output_times)
        out_steps.push_back(std::max(0L, std::min(steps, static_cast<long>(std::llround(t / dt)))));
    std::sort(out_steps.begin(), out_steps.end());
    out_steps.erase(std::unique(out_steps.begin(), out_steps.end()), out_steps.end());

    Trajectory traj;
    size_t next = 0;
    const auto emit = [&](long s) {
        while (next < out_steps.size() && out_steps[next] == s) {
            traj.times.push_back(s * dt);
            traj.energy.push_back(u.energy());
            traj.fields.push_back(u);
            ++next;
        }
    };
    emit(0);

    for (long s = 0; s < steps; ++s) {
        const double t = s * dt;
        const SpectralField* b0 = snapshot_at(b, t);
        SpectralField f0 = b0 ? transport_convolution(*b0, u, N) : SpectralField::scalar(u.dim(), N);

        // Predictor: exact diffusion factor plus phi1-weighted transport.
        SpectralField pred = SpectralField::scalar(u.dim(), N);
        for (const auto& [k, v] : u.coeffs()) {
            const double z = -nu * static_cast<double>(norm2(k)) * dt;
            const Complex w = std::exp(z) * v[0] + dt * phi1(z) * f0.scalar_at(k);
            if (w != Complex{}) pred.set_scalar(k, w);
        }
        for (const auto& [k, v] : f0.coeffs()) {
            if (u.coeffs().find(k) != u.coeffs().end()) continue;
            const double z = -nu * static_cast<double>(norm2(k)) * dt;
            pred.set_scalar(k, dt * phi1(z) * v[0]);
        }

        if (scheme == ParabolicScheme::etd2) {
            const SpectralField* b1 = snapshot_at(b, t + dt);
            SpectralField f1 =
                b1 ? transport_convolution(*b1, pred, N) : SpectralField::scalar(u.dim(), N);
            for (const auto& [k, v] : f1.coeffs()) {
                const double z = -nu * static_cast<double>(norm2(k)) * dt;
                const Complex corr = dt * phi2(z) * (v[0] - f0.scalar_at(k));
                if (corr != Complex{}) pred.set_scalar(k, pred.scalar_at(k) + corr);
            }
            for (const auto& [k, v] : f0.coeffs()) {
                if (f1.coeffs().find(k) != f1.coeffs().end()) continue;
                const double z = -nu * static_cast<double>(norm2(k)) * dt;
                pred.set_scalar(k, pred.scalar_at(k) - dt * phi2(z) * v[0]);
            }
        }
        u = std::move(pred);
        emit(s + 1);
    }
    return traj;
}

PicardReport picard_mild_check(const SpectralField& u0, const DriftSnapshots& b, double nu,
                               double T, double dt, int N, int iterations) {
    if (iterations < 1) throw ConfigError("picard_mild_check: iterations must be >= 1");
    const long steps = std::llround(T / dt);
    if (std::abs(steps * dt - T) > 1e-8 * std::max(1.0, T))
        throw ConfigError("picard_mild_check: T must be an integral multiple of dt");

    // widen the container to the working cutoff so quadrature terms fit
    SpectralField u0n = SpectralField::scalar(u0.dim(), N);
    const SpectralField u0p = project_modes(u0, N);
    for (const auto& [k, v] : u0p.coeffs()) u0n.set(k, v);
    const size_t nt = static_cast<size_t>(steps) + 1;

    // Free evolution P_t u0 doubles as the initial iterate.
    std::vector<SpectralField> cur;
    cur.reserve(nt);
    for (size_t j = 0; j < nt; ++j) cur.push_back(heat_exact(u0n, nu, j * dt));
    const std::vector<SpectralField> free_part = cur;

    PicardReport rep;
    std::vector<SpectralField> transported;
    transported.reserve(nt);
    for (int it = 0; it < iterations; ++it) {
        transported.clear();
        for (size_t j = 0; j < nt; ++j) {
            const SpectralField* bs = snapshot_at(b, j * dt);
            transported.push_back(bs ? transport_convolution(*bs, cur[j], N)
                                     : SpectralField::scalar(u0.dim(), N));
        }
        std::vector<SpectralField> nextv;
        nextv.reserve(nt);
        for (size_t j = 0; j < nt; ++j) {
            SpectralField acc = free_part[j];
            // Composite trapezoid in s over [0, t_j] with exact heat factors.
            for (size_t s = 0; j > 0 && s <= j; ++s) {
                const double w = (s == 0 || s == j) ? 0.5 * dt : dt;
                SpectralField term = heat_exact(transported[s], nu, (j - s) * dt);
                term *= w;
                acc += term;
            }
            nextv.push_back(std::move(acc));
        }
        double gap = 0.0;
        for (size_t j = 0; j < nt; ++j) gap = std::max(gap, l2_distance(nextv[j], cur[j]));
        rep.iterate_distances.push_back(gap);
        cur = std::move(nextv);
    }
    for (size_t i = 1; i < rep.iterate_distances.size(); ++i) {
        const double prev = rep.iterate_distances[i - 1];
        rep.contraction_factors.push_back(prev > 0.0 ? rep.iterate_distances[i] / prev : 0.0);
    }
    rep.contracted = rep.iterate_distances.back() <=
                     1e-12 + 1e-6 * rep.iterate_distances.front();

    std::vector<double> out_times;
    for (size_t j = 0; j < nt; ++j) out_times.push_back(j * dt);
    const Trajectory solver = solve_parabolic(u0, b, nu, T, dt, N, out_times);
    double worst = 0.0;
    for (size_t j = 0; j < nt; ++j) worst = std::max(worst, l2_distance(cur[j], solver.fields[j]));
    rep.distance_to_solver = worst;
    return rep;
}

}  // namespace stle
