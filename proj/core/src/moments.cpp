#include "stle/moments.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "stle/parallel.hpp"

namespace stle {

int QMatrix::index_of(const Mode& k) const {
    auto it = std::lower_bound(modes.begin(), modes.end(), k);
    if (it == modes.end() || *it != k) return -1;
    return static_cast<int>(it - modes.begin());
}

QMatrix build_q_matrix(const NoiseSpectrum& spectrum, double eps, int K) {
    if (K < 1) throw ConfigError("build_q_matrix: K must be >= 1");
    if (eps < 0.0) throw ConfigError("build_q_matrix: eps must be >= 0");
    QMatrix out;
    out.dim = spectrum.dim > 0 ? spectrum.dim : 2;
    out.K = K;
    out.epsilon = eps;
    out.modes = modes_in_ball(out.dim, K, /*include_zero=*/false);
    const int n = static_cast<int>(out.modes.size());
    out.q = Eigen::MatrixXd::Zero(n, n);

    const double c = spectrum.theta.empty() ? 0.0 : corrector_constant(spectrum);
    for (int i = 0; i < n; ++i) {
        const Mode& k = out.modes[i];
        out.q(i, i) = -2.0 * eps * c * static_cast<double>(norm2(k));
        for (const auto& [m, th] : spectrum.theta) {
            const Mode l = sub(k, m);
            if (is_zero(l)) continue;  // mode 0 is outside the system (and P_k k = 0 anyway)
            const int j = out.index_of(l);
            if (j < 0) continue;  // absorbing truncation
            const double mk = static_cast<double>(m[0]) * k[0] + static_cast<double>(m[1]) * k[1] +
                              static_cast<double>(m[2]) * k[2];
            const double p = static_cast<double>(norm2(k)) - mk * mk / static_cast<double>(norm2(m));
            if (p == 0.0) continue;
            out.q(i, j) += 2.0 * eps * th * th * p;
        }
    }

    const double r = spectrum.theta.empty() ? 0.0 : spectrum.support_radius;
    const double lim = static_cast<double>(K) - r;
    for (int i = 0; i < n; ++i)
        if (std::sqrt(static_cast<double>(norm2(out.modes[i]))) <= lim + 1e-12)
            out.interior.push_back(i);
    if (out.interior.empty())
        out.warning = "truncation radius K does not exceed the spectrum support radius: "
                      "no interior modes, every row leaks";
    return out;
}

MomentTrajectory integrate_moments(const QMatrix& q, const Eigen::VectorXd& x0, double T,
                                   double dt, const std::vector<double>& output_times) {
    const int n = static_cast<int>(q.modes.size());
    if (x0.size() != n) throw ContractError("integrate_moments: x0 size mismatch");
    if (!(dt > 0.0) || !(T > 0.0)) throw ConfigError("integrate_moments: need dt > 0, T > 0");
    const double max_diag = q.q.diagonal().cwiseAbs().maxCoeff();
    if (dt * max_diag > 0.5)
        throw ConfigError("integrate_moments: dt max|q_kk| > 0.5, refine the step");

    // Column-sum defects measure the flux absorbed by the truncation boundary.
    Eigen::VectorXd leak = -q.q.colwise().sum().transpose();

    const long steps = std::llround(T / dt);
    if (std::abs(steps * dt - T) > 1e-8 * std::max(1.0, T))
        throw ConfigError("integrate_moments: T must be an integral multiple of dt");

    std::vector<long> out_steps;
    for (double t : output_times)
        out_steps.push_back(std::max(0L, std::min(steps, static_cast<long>(std::llround(t / dt)))));
    std::sort(out_steps.begin(), out_steps.end());
    out_steps.erase(std::unique(out_steps.begin(), out_steps.end()), out_steps.end());

    MomentTrajectory traj;
    Eigen::VectorXd x = x0;
    double outflux = 0.0;
    size_t next = 0;
    const auto emit = [&](long s) {
        while (next < out_steps.size() && out_steps[next] == s) {
            traj.times.push_back(s * dt);
            traj.x.push_back(x);
            traj.boundary_outflux.push_back(outflux);
            ++next;
        }
    };
    emit(0);

    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (long s = 0; s < steps; ++s) {
        k1 = q.q * x;
        tmp = x + 0.5 * dt * k1;
        k2 = q.q * tmp;
        tmp = x + 0.5 * dt * k2;
        k3 = q.q * tmp;
        tmp = x + dt * k3;
        k4 = q.q * tmp;
        // Same RK4 quadrature for the scalar outflux rate leak . x.
        const double o1 = leak.dot(x);
        const double o2 = leak.dot(x + 0.5 * dt * k1);
        const double o3 = leak.dot(x + 0.5 * dt * k2);
        const double o4 = leak.dot(x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        outflux += dt / 6.0 * (o1 + 2.0 * o2 + 2.0 * o3 + o4);
        if (x.minCoeff() < -1e-10)
            throw Error("integrate_moments: negative moment beyond tolerance at t = " +
                        std::to_string((s + 1) * dt));
        emit(s + 1);
    }
    return traj;
}

StationarityReport stationarity_check(const QMatrix& q) {
    StationarityReport rep;
    const int n = static_cast<int>(q.modes.size());
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd r = q.q * ones;
    double worst = 0.0;
    for (int i : q.interior) worst = std::max(worst, std::abs(r(i)));
    rep.interior_residual_of_ones = worst;
    rep.constant_vector_stationary_on_interior = worst <= 1e-10 * std::max(1.0, q.q.cwiseAbs().maxCoeff());

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(q.q);
    rep.smallest_singular_value = svd.singularValues().minCoeff();
    rep.truncated_kernel_trivial =
        rep.smallest_singular_value > 1e-12 * std::max(1.0, svd.singularValues().maxCoeff());
    rep.note =
        "constants are row-stationary on the interior but not summable over Z^d_0, "
        "so the only nonnegative summable stationary vector is 0";
    return rep;
}

MomentComparison moments_vs_montecarlo(const SdeRunConfig& config, const SpectralField& u0,
                                       int m_paths, const std::vector<double>& checkpoints,
                                       int threads) {
    if (!config.drift.empty())
        throw ContractError("moments_vs_montecarlo: requires b = 0 (the moment system is closed only then)");
    if (m_paths < 2) throw ConfigError("moments_vs_montecarlo: need at least 2 paths");

    SdeRunConfig cfg = config;
    cfg.output_times = checkpoints;
    const GalerkinEngine engine(cfg, u0);

    // Representative modes carry all information: |u_{-k}|^2 = |u_k|^2.
    std::vector<Mode> reps;
    for (const Mode& k : engine.modes())
        if (in_half_lattice(k)) reps.push_back(k);
    const size_t nrep = reps.size(), nout = engine.output_steps().size();

    std::vector<double> sum(nrep * nout, 0.0), sumsq(nrep * nout, 0.0);
    std::vector<double> esum(nout, 0.0), esumsq(nout, 0.0);
    std::vector<double> times(nout, 0.0);
    for (size_t oi = 0; oi < nout; ++oi) times[oi] = engine.output_steps()[oi] * cfg.dt;

    // Per-path slots, reduced in path order: independent of scheduling.
    const size_t stride = nrep * nout + nout;
    std::vector<double> slots(static_cast<size_t>(m_paths) * stride, 0.0);
    parallel_for(m_paths, threads, [&](long p) {
        double* slot = &slots[static_cast<size_t>(p) * stride];
        engine.run_path(static_cast<std::uint64_t>(p),
                        [&](int oi, double, const std::vector<Complex>& state) {
                            for (size_t r = 0; r < nrep; ++r)
                                slot[r * nout + oi] = std::norm(engine.coeff_of(state, reps[r]));
                            slot[nrep * nout + oi] = engine.energy_of(state);
                        });
    });
    for (int p = 0; p < m_paths; ++p) {
        const double* slot = &slots[static_cast<size_t>(p) * stride];
        for (size_t i = 0; i < nrep * nout; ++i) {
            sum[i] += slot[i];
            sumsq[i] += slot[i] * slot[i];
        }
        for (size_t i = 0; i < nout; ++i) {
            esum[i] += slot[nrep * nout + i];
            esumsq[i] += slot[nrep * nout + i] * slot[nrep * nout + i];
        }
    }

    // The truncated moment system with K = cutoff matches the simulated
    // Galerkin system exactly; discrepancies are MC + time-stepping error.
    const QMatrix q = build_q_matrix(cfg.spectrum, cfg.epsilon, cfg.cutoff);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(q.modes.size());
    for (size_t i = 0; i < q.modes.size(); ++i) x0(i) = std::norm(u0.scalar_at(q.modes[i]));
    // Refine the engine grid so checkpoints land on both grids exactly.
    const double max_diag = std::max(1e-300, q.q.diagonal().cwiseAbs().maxCoeff());
    const double target = std::min({cfg.dt, 1e-3, 0.4 / max_diag});
    const double ode_dt = cfg.dt / std::ceil(cfg.dt / target - 1e-12);
    const MomentTrajectory ode = integrate_moments(q, x0, cfg.T, ode_dt, checkpoints);

    MomentComparison cmp;
    cmp.paths = m_paths;
    const double M = static_cast<double>(m_paths);
    for (size_t r = 0; r < nrep; ++r) {
        const int qi = q.index_of(reps[r]);
        const bool interior =
            qi >= 0 && std::find(q.interior.begin(), q.interior.end(), qi) != q.interior.end();
        for (size_t oi = 0; oi < nout; ++oi) {
            MomentComparisonRow row;
            row.k = reps[r];
            row.t = times[oi];
            row.mc_mean = sum[r * nout + oi] / M;
            const double var =
                std::max(0.0, (sumsq[r * nout + oi] - M * row.mc_mean * row.mc_mean) / (M - 1.0));
            row.mc_stderr = std::sqrt(var / M);
            row.ode_value = qi >= 0 ? ode.x[oi](qi) : 0.0;
            row.interior = interior;
            const double diff = row.mc_mean - row.ode_value;
            row.z = row.mc_stderr > 0.0 ? diff / row.mc_stderr : (std::abs(diff) < 1e-13 ? 0.0 : 1e300);
            cmp.rows.push_back(row);
            if (interior) cmp.max_interior_abs_z = std::max(cmp.max_interior_abs_z, std::abs(row.z));
        }
    }
    const size_t last = nout - 1;
    cmp.total_energy_mc = esum[last] / M;
    const double evar = std::max(0.0, (esumsq[last] - M * cmp.total_energy_mc * cmp.total_energy_mc) / (M - 1.0));
    cmp.total_energy_mc_stderr = std::sqrt(evar / M);
    // Mode 0 is invariant and not part of the moment system.
    cmp.total_energy_ode = ode.x[last].sum() + std::norm(u0.scalar_at({0, 0, 0}));
    return cmp;
}

}  // namespace stle
