#include "stle/one_dim.hpp"

#include <algorithm>
#include <cmath>

#include "stle/parallel.hpp"

namespace stle {

double RealField1D::energy() const {
    double s = 0.0;
    for (const auto& [k, v] : c) s += v * v;
    return s;
}

int RealField1D::radius() const {
    int r = 0;
    for (const auto& [k, v] : c) r = std::max(r, std::abs(k));
    return r;
}

std::vector<std::pair<int, double>> basis_product_1d(int a, int b) {
    if (a == 0) return {{b, 1.0}};
    if (b == 0) return {{a, 1.0}};
    const double r = 1.0 / std::sqrt(2.0);
    int m = std::abs(a), n = std::abs(b);
    std::vector<std::pair<int, double>> out;
    if (a > 0 && b > 0) {
        out.push_back({m + n, r});
        if (m != n)
            out.push_back({std::abs(m - n), r});
        else
            out.push_back({0, 1.0});
    } else if (a < 0 && b < 0) {
        if (m != n)
            out.push_back({std::abs(m - n), r});
        else
            out.push_back({0, 1.0});
        out.push_back({m + n, -r});
    } else {
        if (a < 0) std::swap(m, n);  // m: cosine index, n: sine index
        out.push_back({-(m + n), r});
        if (m > n)
            out.push_back({n - m, -r});
        else if (m < n)
            out.push_back({m - n, r});
    }
    return out;
}

RealField1D derivative_1d(const RealField1D& u) {
    RealField1D out;
    for (const auto& [k, v] : u.c)
        if (k != 0) out.add(-k, k * v);  // e_k' = k e_{-k}
    return out;
}

RealField1D multiply_1d(const RealField1D& b, const RealField1D& u, int cutoff) {
    RealField1D out;
    for (const auto& [a, ba] : b.c)
        for (const auto& [l, ul] : u.c)
            for (const auto& [idx, w] : basis_product_1d(a, l))
                if (std::abs(idx) <= cutoff) out.add(idx, ba * ul * w);
    return out;
}

double evaluate_1d(const RealField1D& u, double x) {
    double s = 0.0;
    const double sq2 = std::sqrt(2.0);
    for (const auto& [k, v] : u.c) {
        if (k > 0)
            s += v * sq2 * std::cos(k * x);
        else if (k == 0)
            s += v;
        else
            s += v * sq2 * std::sin(k * x);
    }
    return s;
}

Spectrum1D build_spectrum_1d(const std::map<int, double>& lambda) {
    Spectrum1D s;
    for (const auto& [k, v] : lambda) {
        if (k == 0 && v != 0.0) throw ConfigError("spectrum 1d: lambda_0 must be 0");
        if (v == 0.0) continue;
        s.lambda[k] = v;
    }
    for (const auto& [k, v] : s.lambda) {
        if (s.lambda_at(-k) != v)
            throw ConfigError("spectrum 1d: lambda_k = lambda_{-k} violated at k = " +
                              std::to_string(k));
        s.sum_sq += v * v;
        s.sum_k2 += static_cast<double>(k) * k * v * v;
        s.sup_k2 = std::max(s.sup_k2, static_cast<double>(k) * k * v * v);
        s.support.push_back(k);
    }
    std::sort(s.support.begin(), s.support.end());
    return s;
}

Spectrum1D shell_spectrum_1d(int n) {
    if (n < 1) throw ConfigError("shell_spectrum_1d: n >= 1 required");
    std::map<int, double> l;
    for (int k = 1; k <= n; ++k) {
        l[k] = 1.0;
        l[-k] = 1.0;
    }
    return build_spectrum_1d(l);
}

RealField1D apply_Mk(const RealField1D& u, int k, double lambda_k, int cutoff) {
    // M_k u = lambda_k (2 e_k u' + e_k' u), with e_k' = k e_{-k}.
    RealField1D out;
    if (lambda_k == 0.0) return out;
    const RealField1D du = derivative_1d(u);
    RealField1D ek;
    ek.set(k, 2.0 * lambda_k);
    out = multiply_1d(ek, du, cutoff);
    RealField1D dek;
    dek.set(-k, lambda_k * k);
    RealField1D second = multiply_1d(dek, u, cutoff);
    for (const auto& [idx, v] : second.c) out.add(idx, v);
    return out;
}

std::pair<double, double> ito_corrector_1d(const Spectrum1D& s) {
    return {0.5 * s.sum_k2, 2.0 * s.sum_sq};
}

double epsilon_1d(const Spectrum1D& s, double nu) {
    if (!(nu > 0.0)) throw ConfigError("epsilon_1d: nu must be > 0");
    if (!(s.sum_k2 > 0.0)) throw ConfigError("epsilon_1d: zero spectrum");
    return 2.0 * nu / s.sum_k2;
}

void Config1D::validate() const {
    if (cutoff < 1) throw ConfigError("config1d.cutoff: must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("config1d.dt: must be > 0");
    if (!(T > 0.0)) throw ConfigError("config1d.T: must be > 0");
    if (epsilon < 0.0) throw ConfigError("config1d.epsilon: must be >= 0");
    const double steps = T / dt;
    if (std::abs(steps - std::llround(steps)) > 1e-8 * std::max(1.0, steps))
        throw ConfigError("config1d.T: must be an integral multiple of dt");
    if (noise_substeps < 1) throw ConfigError("config1d.noise_substeps: must be >= 1");
    if (epsilon > 0.0) {
        const auto [fr, di] = ito_corrector_1d(spectrum);
        const double rate = epsilon * (fr + di * static_cast<double>(cutoff) * cutoff);
        if (rate * dt > 0.5)
            throw ConfigError("config1d.dt: corrector CFL violated, use dt <= " +
                              std::to_string(0.5 / rate));
    }
}

Engine1D::Engine1D(const Config1D& config, const RealField1D& u0) : config_(config) {
    config_.validate();
    if (u0.radius() > config_.cutoff)
        throw ContractError("Engine1D: u0 support exceeds the cutoff");
    n_ = 2 * config_.cutoff + 1;
    u0_.assign(n_, 0.0);
    for (const auto& [k, v] : u0.c) u0_[k + config_.cutoff] = v;

    sqrt_eps_ = std::sqrt(config_.epsilon);
    const auto [friction, diffusion] = ito_corrector_1d(config_.spectrum);
    diag_.assign(n_, 0.0);
    for (int k = -config_.cutoff; k <= config_.cutoff; ++k)
        diag_[k + config_.cutoff] =
            -config_.epsilon * (friction + diffusion * static_cast<double>(k) * k);

    // b u_x = sum_a sum_l b_a u_l l (e_a e_{-l}).
    for (const auto& [a, ba] : config_.drift_b.c)
        for (int l = -config_.cutoff; l <= config_.cutoff; ++l) {
            if (l == 0) continue;
            for (const auto& [idx, w] : basis_product_1d(a, -l))
                if (std::abs(idx) <= config_.cutoff)
                    transport_.push_back({idx + config_.cutoff, l + config_.cutoff,
                                          ba * static_cast<double>(l) * w});
        }

    for (int s = 0; s < static_cast<int>(config_.spectrum.support.size()); ++s) {
        const int k = config_.spectrum.support[s];
        const double lk = config_.spectrum.lambda_at(k);
        std::vector<Term> plan;
        for (int l = -config_.cutoff; l <= config_.cutoff; ++l) {
            RealField1D unit;
            unit.set(l, 1.0);
            const RealField1D img = apply_Mk(unit, k, lk, config_.cutoff);
            for (const auto& [idx, v] : img.c)
                plan.push_back({idx + config_.cutoff, l + config_.cutoff, v});
        }
        noise_ops_.push_back(std::move(plan));
    }

    n_steps_ = std::llround(config_.T / config_.dt);
    for (double t : config_.output_times) {
        long s = std::llround(t / config_.dt);
        output_steps_.push_back(std::max(0L, std::min(n_steps_, s)));
    }
    std::sort(output_steps_.begin(), output_steps_.end());
    output_steps_.erase(std::unique(output_steps_.begin(), output_steps_.end()),
                        output_steps_.end());
}

void Engine1D::apply_sparse(const std::vector<Term>& plan, const std::vector<double>& u,
                            std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (const Term& t : plan) out[t.out] += t.coeff * u[t.in];
}

void Engine1D::run_path(std::uint64_t path_id, const Observer& observe) const {
    std::vector<double> u = u0_, tr(n_), g(n_), tmp(n_), pred(n_), tr2(n_), g2(n_);
    std::vector<double> dw(config_.spectrum.support.size(), 0.0);
    const double dt = config_.dt;
    const StreamKey key{config_.seed, path_id};
    const bool with_noise = config_.epsilon > 0.0 && !config_.test_zero_noise &&
                            !config_.spectrum.support.empty();

    size_t next_out = 0;
    const auto emit = [&](long step) {
        while (next_out < output_steps_.size() && output_steps_[next_out] == step) {
            observe(static_cast<int>(next_out), step * dt, u);
            ++next_out;
        }
    };
    emit(0);

    const auto noise_sum = [&](const std::vector<double>& state, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (size_t s = 0; s < noise_ops_.size(); ++s) {
            const double w = sqrt_eps_ * dw[s];
            if (w == 0.0) continue;
            for (const Term& t : noise_ops_[s]) out[t.out] += w * t.coeff * state[t.in];
        }
    };

    const int sub = config_.noise_substeps;
    const double dt_sub = dt / sub;
    for (long s = 0; s < n_steps_; ++s) {
        if (with_noise)
            for (size_t i = 0; i < dw.size(); ++i) {
                double acc = 0.0;
                for (int q = 0; q < sub; ++q)
                    acc += real_increment(key, static_cast<std::uint64_t>(s) * sub + q, i, dt_sub);
                dw[i] = acc;
            }

        apply_sparse(transport_, u, tr);
        if (with_noise)
            noise_sum(u, g);
        else
            std::fill(g.begin(), g.end(), 0.0);

        if (config_.scheme == Scheme::euler_maruyama) {
            for (int i = 0; i < n_; ++i) u[i] += dt * (tr[i] + diag_[i] * u[i]) + g[i];
        } else {
            for (int i = 0; i < n_; ++i) pred[i] = u[i] + dt * tr[i] + g[i];
            apply_sparse(transport_, pred, tr2);
            if (with_noise)
                noise_sum(pred, g2);
            else
                std::fill(g2.begin(), g2.end(), 0.0);
            for (int i = 0; i < n_; ++i)
                u[i] += 0.5 * dt * (tr[i] + tr2[i]) + 0.5 * (g[i] + g2[i]);
        }

        double e = 0.0;
        for (double v : u) e += v * v;
        if (!std::isfinite(e))
            throw BlowUpError("1d blow-up: non-finite coefficient at step " + std::to_string(s + 1),
                              s + 1);
        emit(s + 1);
    }
}

Trajectory1D Engine1D::run(std::uint64_t path_id) const {
    Trajectory1D traj;
    run_path(path_id, [&](int, double t, const std::vector<double>& state) {
        traj.times.push_back(t);
        traj.energy.push_back(energy_of(state));
        RealField1D f;
        for (int k = -config_.cutoff; k <= config_.cutoff; ++k)
            if (state[k + config_.cutoff] != 0.0) f.set(k, state[k + config_.cutoff]);
        traj.fields.push_back(std::move(f));
    });
    return traj;
}

double Engine1D::coeff_of(const std::vector<double>& state, int k) const {
    if (std::abs(k) > config_.cutoff) return 0.0;
    return state[k + config_.cutoff];
}

double Engine1D::energy_of(const std::vector<double>& state) const {
    double e = 0.0;
    for (double v : state) e += v * v;
    return e;
}

Trajectory1D simulate_1d(const Config1D& config, const RealField1D& u0) {
    return Engine1D(config, u0).run(config.path_id);
}

FrictionTable run_friction_limit(const FrictionLimitConfig& config) {
    if (config.sequence.empty()) throw ConfigError("friction.sequence: empty");
    if (!(config.nu > 0.0)) throw ConfigError("friction.nu: must be > 0");
    if (config.m_paths < 2) throw ConfigError("friction.m_paths: need at least 2 paths");
    if (!config.drift_b.c.empty())
        throw ConfigError("friction: the e^{-nu t} reference requires b = 0");

    // The d=1 analogue of (H3): sup k^2 lambda^2 / sum k^2 lambda^2 decreasing.
    double prev_ratio = 2.0;
    for (const auto& s : config.sequence) {
        const double r = s.concentration_ratio();
        if (!(r < prev_ratio))
            throw ConfigError("friction.sequence: k^2-weighted ratio not strictly decreasing");
        prev_ratio = r;
        // sum lambda^2 <= sup|k lambda|^2 * sum 1/k^2; the full lattice sum is pi^2/3.
        if (s.sum_sq > s.sup_k2 * (M_PI * M_PI / 3.0) * (1.0 + 1e-12))
            throw Error("friction.sequence: 1d summability inequality violated");
    }

    FrictionTable table;
    table.n_phis = config.test_modes.size();
    for (int j = 0; j <= config.checkpoints; ++j)
        table.checkpoint_times.push_back(config.T * j / config.checkpoints);
    const double ck_spacing = config.T / config.checkpoints;

    std::vector<int> fit_modes;  // u0 support, used for the decay-rate fit
    for (const auto& [k, v] : config.u0.c) fit_modes.push_back(k);

    int member_idx = 0;
    for (const Spectrum1D& spec : config.sequence) {
        const double eps = epsilon_1d(spec, config.nu);
        const auto [friction, diffusion] = ito_corrector_1d(spec);
        const int support_radius = spec.support.empty() ? 0 : std::abs(spec.support.back());

        Config1D run;
        run.cutoff = support_radius + config.u0.radius() + config.extra_cutoff;
        run.spectrum = spec;
        run.epsilon = eps;
        run.T = config.T;
        const double rate = eps * (friction + diffusion * static_cast<double>(run.cutoff) * run.cutoff);
        const long per_ck =
            std::max(1L, static_cast<long>(std::ceil(ck_spacing / (config.cfl / rate) - 1e-12)));
        run.dt = ck_spacing / per_ck;
        run.seed = mix64(config.seed ^ (0x9216d5d98979fb1bULL + member_idx));
        run.output_times = table.checkpoint_times;
        const Engine1D engine(run, config.u0);

        const size_t nout = engine.output_steps().size();
        const size_t n_phi = config.test_modes.size();
        // Per-path slots, reduced in path order: independent of scheduling.
        const size_t stride = n_phi * nout + fit_modes.size();
        std::vector<double> slots(static_cast<size_t>(config.m_paths) * stride, 0.0);
        parallel_for(config.m_paths, config.threads, [&](long path) {
            double* slot = &slots[static_cast<size_t>(path) * stride];
            engine.run_path(static_cast<std::uint64_t>(path),
                            [&](int oi, double, const std::vector<double>& state) {
                                for (size_t p = 0; p < n_phi; ++p)
                                    slot[p * nout + oi] =
                                        engine.coeff_of(state, config.test_modes[p]);
                                if (oi == static_cast<int>(nout) - 1)
                                    for (size_t f = 0; f < fit_modes.size(); ++f)
                                        slot[n_phi * nout + f] =
                                            engine.coeff_of(state, fit_modes[f]);
                            });
        });

        // Fit mean decay rates against k^2: rate_k = nu + eps*diffusion*k^2.
        const double M = static_cast<double>(config.m_paths);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n_fit = 0;
        for (size_t f = 0; f < fit_modes.size(); ++f) {
            double mean = 0.0;
            for (int p = 0; p < config.m_paths; ++p)
                mean += slots[static_cast<size_t>(p) * stride + n_phi * nout + f];
            mean /= M;
            const double init = config.u0.at(fit_modes[f]);
            if (init == 0.0 || mean / init < 0.05) continue;  // no usable signal
            const double r = -std::log(mean / init) / config.T;
            const double x = static_cast<double>(fit_modes[f]) * fit_modes[f];
            sx += x;
            sy += r;
            sxx += x * x;
            sxy += x * r;
            ++n_fit;
        }
        double slope = 0.0, intercept = 0.0;
        if (n_fit >= 2 && sxx * n_fit - sx * sx > 0.0) {
            slope = (n_fit * sxy - sx * sy) / (n_fit * sxx - sx * sx);
            intercept = (sy - slope * sx) / n_fit;
        }

        for (size_t p = 0; p < n_phi; ++p) {
            FrictionRow row;
            row.member = member_idx;
            row.epsilon = eps;
            row.sum_sq = spec.sum_sq;
            row.sum_k2 = spec.sum_k2;
            row.ratio = spec.concentration_ratio();
            row.eps_friction = eps * friction;
            row.eps_diffusion = eps * diffusion;
            row.phi = "e_" + std::to_string(config.test_modes[p]);
            row.m_paths = config.m_paths;
            row.measured_diffusion = slope;
            row.measured_friction = intercept;

            const double phi0 = config.u0.at(config.test_modes[p]);
            double dist_sum = 0.0, dist_max = 0.0, var_sup = 0.0;
            for (int path = 0; path < config.m_paths; ++path) {
                const double* slot = &slots[static_cast<size_t>(path) * stride];
                double sup = 0.0;
                for (size_t oi = 0; oi < nout; ++oi) {
                    const double ref = std::exp(-config.nu * table.checkpoint_times[oi]) * phi0;
                    sup = std::max(sup, std::abs(slot[p * nout + oi] - ref));
                }
                dist_sum += sup;
                dist_max = std::max(dist_max, sup);
            }
            row.dist_path_mean = dist_sum / M;
            row.dist_path_max = dist_max;
            for (size_t oi = 0; oi < nout; ++oi) {
                double sum = 0.0, sumsq = 0.0;
                for (int path = 0; path < config.m_paths; ++path) {
                    const double v = slots[static_cast<size_t>(path) * stride + p * nout + oi];
                    sum += v;
                    sumsq += v * v;
                }
                const double mean = sum / M;
                var_sup = std::max(var_sup, std::max(0.0, (sumsq - M * mean * mean) / (M - 1.0)));
            }
            row.var_sup_t = var_sup;
            table.rows.push_back(row);
        }
        ++member_idx;
    }
    return table;
}

}  // namespace stle
