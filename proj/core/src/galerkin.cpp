#include "stle/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace stle {

std::string scheme_name(Scheme s) {
    return s == Scheme::euler_maruyama ? "euler_maruyama" : "heun_stratonovich";
}

Scheme scheme_from_name(const std::string& s) {
    if (s == "euler_maruyama") return Scheme::euler_maruyama;
    if (s == "heun_stratonovich") return Scheme::heun_stratonovich;
    throw ConfigError("unknown scheme: " + s);
}

void SdeRunConfig::validate() const {
    if (dim < 2 || dim > 3) throw ConfigError("config.dim: must be 2 or 3");
    if (cutoff < 1) throw ConfigError("config.cutoff: must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("config.dt: must be > 0");
    if (!(T > 0.0)) throw ConfigError("config.T: must be > 0");
    if (epsilon < 0.0) throw ConfigError("config.epsilon: must be >= 0");
    if (epsilon > 0.0 && spectrum.theta.empty())
        throw ConfigError("config.spectrum: empty but epsilon > 0");
    if (!spectrum.theta.empty() && spectrum.dim != dim)
        throw ConfigError("config.spectrum: dimension mismatch");

    if (epsilon > 0.0) {
        const double c = corrector_constant(spectrum);
        const double cfl = epsilon * c * static_cast<double>(cutoff) * cutoff * dt;
        if (cfl > 0.5) {
            std::ostringstream os;
            os << "config.dt: diffusion CFL violated, eps*c*N^2*dt = " << cfl
               << " > 0.5; use dt <= " << 0.5 / (epsilon * c * cutoff * cutoff);
            throw ConfigError(os.str());
        }
    }
    const double steps = T / dt;
    if (std::abs(steps - std::llround(steps)) > 1e-8 * std::max(1.0, steps))
        throw ConfigError("config.T: must be an integral multiple of dt");
    if (noise_substeps < 1) throw ConfigError("config.noise_substeps: must be >= 1");

    double prev = -1e300;
    for (const auto& [t, b] : drift) {
        if (t <= prev) throw ConfigError("config.drift: snapshot times must increase");
        prev = t;
        if (b.is_scalar()) throw ConfigError("config.drift: b must be a vector field");
        if (b.dim() != dim) throw ConfigError("config.drift: dimension mismatch");
        if (!is_hermitian(b)) throw ConfigError("config.drift: b is not Hermitian-symmetric");
        if (drift_divergence_free && !is_divergence_free(b))
            throw ConfigError("config.drift: b fails the divergence-free check");
    }
    if (!drift.empty() && drift.front().first > 0.0)
        throw ConfigError("config.drift: first snapshot must start at t <= 0");
    for (double t : output_times)
        if (t < -1e-12 || t > T + 1e-12) throw ConfigError("config.output_times: outside [0, T]");
}

SpectralField drift_rhs(const SpectralField& u, const SpectralField* b,
                        const NoiseSpectrum& spectrum, double eps, int N) {
    SpectralField out = b ? transport_convolution(*b, u, N) : SpectralField::scalar(u.dim(), N);
    if (eps > 0.0) {
        const double c = corrector_constant(spectrum);
        for (const auto& [k, v] : u.coeffs()) {
            if (norm2(k) > static_cast<long>(N) * N) continue;
            CoeffVec cur = out.at(k);
            cur[0] -= eps * c * static_cast<double>(norm2(k)) * v[0];
            out.set(k, cur);
        }
    }
    return out;
}

SpectralField noise_apply(const SpectralField& u, const NoiseSpectrum& spectrum, double eps,
                          const NoiseIncrements& incr, int N) {
    if (!u.is_scalar()) throw ContractError("noise_apply: scalar field expected");
    if (incr.dim != spectrum.dim || incr.n_reps != static_cast<int>(spectrum.reps.size()))
        throw ContractError("noise_apply: increments do not match the spectrum support");
    SpectralField out = SpectralField::scalar(u.dim(), N);
    if (eps == 0.0) return out;
    const double se = std::sqrt(eps);
    const int nj = spectrum.dim - 1;
    const long n2 = static_cast<long>(N) * N;

    for (const Mode& k : modes_in_ball(u.dim(), N, /*include_zero=*/false)) {
        if (!in_half_lattice(k)) continue;
        Complex acc{};
        for (int r = 0; r < incr.n_reps; ++r) {
            const Mode& m = spectrum.reps[r];
            const double th = spectrum.theta.at(m);
            const auto basis = basis_kperp(m, spectrum.dim);
            const Complex um = u.scalar_at(sub(k, m));
            const Complex up = u.scalar_at(add(k, m));
            for (int j = 0; j < nj; ++j) {
                const double coeff = th * dot(basis[j], k);
                if (coeff == 0.0) continue;
                const Complex w = incr.at(r, j);
                acc += coeff * (um * w + up * std::conj(w));
            }
        }
        const Complex v = Complex(0.0, se) * acc;
        if (v != Complex{} && norm2(k) <= n2) out.set_pair_scalar(k, v);
    }
    return out;
}

GalerkinEngine::GalerkinEngine(const SdeRunConfig& config, const SpectralField& u0)
    : config_(config) {
    config_.validate();
    if (!u0.is_scalar()) throw ContractError("GalerkinEngine: u0 must be scalar");
    if (u0.dim() != config_.dim) throw ContractError("GalerkinEngine: u0 dimension mismatch");
    for (const auto& [k, v] : u0.coeffs())
        if (norm2(k) > static_cast<long>(config_.cutoff) * config_.cutoff && v[0] != Complex{})
            throw ContractError("GalerkinEngine: u0 has support beyond the Galerkin cutoff");
    if (!is_hermitian(u0)) throw ContractError("GalerkinEngine: u0 is not Hermitian-symmetric");

    modes_ = modes_in_ball(config_.dim, config_.cutoff, /*include_zero=*/true);
    index_.reserve(modes_.size() * 2);
    for (int i = 0; i < static_cast<int>(modes_.size()); ++i) index_[encode(modes_[i])] = i;
    const auto lookup = [&](const Mode& k) -> int {
        auto it = index_.find(encode(k));
        return it == index_.end() ? -1 : it->second;
    };

    k2_.resize(modes_.size());
    mirror_.resize(modes_.size());
    for (size_t i = 0; i < modes_.size(); ++i) {
        k2_[i] = static_cast<double>(norm2(modes_[i]));
        mirror_[i] = lookup(negate(modes_[i]));
    }

    u0_.assign(modes_.size(), Complex{});
    for (const auto& [k, v] : u0.coeffs()) {
        const int i = lookup(k);
        if (i >= 0) u0_[static_cast<size_t>(i)] = v[0];
    }

    sqrt_eps_ = std::sqrt(config_.epsilon);
    eps_c_ = config_.epsilon > 0.0 ? config_.epsilon * corrector_constant(config_.spectrum) : 0.0;

    // Noise plan over half-lattice output modes only; the other half is
    // mirrored by conjugation, which keeps Hermitian symmetry bit-exact.
    if (config_.epsilon > 0.0 && !config_.test_zero_noise) {
        const int nj = config_.dim - 1;
        const auto& spec = config_.spectrum;
        for (int i = 0; i < static_cast<int>(modes_.size()); ++i) {
            const Mode& k = modes_[i];
            if (!in_half_lattice(k)) continue;
            for (int r = 0; r < static_cast<int>(spec.reps.size()); ++r) {
                const Mode& m = spec.reps[r];
                const double th = spec.theta.at(m);
                const auto basis = basis_kperp(m, spec.dim);
                const int lm = lookup(sub(k, m));
                const int lp = lookup(add(k, m));
                if (lm < 0 && lp < 0) continue;
                for (int j = 0; j < nj; ++j) {
                    const double coeff = th * dot(basis[j], k);
                    if (coeff == 0.0) continue;
                    noise_plan_.push_back({i, lm, lp, r * nj + j, coeff});
                }
            }
        }
    }

    // One transport plan per drift snapshot, again over representatives only.
    for (const auto& [t, b] : config_.drift) {
        snapshot_times_.push_back(t);
        std::vector<TransportTerm> plan;
        for (const auto& [m, bm] : b.coeffs()) {
            for (int li = 0; li < static_cast<int>(modes_.size()); ++li) {
                const Mode& l = modes_[li];
                const Mode k = add(m, l);
                if (norm2(k) > static_cast<long>(config_.cutoff) * config_.cutoff) continue;
                if (!is_zero(k) && !in_half_lattice(k)) continue;
                Complex bl{};
                for (int c = 0; c < config_.dim; ++c) bl += bm[c] * static_cast<double>(l[c]);
                if (bl == Complex{}) continue;
                const int ki = lookup(k);
                plan.push_back({ki, li, Complex(0.0, 1.0) * bl});
            }
        }
        std::sort(plan.begin(), plan.end(),
                  [](const TransportTerm& a, const TransportTerm& b) { return a.out < b.out; });
        transport_plans_.push_back(std::move(plan));
    }

    n_steps_ = std::llround(config_.T / config_.dt);
    for (double t : config_.output_times) {
        long s = std::llround(t / config_.dt);
        s = std::max(0L, std::min(n_steps_, s));
        output_steps_.push_back(s);
    }
    std::sort(output_steps_.begin(), output_steps_.end());
    output_steps_.erase(std::unique(output_steps_.begin(), output_steps_.end()),
                        output_steps_.end());
}

int GalerkinEngine::snapshot_at(double t) const {
    int s = -1;
    for (size_t i = 0; i < snapshot_times_.size(); ++i)
        if (snapshot_times_[i] <= t + 1e-12) s = static_cast<int>(i);
    return s;
}

void GalerkinEngine::apply_noise(const std::vector<Complex>& u, const NoiseIncrements& incr,
                                 std::vector<Complex>& out) const {
    std::fill(out.begin(), out.end(), Complex{});
    for (const NoiseTerm& t : noise_plan_) {
        const Complex w = incr.w[t.slot];
        const Complex um = t.l_minus >= 0 ? u[t.l_minus] : Complex{};
        const Complex up = t.l_plus >= 0 ? u[t.l_plus] : Complex{};
        out[t.out] += t.coeff * (um * w + up * std::conj(w));
    }
    const Complex iscale(0.0, sqrt_eps_);
    for (size_t i = 0; i < modes_.size(); ++i) {
        if (!in_half_lattice(modes_[i])) continue;
        out[i] *= iscale;
        out[mirror_[i]] = std::conj(out[i]);
    }
}

void GalerkinEngine::apply_transport(const std::vector<Complex>& u, int snapshot,
                                     std::vector<Complex>& out) const {
    std::fill(out.begin(), out.end(), Complex{});
    if (snapshot < 0) return;
    for (const TransportTerm& t : transport_plans_[snapshot]) out[t.out] += t.coeff * u[t.in];
    for (size_t i = 0; i < modes_.size(); ++i) {
        if (is_zero(modes_[i])) {
            out[i] = Complex(out[i].real(), 0.0);
        } else if (in_half_lattice(modes_[i])) {
            out[mirror_[i]] = std::conj(out[i]);
        }
    }
}

void GalerkinEngine::run_path(std::uint64_t path_id, const Observer& observe) const {
    const size_t n = modes_.size();
    std::vector<Complex> u = u0_, tr(n), noiz(n), pred(n), tr2(n), noiz2(n);
    const double dt = config_.dt;
    const StreamKey key{config_.seed, path_id};
    const bool with_noise =
        config_.epsilon > 0.0 && !config_.test_zero_noise && !config_.spectrum.theta.empty();

    size_t next_out = 0;
    const auto emit = [&](long step) {
        while (next_out < output_steps_.size() && output_steps_[next_out] == step) {
            observe(static_cast<int>(next_out), step * dt, u);
            ++next_out;
        }
    };
    emit(0);

    NoiseIncrements incr;
    const int sub = config_.noise_substeps;
    const double dt_sub = dt / sub;
    for (long s = 0; s < n_steps_; ++s) {
        const double t = s * dt;
        if (with_noise) {
            incr = sample_increments(config_.spectrum, dt_sub, key,
                                     static_cast<std::uint64_t>(s) * sub);
            for (int i = 1; i < sub; ++i) {
                const NoiseIncrements fine = sample_increments(
                    config_.spectrum, dt_sub, key, static_cast<std::uint64_t>(s) * sub + i);
                for (size_t w = 0; w < incr.w.size(); ++w) incr.w[w] += fine.w[w];
            }
            incr.dt = dt;
        }

        const int snap = snapshot_at(t);
        apply_transport(u, snap, tr);
        if (with_noise)
            apply_noise(u, incr, noiz);
        else
            std::fill(noiz.begin(), noiz.end(), Complex{});

        if (config_.scheme == Scheme::euler_maruyama) {
            for (size_t i = 0; i < n; ++i)
                u[i] += dt * (tr[i] - eps_c_ * k2_[i] * u[i]) + noiz[i];
        } else {
            // Heun on the Stratonovich form: the corrector term is not stepped,
            // it emerges from the predictor-corrector average.
            for (size_t i = 0; i < n; ++i) pred[i] = u[i] + dt * tr[i] + noiz[i];
            apply_transport(pred, snapshot_at(t + dt), tr2);
            if (with_noise)
                apply_noise(pred, incr, noiz2);
            else
                std::fill(noiz2.begin(), noiz2.end(), Complex{});
            for (size_t i = 0; i < n; ++i)
                u[i] += 0.5 * dt * (tr[i] + tr2[i]) + 0.5 * (noiz[i] + noiz2[i]);
        }

        double e = 0.0;
        for (const Complex& z : u) e += std::norm(z);
        if (!std::isfinite(e))
            throw BlowUpError("galerkin blow-up: non-finite coefficient at step " +
                                  std::to_string(s + 1),
                              s + 1);
        emit(s + 1);
    }
}

Trajectory GalerkinEngine::run(std::uint64_t path_id) const {
    Trajectory traj;
    run_path(path_id, [&](int, double t, const std::vector<Complex>& state) {
        traj.times.push_back(t);
        traj.energy.push_back(energy_of(state));
        traj.fields.push_back(to_field(state));
    });
    return traj;
}

double GalerkinEngine::energy_of(const std::vector<Complex>& state) const {
    double e = 0.0;
    for (const Complex& z : state) e += std::norm(z);
    return e;
}

Complex GalerkinEngine::coeff_of(const std::vector<Complex>& state, const Mode& k) const {
    auto it = index_.find(encode(k));
    return it == index_.end() ? Complex{} : state[it->second];
}

SpectralField GalerkinEngine::to_field(const std::vector<Complex>& state) const {
    SpectralField f = SpectralField::scalar(config_.dim, config_.cutoff);
    for (size_t i = 0; i < modes_.size(); ++i)
        if (state[i] != Complex{}) f.set(modes_[i], coeff_scalar(state[i]));
    return f;
}

double GalerkinEngine::pairing(const std::vector<Complex>& state, const SpectralField& phi) const {
    Complex s{};
    for (const auto& [k, v] : phi.coeffs()) {
        // phi modes outside the Galerkin ball pair against zero.
        s += coeff_of(state, k) * std::conj(v[0]);
    }
    return s.real();
}

Trajectory simulate_path(const SdeRunConfig& config, const SpectralField& u0) {
    return GalerkinEngine(config, u0).run(config.path_id);
}

EnergyInequalityReport energy_inequality_check(const Trajectory& traj, const DriftSnapshots& b,
                                               double tol) {
    if (traj.times.empty()) throw ContractError("energy_inequality_check: empty trajectory");
    EnergyInequalityReport rep;
    rep.tolerance = tol;

    // ||div b(s)||_inf is piecewise constant in time, like b itself.
    std::vector<double> div_sup(b.size(), 0.0);
    for (size_t i = 0; i < b.size(); ++i) div_sup[i] = divergence_sup_norm(b[i].second);
    const auto sup_at = [&](double t) {
        double v = 0.0;
        for (size_t i = 0; i < b.size(); ++i)
            if (b[i].first <= t + 1e-12) v = div_sup[i];
        return v;
    };

    const double u0_norm = std::sqrt(traj.energy.front());
    double integral = 0.0;
    double worst = -1e300;
    for (size_t i = 0; i < traj.times.size(); ++i) {
        if (i > 0) {
            const double t0 = traj.times[i - 1], t1 = traj.times[i];
            integral += sup_at(t0) * (t1 - t0);
        }
        const double weighted = std::exp(-0.5 * integral) * std::sqrt(traj.energy[i]);
        rep.weighted_norms.push_back(weighted);
        worst = std::max(worst, weighted - u0_norm);
    }
    rep.slack = worst;
    rep.pass = worst <= tol;
    return rep;
}

}  // namespace stle
