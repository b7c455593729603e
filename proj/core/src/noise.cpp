#include "stle/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stle {

namespace {

std::string mode_str(const Mode& k, int dim) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < dim; ++i) os << (i ? "," : "") << k[i];
    os << ")";
    return os.str();
}

void finalize(NoiseSpectrum& s) {
    if (s.theta.empty()) throw ConfigError("noise spectrum: empty support");
    s.sum_sq = 0.0;
    s.sup_sq = 0.0;
    long max_n2 = 0;
    s.reps.clear();
    for (const auto& [k, th] : s.theta) {
        s.sum_sq += th * th;
        s.sup_sq = std::max(s.sup_sq, th * th);
        max_n2 = std::max(max_n2, norm2(k));
        if (in_half_lattice(k)) s.reps.push_back(k);
    }
    s.support_radius = std::sqrt(static_cast<double>(max_n2));
    s.support_radius_int = static_cast<int>(std::ceil(s.support_radius - 1e-12));
}

double smooth_bump(double r) {
    if (r >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

}  // namespace

std::string family_name(SpectrumFamily f) {
    switch (f) {
        case SpectrumFamily::shell_indicator: return "shell_indicator";
        case SpectrumFamily::smooth_cutoff: return "smooth_cutoff";
        case SpectrumFamily::power_law_sobolev: return "power_law_sobolev";
        case SpectrumFamily::power_law_exponent: return "power_law_exponent";
        case SpectrumFamily::explicit_list: return "explicit_list";
    }
    return "?";
}

SpectrumFamily family_from_name(const std::string& s) {
    if (s == "shell_indicator") return SpectrumFamily::shell_indicator;
    if (s == "smooth_cutoff") return SpectrumFamily::smooth_cutoff;
    if (s == "power_law_sobolev") return SpectrumFamily::power_law_sobolev;
    if (s == "power_law_exponent") return SpectrumFamily::power_law_exponent;
    if (s == "explicit_list") return SpectrumFamily::explicit_list;
    throw ConfigError("unknown spectrum family: " + s);
}

NoiseSpectrum build_spectrum(SpectrumFamily family, double alpha, double beta, int dim,
                             int support_cutoff) {
    if (dim < 2 || dim > 3) throw ConfigError("build_spectrum: dim must be 2 or 3");
    if (support_cutoff < 1) throw ConfigError("build_spectrum: support_cutoff must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("build_spectrum: alpha must be > 0");
    if (family == SpectrumFamily::power_law_sobolev && !(beta < -0.5 * dim))
        throw ConfigError("build_spectrum: power_law_sobolev requires beta < -d/2");

    NoiseSpectrum s;
    s.dim = dim;
    s.support_cutoff = support_cutoff;
    s.family = family;
    s.alpha = alpha;
    s.beta = beta;
    {
        std::ostringstream tag;
        tag << family_name(family) << "(alpha=" << alpha;
        if (family == SpectrumFamily::power_law_sobolev) tag << ",beta=" << beta;
        tag << ")";
        s.family_tag = tag.str();
    }

    for (const Mode& k : modes_in_ball(dim, support_cutoff, /*include_zero=*/false)) {
        const double r = std::sqrt(static_cast<double>(norm2(k)));
        double th = 0.0;
        switch (family) {
            case SpectrumFamily::shell_indicator:
                th = (alpha * r <= 1.0 + 1e-12) ? 1.0 : 0.0;
                break;
            case SpectrumFamily::smooth_cutoff:
                th = smooth_bump(alpha * r);
                break;
            case SpectrumFamily::power_law_sobolev:
                th = std::pow(1.0 + alpha * static_cast<double>(norm2(k)), beta);
                break;
            case SpectrumFamily::power_law_exponent:
                th = std::pow(1.0 + static_cast<double>(norm2(k)), -0.5 * dim - alpha);
                break;
            case SpectrumFamily::explicit_list:
                throw ConfigError("build_spectrum: explicit_list needs build_spectrum_explicit");
        }
        if (th != 0.0) s.theta[k] = th;
    }
    finalize(s);
    return s;
}

NoiseSpectrum build_spectrum_explicit(int dim, const std::map<Mode, double>& theta,
                                      const std::string& tag) {
    if (dim < 2 || dim > 3) throw ConfigError("build_spectrum_explicit: dim must be 2 or 3");
    NoiseSpectrum s;
    s.dim = dim;
    s.family_tag = tag;
    for (const auto& [k, th] : theta) {
        if (is_zero(k)) throw ConfigError("noise spectrum: theta_0 must be absent");
        if (th != 0.0) s.theta[k] = th;
    }
    finalize(s);
    s.support_cutoff = s.support_radius_int;
    return s;
}

double truncation_tail_bound(const NoiseSpectrum& s) {
    if (s.family == SpectrumFamily::explicit_list) return 0.0;
    const auto g = [&](double r) -> double {  // theta^2 as a function of |k|
        switch (s.family) {
            case SpectrumFamily::shell_indicator:
                return s.alpha * r <= 1.0 ? 1.0 : 0.0;
            case SpectrumFamily::smooth_cutoff: {
                const double f = smooth_bump(s.alpha * r);
                return f * f;
            }
            case SpectrumFamily::power_law_sobolev:
                return std::pow(1.0 + s.alpha * r * r, 2.0 * s.beta);
            case SpectrumFamily::power_law_exponent:
                return std::pow(1.0 + r * r, -s.dim - 2.0 * s.alpha);
            case SpectrumFamily::explicit_list:
                return 0.0;
        }
        return 0.0;
    };
    // Shell-count bound: lattice points with |k| in [n, n+1) fit inside the
    // annulus widened by half a cell diagonal.
    const double vd = s.dim == 2 ? M_PI : 4.0 * M_PI / 3.0;
    const double half_diag = 0.5 * std::sqrt(static_cast<double>(s.dim));
    double tail = 0.0;
    for (int n = s.support_cutoff; n < 100000; ++n) {
        const double hi = n + 1 + half_diag;
        const double lo = std::max(0.0, n - half_diag);
        const double count = vd * (std::pow(hi, s.dim) - std::pow(lo, s.dim));
        // dropped modes in this shell have |k| strictly above n
        const double term = g(n + 1e-9) * count;
        tail += term;
        if (term < 1e-18 * (tail + 1e-300) || term == 0.0) break;
    }
    return tail;
}

SpectrumValidation validate_spectrum(const NoiseSpectrum& s) {
    SpectrumValidation v;
    v.sum_sq = s.sum_sq;
    v.truncation_tail_bound = truncation_tail_bound(s);
    v.finite = !s.theta.empty() && std::isfinite(s.sum_sq);

    for (const auto& [k, th] : s.theta) {
        const double neg = s.theta_at(negate(k));
        if (neg != th) {
            v.symmetric = false;
            v.detail = "theta" + mode_str(k, s.dim) + " = " + std::to_string(th) +
                       " but theta" + mode_str(negate(k), s.dim) + " = " + std::to_string(neg);
            break;
        }
    }

    // Isotropy over the group generated by swaps and reflections: compare each
    // theta_k against the value at the orbit's canonical form.
    std::map<Mode, double> orbit_value;
    for (const auto& [k, th] : s.theta) {
        const Mode c = canonical_form(k, s.dim);
        auto [it, inserted] = orbit_value.emplace(c, th);
        if (!inserted && it->second != th) {
            v.isotropic = false;
            if (v.detail.empty())
                v.detail = "orbit of " + mode_str(c, s.dim) + " carries theta values " +
                           std::to_string(it->second) + " and " + std::to_string(th);
            break;
        }
    }
    // A mode whose orbit partner is missing entirely also breaks isotropy.
    if (v.isotropic) {
        for (const auto& [k, th] : s.theta) {
            (void)th;
            const Mode c = canonical_form(k, s.dim);
            for (const Mode& m : modes_in_ball(s.dim, s.support_radius_int, false)) {
                if (canonical_form(m, s.dim) == c && s.theta.find(m) == s.theta.end()) {
                    v.isotropic = false;
                    v.detail = "orbit of " + mode_str(c, s.dim) + " is missing member " +
                               mode_str(m, s.dim);
                    break;
                }
            }
            if (!v.isotropic) break;
        }
    }
    return v;
}

Mat3 corrector_matrix(const NoiseSpectrum& s) {
    Mat3 a{};
    Mat3 comp{};  // Kahan compensation per entry
    for (const auto& [k, th] : s.theta) {
        const Mat3 p = leray_matrix(k, s.dim);
        const double w = th * th;
        for (int i = 0; i < s.dim; ++i)
            for (int j = 0; j < s.dim; ++j) {
                const double y = w * p[i][j] - comp[i][j];
                const double t = a[i][j] + y;
                comp[i][j] = (t - a[i][j]) - y;
                a[i][j] = t;
            }
    }
    return a;
}

double corrector_constant(const NoiseSpectrum& s, double tol) {
    const double c = (static_cast<double>(s.dim) - 1.0) / s.dim * s.sum_sq;
    const Mat3 a = corrector_matrix(s);
    for (int i = 0; i < s.dim; ++i)
        for (int j = 0; j < s.dim; ++j) {
            const double expect = (i == j) ? c : 0.0;
            if (std::abs(a[i][j] - expect) > tol) {
                std::ostringstream os;
                os << "corrector_constant: spectrum is not isotropic; entry (" << i << "," << j
                   << ") of sum theta^2 P_k is " << a[i][j] << ", expected " << expect;
                throw ContractError(os.str());
            }
        }
    return c;
}

double epsilon_for_nu(const NoiseSpectrum& s, double nu) {
    if (!(nu > 0.0)) throw ConfigError("epsilon_for_nu: nu must be > 0");
    if (!(s.sum_sq > 0.0)) throw ConfigError("epsilon_for_nu: zero spectrum");
    const double c = corrector_constant(s);
    const double eps = nu / c;
    if (std::abs(eps * c - nu) > 1e-14 * nu)
        throw Error("epsilon_for_nu: eps*c != nu beyond rounding");  // unreachable by construction
    return eps;
}

void validate_sequence(const SpectrumSequence& seq) {
    if (seq.members.empty()) throw ConfigError("spectrum sequence: empty");
    if (!(seq.nu > 0.0)) throw ConfigError("spectrum sequence: nu must be > 0");
    double prev = 2.0;
    int idx = 0;
    for (const auto& s : seq.members) {
        const SpectrumValidation v = validate_spectrum(s);
        if (!v.ok())
            throw ConfigError("spectrum sequence: member " + std::to_string(idx) +
                              " fails H1/H2: " + v.detail);
        const double ratio = s.concentration_ratio();
        if (!(ratio < prev))
            throw ConfigError("spectrum sequence: sup/sum ratio not strictly decreasing at member " +
                              std::to_string(idx));
        prev = ratio;
        ++idx;
    }
}

std::vector<NuRelationRow> nu_relation_check(const SpectrumSequence& seq) {
    validate_sequence(seq);
    std::vector<NuRelationRow> rows;
    int idx = 0;
    for (const auto& s : seq.members) {
        NuRelationRow r;
        r.index = idx++;
        r.sum_sq = s.sum_sq;
        r.epsilon = epsilon_for_nu(s, seq.nu);
        r.expected_noise_l2 = 2.0 * (s.dim - 1) * s.sum_sq;
        r.product = r.epsilon * r.expected_noise_l2;
        r.c_dim = 1.0 / (2.0 * s.dim);
        r.residual = std::abs(r.c_dim * r.product - seq.nu);
        if (r.residual > 1e-13 * seq.nu)
            throw Error("nu_relation_check: identity C(d) * eps * E|W(1)|^2 = nu violated");
        rows.push_back(r);
    }
    return rows;
}

NoiseIncrements sample_increments(const NoiseSpectrum& s, double dt, const StreamKey& key,
                                  std::uint64_t step) {
    if (!(dt > 0.0)) throw ConfigError("sample_increments: dt must be > 0");
    NoiseIncrements inc;
    inc.dt = dt;
    inc.dim = s.dim;
    inc.n_reps = static_cast<int>(s.reps.size());
    const int nj = s.dim - 1;
    inc.w.resize(static_cast<size_t>(inc.n_reps) * nj);
    for (int r = 0; r < inc.n_reps; ++r)
        for (int j = 0; j < nj; ++j)
            inc.w[static_cast<size_t>(r) * nj + j] =
                complex_increment(key, step, static_cast<std::uint64_t>(r) * nj + j, dt);
    return inc;
}

}  // namespace stle
