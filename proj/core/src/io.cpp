#include "stle/io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "stle/version.hpp"

namespace stle::io {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
    throw ConfigError("config field '" + path + "': " + why);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) bad(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(path + "." + key, "missing");
    return *it;
}

double num_at(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_number()) bad(path + "." + key, "expected a number");
    return v.get<double>();
}

long int_at(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_number_integer()) bad(path + "." + key, "expected an integer");
    return v.get<long>();
}

std::string str_at(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_string()) bad(path + "." + key, "expected a string");
    return v.get<std::string>();
}

std::vector<double> times_at(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_array()) bad(path + "." + key, "expected an array of times");
    std::vector<double> out;
    for (const auto& t : v) out.push_back(t.get<double>());
    return out;
}

Mode mode_from_json(const json& v, int dim, const std::string& path) {
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
        bad(path, "expected a length-" + std::to_string(dim) + " integer array");
    Mode k = {0, 0, 0};
    for (int i = 0; i < dim; ++i) k[i] = v[i].get<int>();
    return k;
}

}  // namespace

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json load_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open file: " + path.string());
    json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void write_field_jsonl(std::ostream& os, const SpectralField& f) {
    for (const auto& [k, v] : f.coeffs()) {
        if (!is_zero(k) && !in_half_lattice(k)) continue;  // partners reconstructed on read
        json rec;
        json karr = json::array();
        for (int i = 0; i < f.dim(); ++i) karr.push_back(k[i]);
        json re = json::array(), im = json::array();
        for (int c = 0; c < f.ncomp(); ++c) {
            re.push_back(v[c].real());
            im.push_back(v[c].imag());
        }
        rec["k"] = karr;
        rec["re"] = re;
        rec["im"] = im;
        os << rec.dump() << "\n";
    }
}

namespace {

SpectralField field_from_records(const std::vector<json>& records, int dim, int ncomp, int cutoff,
                                 const std::string& path) {
    SpectralField f(dim, ncomp, cutoff);
    for (const json& rec : records) {
        const Mode k = mode_from_json(require(rec, "k", path), dim, path + ".k");
        CoeffVec v{};
        const json& re = require(rec, "re", path);
        const json& im = require(rec, "im", path);
        if (re.is_number() && im.is_number() && ncomp == 1) {
            v[0] = Complex(re.get<double>(), im.get<double>());
        } else {
            if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != ncomp ||
                static_cast<int>(im.size()) != ncomp)
                bad(path, "re/im must be length-" + std::to_string(ncomp) + " arrays");
            for (int c = 0; c < ncomp; ++c)
                v[c] = Complex(re[c].get<double>(), im[c].get<double>());
        }
        f.set(k, v);
    }
    // Complete Hermitian partners that were omitted.
    std::vector<std::pair<Mode, CoeffVec>> missing;
    for (const auto& [k, v] : f.coeffs()) {
        if (f.coeffs().find(negate(k)) == f.coeffs().end()) {
            CoeffVec w{};
            for (int c = 0; c < ncomp; ++c) w[c] = std::conj(v[c]);
            missing.push_back({negate(k), w});
        }
    }
    for (const auto& [k, v] : missing) f.set(k, v);
    if (!is_hermitian(f)) bad(path, "stored modes are not Hermitian-consistent");
    return f;
}

}  // namespace

SpectralField read_field_jsonl(std::istream& is, int dim, int ncomp, int cutoff) {
    std::vector<json> records;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        records.push_back(json::parse(line));
    }
    return field_from_records(records, dim, ncomp, cutoff, "field");
}

SpectralField field_from_json(const json& modes, int dim, int ncomp, int cutoff,
                              const std::string& path) {
    if (!modes.is_array()) bad(path, "expected an array of mode records");
    std::vector<json> records(modes.begin(), modes.end());
    return field_from_records(records, dim, ncomp, cutoff, path);
}

NoiseSpectrum spectrum_from_json(const json& j, const std::string& path) {
    const int dim = static_cast<int>(int_at(j, "dim", path));
    if (j.contains("thetas")) {
        std::map<Mode, double> theta;
        for (const auto& rec : j["thetas"]) {
            const Mode k = mode_from_json(require(rec, "k", path + ".thetas"), dim,
                                          path + ".thetas.k");
            theta[k] = num_at(rec, "theta", path + ".thetas");
        }
        return build_spectrum_explicit(dim, theta);
    }
    const SpectrumFamily family = family_from_name(str_at(j, "family", path));
    const double alpha = num_at(j, "alpha", path);
    const double beta = j.contains("beta") ? num_at(j, "beta", path) : 0.0;
    const int cutoff = static_cast<int>(int_at(j, "support_cutoff", path));
    return build_spectrum(family, alpha, beta, dim, cutoff);
}

NoiseSpectrum load_spectrum(const std::filesystem::path& path) {
    return spectrum_from_json(load_json(path), "spectrum");
}

SpectrumSequence sequence_from_json(const json& j, const std::string& path) {
    SpectrumSequence seq;
    seq.nu = num_at(j, "nu", path);
    if (j.contains("members")) {
        for (const auto& m : j["members"])
            seq.members.push_back(spectrum_from_json(m, path + ".members"));
    } else {
        const int dim = static_cast<int>(int_at(j, "dim", path));
        const SpectrumFamily family = family_from_name(str_at(j, "family", path));
        const json& alphas = require(j, "alphas", path);
        const json& cutoffs = require(j, "support_cutoffs", path);
        if (!alphas.is_array() || !cutoffs.is_array() || alphas.size() != cutoffs.size())
            bad(path, "alphas and support_cutoffs must be arrays of equal length");
        const double beta = j.contains("beta") ? num_at(j, "beta", path) : 0.0;
        for (size_t i = 0; i < alphas.size(); ++i)
            seq.members.push_back(build_spectrum(family, alphas[i].get<double>(), beta, dim,
                                                 cutoffs[i].get<int>()));
    }
    validate_sequence(seq);
    return seq;
}

namespace {

DriftSnapshots drift_from_json(const json& j, int dim, int cutoff, const std::string& path) {
    DriftSnapshots out;
    if (!j.contains("drift")) return out;
    const json& d = j["drift"];
    const json& snaps = require(d, "snapshots", path + ".drift");
    if (!snaps.is_array()) bad(path + ".drift.snapshots", "expected an array");
    for (const auto& s : snaps) {
        const double t = num_at(s, "t", path + ".drift.snapshots");
        SpectralField b = field_from_json(require(s, "modes", path + ".drift.snapshots"), dim, dim,
                                          cutoff, path + ".drift.snapshots.modes");
        out.push_back({t, std::move(b)});
    }
    return out;
}

}  // namespace

SimulateJob simulate_job_from_json(const json& j) {
    SimulateJob job;
    const std::string path = "simulate";
    job.config.dim = static_cast<int>(int_at(j, "dim", path));
    job.config.cutoff = static_cast<int>(int_at(j, "cutoff", path));
    if (j.contains("spectrum"))
        job.config.spectrum = spectrum_from_json(j["spectrum"], path + ".spectrum");
    if (j.contains("epsilon"))
        job.config.epsilon = num_at(j, "epsilon", path);
    else
        job.config.epsilon = epsilon_for_nu(job.config.spectrum, num_at(j, "nu", path));
    job.config.T = num_at(j, "T", path);
    job.config.dt = num_at(j, "dt", path);
    job.config.scheme = scheme_from_name(str_at(j, "scheme", path));
    job.config.seed = static_cast<std::uint64_t>(int_at(j, "seed", path));
    job.config.path_id =
        j.contains("path_id") ? static_cast<std::uint64_t>(int_at(j, "path_id", path)) : 0;
    job.config.output_times = times_at(j, "output_times", path);
    job.config.drift = drift_from_json(j, job.config.dim, job.config.cutoff, path);
    if (j.contains("drift") && j["drift"].contains("divergence_free"))
        job.config.drift_divergence_free = j["drift"]["divergence_free"].get<bool>();
    job.u0 = field_from_json(require(j, "u0", path), job.config.dim, 1, job.config.cutoff,
                             path + ".u0");
    if (j.contains("format")) job.format = str_at(j, "format", path);
    return job;
}

MomentsJob moments_job_from_json(const json& j) {
    MomentsJob job;
    const std::string path = "moments";
    job.spectrum = spectrum_from_json(require(j, "spectrum", path), path + ".spectrum");
    if (j.contains("epsilon"))
        job.epsilon = num_at(j, "epsilon", path);
    else
        job.epsilon = epsilon_for_nu(job.spectrum, num_at(j, "nu", path));
    job.K = static_cast<int>(int_at(j, "K", path));
    job.T = num_at(j, "T", path);
    job.dt = num_at(j, "dt", path);
    job.output_times = times_at(j, "output_times", path);
    for (const auto& rec : require(j, "x0", path))
        job.x0[mode_from_json(require(rec, "k", path + ".x0"), job.spectrum.dim, path + ".x0.k")] =
            num_at(rec, "value", path + ".x0");
    return job;
}

CompareMomentsJob compare_moments_job_from_json(const json& j) {
    CompareMomentsJob job;
    const SimulateJob sim = simulate_job_from_json(require(j, "sim", "compare_moments"));
    job.config = sim.config;
    job.u0 = sim.u0;
    job.paths = static_cast<int>(int_at(j, "paths", "compare_moments"));
    job.checkpoints = times_at(j, "checkpoints", "compare_moments");
    if (j.contains("z_max")) job.z_max = num_at(j, "z_max", "compare_moments");
    return job;
}

ParabolicJob parabolic_job_from_json(const json& j) {
    ParabolicJob job;
    const std::string path = "parabolic";
    const int dim = static_cast<int>(int_at(j, "dim", path));
    job.cutoff = static_cast<int>(int_at(j, "cutoff", path));
    job.nu = num_at(j, "nu", path);
    job.T = num_at(j, "T", path);
    job.dt = num_at(j, "dt", path);
    job.output_times = times_at(j, "output_times", path);
    job.u0 = field_from_json(require(j, "u0", path), dim, 1, job.cutoff, path + ".u0");
    job.drift = drift_from_json(j, dim, job.cutoff, path);
    if (j.contains("picard_iterations"))
        job.picard_iterations = static_cast<int>(int_at(j, "picard_iterations", path));
    return job;
}

ScalingConfig scaling_config_from_json(const json& j) {
    ScalingConfig cfg;
    const std::string path = "scaling";
    cfg.sequence = sequence_from_json(require(j, "sequence", path), path + ".sequence");
    const int dim = cfg.sequence.members.front().dim;
    cfg.nu = cfg.sequence.nu;
    cfg.T = num_at(j, "T", path);
    cfg.m_paths = static_cast<int>(int_at(j, "paths", path));
    cfg.seed = static_cast<std::uint64_t>(int_at(j, "seed", path));
    if (j.contains("cfl")) cfg.cfl = num_at(j, "cfl", path);
    if (j.contains("checkpoints")) cfg.checkpoints = static_cast<int>(int_at(j, "checkpoints", path));
    if (j.contains("scheme")) cfg.scheme = scheme_from_name(str_at(j, "scheme", path));
    if (j.contains("variance_slack")) cfg.variance_slack = num_at(j, "variance_slack", path);
    if (j.contains("mean_z_tol")) cfg.mean_z_tol = num_at(j, "mean_z_tol", path);
    // u0 cutoff bound: parse against a generous ball, the engine re-projects.
    cfg.u0 = field_from_json(require(j, "u0", path), dim, 1, 64, path + ".u0");
    cfg.drift = drift_from_json(j, dim, 64, path);
    cfg.tests = TestFunctionSet::defaults(dim);
    return cfg;
}

OneDimJob oned_job_from_json(const json& j) {
    OneDimJob job;
    const std::string path = "oned";
    const std::string kind = str_at(j, "kind", path);

    const auto u0_from = [&](const json& v) {
        RealField1D u;
        for (const auto& rec : v)
            u.set(static_cast<int>(int_at(rec, "k", path + ".u0")), num_at(rec, "c", path + ".u0"));
        return u;
    };

    if (kind == "single") {
        job.friction_limit = false;
        job.single.cutoff = static_cast<int>(int_at(j, "cutoff", path));
        std::map<int, double> lambda;
        for (const auto& rec : require(j, "lambdas", path))
            lambda[static_cast<int>(int_at(rec, "k", path + ".lambdas"))] =
                num_at(rec, "lambda", path + ".lambdas");
        job.single.spectrum = build_spectrum_1d(lambda);
        if (j.contains("epsilon"))
            job.single.epsilon = num_at(j, "epsilon", path);
        else
            job.single.epsilon = epsilon_1d(job.single.spectrum, num_at(j, "nu", path));
        job.single.T = num_at(j, "T", path);
        job.single.dt = num_at(j, "dt", path);
        job.single.scheme =
            j.contains("scheme") ? scheme_from_name(str_at(j, "scheme", path)) : Scheme::euler_maruyama;
        job.single.seed = static_cast<std::uint64_t>(int_at(j, "seed", path));
        job.single.output_times = times_at(j, "output_times", path);
        if (j.contains("drift")) {
            for (const auto& rec : j["drift"])
                job.single.drift_b.set(static_cast<int>(int_at(rec, "k", path + ".drift")),
                                       num_at(rec, "c", path + ".drift"));
        }
        job.u0 = u0_from(require(j, "u0", path));
        return job;
    }
    if (kind != "friction_limit") bad(path + ".kind", "expected 'single' or 'friction_limit'");

    job.friction_limit = true;
    job.limit.nu = num_at(j, "nu", path);
    for (const auto& n : require(j, "shells", path))
        job.limit.sequence.push_back(shell_spectrum_1d(n.get<int>()));
    job.limit.T = num_at(j, "T", path);
    job.limit.m_paths = static_cast<int>(int_at(j, "paths", path));
    job.limit.seed = static_cast<std::uint64_t>(int_at(j, "seed", path));
    if (j.contains("checkpoints"))
        job.limit.checkpoints = static_cast<int>(int_at(j, "checkpoints", path));
    if (j.contains("cfl")) job.limit.cfl = num_at(j, "cfl", path);
    job.limit.u0 = u0_from(require(j, "u0", path));
    if (j.contains("test_modes"))
        for (const auto& m : j["test_modes"]) job.limit.test_modes.push_back(m.get<int>());
    else
        for (int m = -2; m <= 2; ++m) job.limit.test_modes.push_back(m);
    return job;
}

void write_trajectory_jsonl(std::ostream& os, const Trajectory& traj) {
    for (size_t i = 0; i < traj.times.size(); ++i) {
        json rec;
        rec["t"] = traj.times[i];
        rec["energy"] = traj.energy[i];
        json modes = json::array();
        const SpectralField& f = traj.fields[i];
        for (const auto& [k, v] : f.coeffs()) {
            if (!is_zero(k) && !in_half_lattice(k)) continue;
            json m;
            json karr = json::array();
            for (int c = 0; c < f.dim(); ++c) karr.push_back(k[c]);
            m["k"] = karr;
            m["re"] = v[0].real();
            m["im"] = v[0].imag();
            modes.push_back(m);
        }
        rec["modes"] = modes;
        os << rec.dump() << "\n";
    }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    if (traj.fields.empty()) return;
    // Fixed column set: union of representative modes over the trajectory.
    std::vector<Mode> cols;
    {
        std::map<Mode, bool> seen;
        for (const auto& f : traj.fields)
            for (const auto& [k, v] : f.coeffs())
                if (is_zero(k) || in_half_lattice(k)) seen[k] = true;
        for (const auto& [k, b] : seen) cols.push_back(k);
    }
    const int dim = traj.fields.front().dim();
    os << "t,energy";
    for (const Mode& k : cols) {
        std::string label;
        for (int c = 0; c < dim; ++c) label += (c ? "_" : "") + std::to_string(k[c]);
        os << ",re_" << label << ",im_" << label;
    }
    os << "\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        os << fmt(traj.times[i]) << "," << fmt(traj.energy[i]);
        for (const Mode& k : cols) {
            const Complex z = traj.fields[i].scalar_at(k);
            os << "," << fmt(z.real()) << "," << fmt(z.imag());
        }
        os << "\n";
    }
}

void write_trajectory1d_csv(std::ostream& os, const Trajectory1D& traj) {
    if (traj.fields.empty()) return;
    std::vector<int> cols;
    {
        std::map<int, bool> seen;
        for (const auto& f : traj.fields)
            for (const auto& [k, v] : f.c) seen[k] = true;
        for (const auto& [k, b] : seen) cols.push_back(k);
    }
    os << "t,energy";
    for (int k : cols) os << ",c_" << k;
    os << "\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        os << fmt(traj.times[i]) << "," << fmt(traj.energy[i]);
        for (int k : cols) os << "," << fmt(traj.fields[i].at(k));
        os << "\n";
    }
}

void write_qmatrix_csv(std::ostream& os, const QMatrix& q) {
    const int d = q.dim;
    os << "k1,k2" << (d == 3 ? ",k3" : "") << ",l1,l2" << (d == 3 ? ",l3" : "") << ",q\n";
    const int n = static_cast<int>(q.modes.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (q.q(i, j) == 0.0) continue;
            for (int c = 0; c < d; ++c) os << q.modes[i][c] << ",";
            for (int c = 0; c < d; ++c) os << q.modes[j][c] << ",";
            os << fmt(q.q(i, j)) << "\n";
        }
}

void write_moment_comparison_csv(std::ostream& os, const MomentComparison& cmp) {
    os << "k1,k2,k3,t,mc_mean,mc_stderr,ode_value,z,interior\n";
    for (const auto& r : cmp.rows) {
        os << r.k[0] << "," << r.k[1] << "," << r.k[2] << "," << fmt(r.t) << "," << fmt(r.mc_mean)
           << "," << fmt(r.mc_stderr) << "," << fmt(r.ode_value) << "," << fmt(r.z) << ","
           << (r.interior ? 1 : 0) << "\n";
    }
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table) {
    os << "member,galerkin_cutoff,epsilon,sum_sq,ratio,phi,dist_path_mean,dist_path_max,"
          "dist_mean_traj,var_sup_t,var_bound,var_bound_ok,mean_z_max,m_paths\n";
    for (const auto& r : table.rows) {
        os << r.member << "," << r.galerkin_cutoff << "," << fmt(r.epsilon) << "," << fmt(r.sum_sq)
           << "," << fmt(r.ratio) << "," << r.phi << "," << fmt(r.dist_path_mean) << ","
           << fmt(r.dist_path_max) << "," << fmt(r.dist_mean_traj) << "," << fmt(r.var_sup_t) << ","
           << fmt(r.var_bound) << "," << (r.var_bound_ok ? 1 : 0) << "," << fmt(r.mean_z_max) << ","
           << r.m_paths << "\n";
    }
}

void write_convergence_gnuplot(std::ostream& os, const ConvergenceTable& table) {
    os << "# member ratio phi dist_path_mean var_sup_t\n";
    for (const auto& r : table.rows)
        os << r.member << " " << fmt(r.ratio) << " " << r.phi << " " << fmt(r.dist_path_mean) << " "
           << fmt(r.var_sup_t) << "\n";
}

void write_friction_csv(std::ostream& os, const FrictionTable& table) {
    os << "member,epsilon,sum_sq,sum_k2,ratio,eps_friction,eps_diffusion,phi,dist_path_mean,"
          "dist_path_max,var_sup_t,measured_diffusion,measured_friction,m_paths\n";
    for (const auto& r : table.rows) {
        os << r.member << "," << fmt(r.epsilon) << "," << fmt(r.sum_sq) << "," << fmt(r.sum_k2)
           << "," << fmt(r.ratio) << "," << fmt(r.eps_friction) << "," << fmt(r.eps_diffusion)
           << "," << r.phi << "," << fmt(r.dist_path_mean) << "," << fmt(r.dist_path_max) << ","
           << fmt(r.var_sup_t) << "," << fmt(r.measured_diffusion) << ","
           << fmt(r.measured_friction) << "," << r.m_paths << "\n";
    }
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const json& config, std::uint64_t seed, int threads,
                    const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["master_seed"] = seed;
    m["threads"] = threads;
    m["config"] = config;
    m["config_hash_fnv1a64"] = fnv1a64(config.dump());
    m["outputs"] = outputs;
    m["stream_rule"] =
        "gaussians keyed by mix64 chain over (master_seed, path_id, step, slot); "
        "slot = rep_index*(d-1)+j for d>=2, support index for d=1";
    std::ofstream os(out_dir / "manifest.json");
    os << m.dump(2) << "\n";
}

}  // namespace stle::io
