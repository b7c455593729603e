// stle: spectral Galerkin experiments for renormalized transport-noise
// equations.  Subcommands read a JSON config, write CSV/JSON-lines results
// plus a manifest into --out, and exit nonzero on any assertion failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "stle/io.hpp"
#include "stle/parallel.hpp"
#include "stle/version.hpp"

namespace fs = std::filesystem;
using namespace stle;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool quiet = false;
};

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw ConfigError("cannot write " + (dir / name).string());
    return os;
}

void note(const GlobalOpts& g, const std::string& msg) {
    if (!g.quiet) std::cout << msg << "\n";
}

int cmd_validate_spectrum(const GlobalOpts& g, const std::string& file) {
    const NoiseSpectrum s = io::load_spectrum(file);
    const SpectrumValidation v = validate_spectrum(s);
    json rep;
    rep["family"] = s.family_tag;
    rep["dim"] = s.dim;
    rep["support_modes"] = s.theta.size();
    rep["sum_sq"] = v.sum_sq;
    rep["truncation_tail_bound"] = v.truncation_tail_bound;
    rep["symmetric"] = v.symmetric;
    rep["isotropic"] = v.isotropic;
    rep["finite"] = v.finite;
    rep["ok"] = v.ok();
    if (!v.detail.empty()) rep["detail"] = v.detail;
    std::cout << rep.dump(2) << "\n";
    auto os = open_out(g.out, "validation.json");
    os << rep.dump(2) << "\n";
    io::write_manifest(g.out, "validate-spectrum", io::load_json(file), g.seed,
                       resolve_threads(g.threads), {"validation.json"});
    return v.ok() ? 0 : 1;
}

int cmd_corrector(const GlobalOpts& g, const std::string& file, double nu) {
    const NoiseSpectrum s = io::load_spectrum(file);
    const double c = corrector_constant(s);
    std::cout << "sum_sq = " << io::fmt(s.sum_sq) << "\n";
    std::cout << "c = " << io::fmt(c) << "\n";
    json rep;
    rep["sum_sq"] = s.sum_sq;
    rep["c"] = c;
    rep["ratio_sup_over_sum"] = s.concentration_ratio();
    if (nu > 0.0) {
        const double eps = epsilon_for_nu(s, nu);
        std::cout << "epsilon(nu=" << io::fmt(nu) << ") = " << io::fmt(eps) << "\n";
        rep["nu"] = nu;
        rep["epsilon"] = eps;
    }
    auto os = open_out(g.out, "corrector.json");
    os << rep.dump(2) << "\n";
    io::write_manifest(g.out, "corrector", io::load_json(file), g.seed,
                       resolve_threads(g.threads), {"corrector.json"});
    return 0;
}

int cmd_simulate(const GlobalOpts& g, const std::string& file) {
    const json cfg = io::load_json(file);
    io::SimulateJob job = io::simulate_job_from_json(cfg);
    if (g.seed_set) job.config.seed = g.seed;
    const Trajectory traj = simulate_path(job.config, job.u0);

    std::vector<std::string> outputs;
    if (job.format == "csv") {
        auto os = open_out(g.out, "trajectory.csv");
        io::write_trajectory_csv(os, traj);
        outputs.push_back("trajectory.csv");
    } else {
        auto os = open_out(g.out, "trajectory.jsonl");
        io::write_trajectory_jsonl(os, traj);
        outputs.push_back("trajectory.jsonl");
    }
    io::write_manifest(g.out, "simulate", cfg, job.config.seed, resolve_threads(g.threads),
                       outputs);
    note(g, "wrote " + outputs.front() + " (" + std::to_string(traj.times.size()) + " snapshots)");
    return 0;
}

int cmd_moments(const GlobalOpts& g, const std::string& file) {
    const json cfg = io::load_json(file);
    const io::MomentsJob job = io::moments_job_from_json(cfg);
    const QMatrix q = build_q_matrix(job.spectrum, job.epsilon, job.K);
    if (!q.warning.empty()) std::cerr << "warning: " << q.warning << "\n";

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(q.modes.size());
    for (const auto& [k, v] : job.x0) {
        const int i = q.index_of(k);
        if (i < 0) throw ConfigError("moments.x0: mode outside |k| <= K");
        x0(i) = v;
    }
    const MomentTrajectory traj = integrate_moments(q, x0, job.T, job.dt, job.output_times);
    const StationarityReport st = stationarity_check(q);

    auto qa = open_out(g.out, "qmatrix.csv");
    io::write_qmatrix_csv(qa, q);
    auto ta = open_out(g.out, "moments.csv");
    ta << "t,total,boundary_outflux";
    for (const auto& k : q.modes) {
        ta << ",x";
        for (int c = 0; c < q.dim; ++c) ta << "_" << k[c];
    }
    ta << "\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        ta << io::fmt(traj.times[i]) << "," << io::fmt(traj.x[i].sum()) << ","
           << io::fmt(traj.boundary_outflux[i]);
        for (int j = 0; j < traj.x[i].size(); ++j) ta << "," << io::fmt(traj.x[i](j));
        ta << "\n";
    }
    json strep;
    strep["interior_residual_of_ones"] = st.interior_residual_of_ones;
    strep["smallest_singular_value"] = st.smallest_singular_value;
    strep["constant_vector_stationary_on_interior"] = st.constant_vector_stationary_on_interior;
    strep["truncated_kernel_trivial"] = st.truncated_kernel_trivial;
    strep["note"] = st.note;
    auto sa = open_out(g.out, "stationarity.json");
    sa << strep.dump(2) << "\n";

    io::write_manifest(g.out, "moments", cfg, g.seed, resolve_threads(g.threads),
                       {"qmatrix.csv", "moments.csv", "stationarity.json"});
    note(g, "wrote qmatrix.csv, moments.csv, stationarity.json");
    return (st.constant_vector_stationary_on_interior && st.truncated_kernel_trivial) ? 0 : 1;
}

int cmd_compare_moments(const GlobalOpts& g, const std::string& file) {
    const json cfg = io::load_json(file);
    io::CompareMomentsJob job = io::compare_moments_job_from_json(cfg);
    if (g.seed_set) job.config.seed = g.seed;
    const MomentComparison cmp =
        moments_vs_montecarlo(job.config, job.u0, job.paths, job.checkpoints, g.threads);
    auto os = open_out(g.out, "moment_comparison.csv");
    io::write_moment_comparison_csv(os, cmp);
    io::write_manifest(g.out, "compare-moments", cfg, job.config.seed,
                       resolve_threads(g.threads), {"moment_comparison.csv"});
    note(g, "max interior |z| = " + io::fmt(cmp.max_interior_abs_z) + " over " +
                std::to_string(cmp.rows.size()) + " rows");
    return cmp.max_interior_abs_z <= job.z_max ? 0 : 1;
}

int cmd_parabolic(const GlobalOpts& g, const std::string& file) {
    const json cfg = io::load_json(file);
    const io::ParabolicJob job = io::parabolic_job_from_json(cfg);
    const Trajectory traj =
        solve_parabolic(job.u0, job.drift, job.nu, job.T, job.dt, job.cutoff, job.output_times);
    auto os = open_out(g.out, "parabolic.csv");
    io::write_trajectory_csv(os, traj);
    std::vector<std::string> outputs = {"parabolic.csv"};

    bool ok = true;
    if (job.picard_iterations > 0) {
        const PicardReport rep = picard_mild_check(job.u0, job.drift, job.nu, job.T, job.dt,
                                                   job.cutoff, job.picard_iterations);
        json pr;
        pr["iterate_distances"] = rep.iterate_distances;
        pr["contraction_factors"] = rep.contraction_factors;
        pr["distance_to_solver"] = rep.distance_to_solver;
        pr["contracted"] = rep.contracted;
        auto po = open_out(g.out, "picard.json");
        po << pr.dump(2) << "\n";
        outputs.push_back("picard.json");
        note(g, "picard fixed point vs solver: " + io::fmt(rep.distance_to_solver));
        ok = rep.contracted;
    }
    io::write_manifest(g.out, "parabolic", cfg, g.seed, resolve_threads(g.threads), outputs);
    return ok ? 0 : 1;
}

int cmd_scaling(const GlobalOpts& g, const std::string& file) {
    const json cfg = io::load_json(file);
    ScalingConfig sc = io::scaling_config_from_json(cfg);
    if (g.seed_set) sc.seed = g.seed;
    sc.threads = g.threads;
    const ConvergenceTable table = run_scaling_experiment(sc);
    const ScalingVerdict verdict = evaluate_scaling_table(
        table, sc.sequence.members.size(), sc.tests.size(), 4.0, sc.mean_z_tol);

    auto os = open_out(g.out, "convergence.csv");
    io::write_convergence_csv(os, table);
    auto gp = open_out(g.out, "convergence.gnuplot.dat");
    io::write_convergence_gnuplot(gp, table);

    json summary;
    summary["members"] = sc.sequence.members.size();
    summary["test_functions"] = sc.tests.size();
    summary["distances_strictly_decreasing"] = verdict.distances_strictly_decreasing;
    summary["variance_proportional"] = verdict.variance_proportional;
    summary["mean_consistent"] = verdict.mean_consistent;
    summary["variance_bounds_ok"] = table.variance_bounds_ok;
    summary["failures"] = verdict.failures;
    auto sj = open_out(g.out, "summary.json");
    sj << summary.dump(2) << "\n";

    io::write_manifest(g.out, "scaling", cfg, sc.seed, resolve_threads(g.threads),
                       {"convergence.csv", "convergence.gnuplot.dat", "summary.json"});
    note(g, std::string("scaling: ") +
                (verdict.failures.empty() ? "all checks passed" : verdict.failures.front()));
    return (verdict.distances_strictly_decreasing && verdict.variance_proportional &&
            verdict.mean_consistent && table.variance_bounds_ok)
               ? 0
               : 1;
}

int cmd_oned(const GlobalOpts& g, const std::string& file) {
    const json cfg = io::load_json(file);
    io::OneDimJob job = io::oned_job_from_json(cfg);
    if (!job.friction_limit) {
        if (g.seed_set) job.single.seed = g.seed;
        const Trajectory1D traj = simulate_1d(job.single, job.u0);
        auto os = open_out(g.out, "trajectory1d.csv");
        io::write_trajectory1d_csv(os, traj);
        io::write_manifest(g.out, "oned", cfg, job.single.seed, resolve_threads(g.threads),
                           {"trajectory1d.csv"});
        return 0;
    }
    if (g.seed_set) job.limit.seed = g.seed;
    job.limit.threads = g.threads;
    const FrictionTable table = run_friction_limit(job.limit);
    auto os = open_out(g.out, "friction.csv");
    io::write_friction_csv(os, table);

    // decreasing distances and measured diffusion across the sequence
    bool ok = true;
    const size_t np = table.n_phis;
    const size_t nm = table.rows.size() / np;
    for (size_t p = 0; p < np && ok; ++p)
        for (size_t m = 1; m < nm; ++m) {
            const auto& a = table.rows[(m - 1) * np + p];
            const auto& b = table.rows[m * np + p];
            if (!(b.dist_path_mean < a.dist_path_mean) &&
                (a.dist_path_mean > 1e-12 || b.dist_path_mean > 1e-12)) {
                ok = false;
                break;
            }
        }
    for (size_t m = 1; m < nm; ++m)
        if (!(table.rows[m * np].measured_diffusion < table.rows[(m - 1) * np].measured_diffusion))
            ok = false;

    io::write_manifest(g.out, "oned", cfg, job.limit.seed, resolve_threads(g.threads),
                       {"friction.csv"});
    note(g, std::string("friction limit: ") + (ok ? "distances and diffusion decreasing" : "check failed"));
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral Galerkin simulator for renormalized transport-noise equations"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", g.seed, "override the master seed");
    app.add_option("--threads", g.threads, "worker threads (0 = auto, env STLE_THREADS)");
    app.add_flag("--quiet", g.quiet, "suppress progress notes");

    std::string file;
    double nu = 0.0;

    auto* validate = app.add_subcommand("validate-spectrum", "check H1/H2 for a spectrum file");
    validate->add_option("file", file)->required();
    auto* corrector = app.add_subcommand("corrector", "corrector constant and renormalization");
    corrector->add_option("file", file)->required();
    corrector->add_option("--nu", nu, "report epsilon for this nu");
    auto* simulate = app.add_subcommand("simulate", "run one Galerkin path");
    simulate->add_option("config", file)->required();
    auto* moments = app.add_subcommand("moments", "Q-matrix export and moment ODE integration");
    moments->add_option("config", file)->required();
    auto* compare = app.add_subcommand("compare-moments", "Monte Carlo vs the moment oracle");
    compare->add_option("config", file)->required();
    auto* parabolic = app.add_subcommand("parabolic", "deterministic limit solver (+ Picard)");
    parabolic->add_option("config", file)->required();
    auto* scaling = app.add_subcommand("scaling", "renormalized convergence experiment");
    scaling->add_option("config", file)->required();
    auto* oned = app.add_subcommand("oned", "d = 1 simulation / friction-limit experiment");
    oned->add_option("config", file)->required();

    // global flags (--out, --seed, ...) are accepted after the subcommand too
    for (auto* sub : {validate, corrector, simulate, moments, compare, parabolic, scaling, oned})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        if (validate->parsed()) return cmd_validate_spectrum(g, file);
        if (corrector->parsed()) return cmd_corrector(g, file, nu);
        if (simulate->parsed()) return cmd_simulate(g, file);
        if (moments->parsed()) return cmd_moments(g, file);
        if (compare->parsed()) return cmd_compare_moments(g, file);
        if (parabolic->parsed()) return cmd_parabolic(g, file);
        if (scaling->parsed()) return cmd_scaling(g, file);
        if (oned->parsed()) return cmd_oned(g, file);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
