#pragma once

#include <filesystem>
#include <iosfwd>
#include <nlohmann/json_fwd.hpp>
#include <string>

#include "stle/one_dim.hpp"
#include "stle/scaling.hpp"

namespace stle::io {

using json = nlohmann::json;

/// Full-precision scientific formatting ("%.17g"), locale-free.
std::string fmt(double v);

json load_json(const std::filesystem::path& path);

/// 64-bit FNV-1a over the canonical (sorted-key) JSON dump; manifest hash.
std::uint64_t fnv1a64(const std::string& s);

// --- field serialization -------------------------------------------------
// JSON-lines, one record per mode: {"k": [ints], "re": [floats], "im": [floats]}.
// Only half-lattice representatives (and mode 0) are written; Hermitian
// partners are reconstructed on read.

void write_field_jsonl(std::ostream& os, const SpectralField& f);
SpectralField read_field_jsonl(std::istream& is, int dim, int ncomp, int cutoff);

/// Inline JSON form used inside configs: array of mode records.
SpectralField field_from_json(const json& modes, int dim, int ncomp, int cutoff,
                              const std::string& path);

// --- spectrum files -------------------------------------------------------
// Either {"dim", "family", "alpha"[, "beta"], "support_cutoff"} or
// {"dim", "thetas": [{"k": [...], "theta": x}, ...]}.

NoiseSpectrum spectrum_from_json(const json& j, const std::string& path);
NoiseSpectrum load_spectrum(const std::filesystem::path& path);

SpectrumSequence sequence_from_json(const json& j, const std::string& path);

// --- run configs ----------------------------------------------------------

struct SimulateJob {
    SdeRunConfig config;
    SpectralField u0 = SpectralField::scalar(2, 1);
    std::string format = "jsonl";  // or "csv"
};
SimulateJob simulate_job_from_json(const json& j);

struct MomentsJob {
    NoiseSpectrum spectrum;
    double epsilon = 0.0;
    int K = 0;
    double T = 0.0;
    double dt = 0.0;
    std::vector<double> output_times;
    std::map<Mode, double> x0;
};
MomentsJob moments_job_from_json(const json& j);

struct CompareMomentsJob {
    SdeRunConfig config;
    SpectralField u0 = SpectralField::scalar(2, 1);
    int paths = 0;
    std::vector<double> checkpoints;
    double z_max = 4.0;
};
CompareMomentsJob compare_moments_job_from_json(const json& j);

struct ParabolicJob {
    SpectralField u0 = SpectralField::scalar(2, 1);
    DriftSnapshots drift;
    double nu = 0.0;
    double T = 0.0;
    double dt = 0.0;
    int cutoff = 0;
    std::vector<double> output_times;
    int picard_iterations = 0;  // 0 = skip the cross-check
};
ParabolicJob parabolic_job_from_json(const json& j);

ScalingConfig scaling_config_from_json(const json& j);

struct OneDimJob {
    bool friction_limit = false;
    Config1D single;             // when friction_limit == false
    RealField1D u0;
    FrictionLimitConfig limit;   // when friction_limit == true
};
OneDimJob oned_job_from_json(const json& j);

// --- output writers ---------------------------------------------------------

void write_trajectory_jsonl(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory1d_csv(std::ostream& os, const Trajectory1D& traj);
void write_qmatrix_csv(std::ostream& os, const QMatrix& q);
void write_moment_comparison_csv(std::ostream& os, const MomentComparison& cmp);
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table);
void write_convergence_gnuplot(std::ostream& os, const ConvergenceTable& table);
void write_friction_csv(std::ostream& os, const FrictionTable& table);

/// Every run drops a manifest next to its outputs; rerunning with the same
/// manifest reproduces the outputs bit-exactly.
void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const json& config, std::uint64_t seed, int threads,
                    const std::vector<std::string>& outputs);

}  // namespace stle::io
