#pragma once

#include "bcw/grid.hpp"
#include "bcw/harmonics.hpp"
#include "bcw/nd_map.hpp"
#include "bcw/reconstruction.hpp"

#include <json.hpp>
#include <string>
#include <vector>

namespace bcw {

/// Pipeline stages used as process exit codes on failure.
enum class Stage : int {
    Ok = 0,
    Config = 2,
    Grid = 3,
    Assembly = 4,
    Corruption = 5,   // noise / mask application
    Reconstruction = 6,
    Io = 7,
};

struct StageError : std::runtime_error {
    Stage stage;
    StageError(Stage s, const std::string& what) : std::runtime_error(what), stage(s) {}
};

/// Named ground-truth speed fields. c_bound is the wave-speed bound used for
/// the CFL time step; for expression speeds it is sampled on the fine lattice.
struct SpeedPreset {
    std::string name;        // constant1 | sinusoidal | piecewise | expression
    std::string expression;  // expression preset only
    double c_bound = 0;      // 0 = determine from samples

    static SpeedPreset named(const std::string& name);
    SpeedField sample(int I) const;
    double bound_for(int I_fine) const;
    std::string describe() const;
};

struct VariantSpec {
    std::string label = "clean";
    NoiseSpec noise;
    MaskSpec mask;
};

struct ExperimentConfig {
    std::string experiment = "custom";
    SpeedPreset speed = SpeedPreset::named("constant1");
    int I = 25;
    double T = 4.0;
    int fine_factor = 2;
    std::vector<VariantSpec> variants{VariantSpec{}};
    ReconConfig recon;
    std::vector<HarmonicFn> harmonics = default_family();
    std::string output_dir = "out";
    std::string cache_dir;      // empty: $BCW_CACHE_DIR, else <output_dir>/cache
    bool cache_refresh = false;
    bool paper_scale = false;   // required for I >= 40 runs
    bool export_spectrum = false;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    std::string digest() const;
};

/// The four paper experiment presets at desk scale.
ExperimentConfig preset_config(const std::string& name);

struct VariantReport {
    std::string label;
    double err_truth_pct = 0;
    double err_proj_pct = 0;
    double alpha = 0, sigma_max_sq = 0;
    double max_control_residual = 0;
    std::vector<std::string> warnings;
    nlohmann::json to_json() const;
};

struct FileEntry {
    std::string path;
    std::uint64_t bytes = 0;
    std::string checksum;
};

struct RunReport {
    std::string config_digest;
    std::vector<VariantReport> variants;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::vector<FileEntry> manifest;
    nlohmann::json metrics_json() const;  // deterministic, no timings
    nlohmann::json to_json() const;
};

/// assemble -> corrupt -> reconstruct -> report for every variant; writes
/// ground truth, projection, reconstruction and error grids plus metrics.json
/// and run_report.json under output_dir.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Assemble (or load from cache) the clean ND matrix of a configuration.
NdMatrix obtain_nd_map(const ExperimentConfig& cfg, std::vector<FileEntry>* manifest = nullptr);

/// CSV grid + min-max normalized PGM + bounds sidecar at <base>.{csv,pgm,json}.
std::vector<FileEntry> export_heatmap(const MatrixXd& values, const std::string& base);

/// Sorted singular values as CSV; returns the count below 1e-10 * sigma_max.
int spectrum_report(const OperatorMatrix& K, const std::string& path);
int spectrum_report(const MatrixXd& m, const std::string& path);

}  // namespace bcw
