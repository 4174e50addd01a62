#pragma once

#include <string>
#include <vector>

#include "tomoseg/config.hpp"
#include "tomoseg/core.hpp"

namespace tomoseg {

/// Capped value reported when the error norm is exactly zero.
inline constexpr double kSnrCapDb = 999.0;

/// 20 log10(||ref|| / ||ref - est||); kSnrCapDb when the error norm is 0.
double snr_db(const Image& reference, const Image& estimate);
double snr_db(const Sinogram& reference, const Sinogram& estimate);

/// Log-scaled centered 2-D Fourier magnitude, normalized to [0, 1].
Image spectrum_magnitude(const Image& f);

enum class ConditionType { SparseView, LimitedAngle, LowDose };

struct ExperimentVariant {
    RegKind kind = RegKind::TV;
    bool global_on = false;
    std::string label() const;
};

struct ExperimentSpec {
    std::string name = "experiment";
    std::string phantom = "shepp_logan"; // shepp_logan | disk | image path
    int size = 256;
    double disk_radius_px = 0.0;         // 0: 0.35 * size
    bool modified_contrast = false;
    std::string output_dir = "runs";
    std::uint64_t seed = 0;
    double detector_pitch = 1.0; // detector count scales to keep diagonal coverage

    ConditionType condition = ConditionType::SparseView;
    std::vector<double> condition_values;            // n_views | widths (deg) | i0
    std::vector<std::pair<double, double>> ranges;   // explicit limited-angle ranges
    int lowdose_views = 180;
    double attenuation_scale = -1.0;                 // low dose: value scale applied before
                                                     // projection; <= 0 means 7.0 / size

    ReconConfig recon{};
    std::vector<ExperimentVariant> variants;

    void validate() const;
};

struct MetricsRow {
    std::string experiment;
    std::string variant;
    std::string param;
    double snr_db = 0.0;
    double seconds = 0.0;
    std::string trace_path;
    bool errored = false;
    std::string error;
};

/// Plain-text key-value format with [section] headers; see configs/ for
/// worked examples.
ExperimentSpec parse_experiment_spec(const std::string& path);
ExperimentSpec parse_experiment_spec_text(const std::string& text, const std::string& origin);

/// Run every condition value x variant: build geometry, simulate the
/// sinogram (Poisson noise for low dose), reconstruct, and write the final
/// image, error map, and per-iteration trace, plus metrics.csv with header
/// experiment,variant,param,snr_db,seconds. A failing row is reported and
/// skipped; the remaining rows still run.
std::vector<MetricsRow> run_experiment(const ExperimentSpec& spec);

/// Command-line entry point (subcommands: phantom, project, noise, recon,
/// experiment, spectrum, snr). Returns the process exit code.
int cli_main(int argc, char** argv);

} // namespace tomoseg
