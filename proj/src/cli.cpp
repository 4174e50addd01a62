#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tomoseg/geometry.hpp"
#include "tomoseg/harness.hpp"
#include "tomoseg/io.hpp"
#include "tomoseg/simulate.hpp"
#include "tomoseg/solver.hpp"

namespace tomoseg {

namespace {

struct AngleRange {
    double start = 0.0;
    double end = 180.0;
};

AngleRange parse_angle_range(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("--angles", "expected 'start:end', got '" + s + "'");
    AngleRange r;
    r.start = std::stod(s.substr(0, colon));
    r.end = std::stod(s.substr(colon + 1));
    return r;
}

Geometry geometry_from_flags(int size, int views, const std::string& angles,
                             bool include_end, int detectors, double pitch) {
    const AngleRange r = parse_angle_range(angles);
    Geometry geom = Geometry::make_uniform(size, views, r.start, r.end, !include_end);
    if (detectors > 0) geom.detector_count = detectors;
    geom.pixel_pitch = pitch;
    geom.validate();
    return geom;
}

void add_recon_flags(CLI::App* cmd, ReconConfig& cfg, std::string& reg,
                     std::string& global_flag, std::string& step_mode) {
    cmd->add_option("--alpha", cfg.alpha, "Data step size");
    cmd->add_option("--beta", cfg.beta, "Constraint step size in [0,1]");
    cmd->add_option("--n-g", cfg.n_g, "Local descent steps per iteration");
    cmd->add_option("--n-c", cfg.n_c, "Global constraint period");
    cmd->add_option("--n-stop", cfg.n_stop, "Iteration after which the global step stops");
    cmd->add_option("--iters", cfg.n_iter, "Outer iterations");
    cmd->add_option("--n-groups", cfg.group_count_override,
                    "Fixed group count (0 = schedule)");
    cmd->add_option("--seed", cfg.rng_seed, "RNG seed");
    cmd->add_option("--reg", reg, "Regularizer: tv|atv|rwatv|qggmrf")->capture_default_str();
    cmd->add_option("--global", global_flag, "Global constraint: on|off")->capture_default_str();
    cmd->add_option("--step-mode", step_mode, "normalized|raw")->capture_default_str();
    cmd->add_option("--reg-a", cfg.regularizer.a, "Anisotropy weight a");
    cmd->add_option("--reg-b", cfg.regularizer.b, "Anisotropy weight b");
    cmd->add_option("--reg-p", cfg.regularizer.p, "qGGMRF p");
    cmd->add_option("--reg-q", cfg.regularizer.q, "qGGMRF q");
    cmd->add_option("--reg-c", cfg.regularizer.c, "qGGMRF c");
}

} // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Iterative CT reconstruction with a global gray-level segmentation constraint"};
    app.require_subcommand(1);

    // phantom
    auto* cmd_phantom = app.add_subcommand("phantom", "Generate a phantom image");
    std::string ph_kind = "shepp_logan", ph_out;
    int ph_size = 256;
    double ph_radius = 0.0;
    bool ph_modified = false;
    cmd_phantom->add_option("--kind", ph_kind, "shepp_logan|disk")->capture_default_str();
    cmd_phantom->add_option("--size", ph_size, "Pixels per side")->capture_default_str();
    cmd_phantom->add_option("--radius", ph_radius, "Disk radius in pixels");
    cmd_phantom->add_flag("--modified", ph_modified, "High-contrast Shepp-Logan densities");
    cmd_phantom->add_option("-o,--output", ph_out, "Output image (.pgm/.f32)")->required();

    // project
    auto* cmd_project = app.add_subcommand("project", "Forward project an image");
    std::string pr_in, pr_out, pr_angles = "0:180";
    int pr_views = 180, pr_detectors = 0;
    double pr_pitch = 1.0;
    bool pr_include_end = false;
    cmd_project->add_option("-i,--input", pr_in, "Input image")->required();
    cmd_project->add_option("-o,--output", pr_out, "Output sinogram (.f32)")->required();
    cmd_project->add_option("--views", pr_views, "Number of views")->capture_default_str();
    cmd_project->add_option("--angles", pr_angles, "Angular range start:end")->capture_default_str();
    cmd_project->add_flag("--include-end", pr_include_end, "Include the end angle");
    cmd_project->add_option("--detectors", pr_detectors, "Detector bins (default: covers diagonal)");
    cmd_project->add_option("--pitch", pr_pitch, "Pixel pitch")->capture_default_str();

    // noise
    auto* cmd_noise = app.add_subcommand("noise", "Poisson low-dose sinogram");
    std::string no_in, no_out;
    double no_i0 = 1e5;
    std::uint64_t no_seed = 0;
    cmd_noise->add_option("-i,--input", no_in, "Clean sinogram (.f32)")->required();
    cmd_noise->add_option("-o,--output", no_out, "Noisy sinogram (.f32)")->required();
    cmd_noise->add_option("--i0", no_i0, "Blank-scan photon count")->capture_default_str();
    cmd_noise->add_option("--seed", no_seed, "RNG seed")->capture_default_str();

    // recon
    auto* cmd_recon = app.add_subcommand("recon", "Reconstruct from a sinogram");
    std::string rc_in, rc_out, rc_truth, rc_trace, rc_angles = "0:180";
    std::string rc_reg = "tv", rc_global = "on", rc_step = "normalized";
    int rc_size = 0, rc_views = 0, rc_detectors = 0;
    double rc_pitch = 1.0;
    bool rc_include_end = false;
    ReconConfig rc_cfg;
    cmd_recon->add_option("-i,--input", rc_in, "Sinogram (.f32)")->required();
    cmd_recon->add_option("-o,--output", rc_out, "Output image (.pgm/.f32)")->required();
    cmd_recon->add_option("--size", rc_size, "Image size (pixels per side)")->required();
    cmd_recon->add_option("--views", rc_views, "Number of views (default: sinogram rows)");
    cmd_recon->add_option("--angles", rc_angles, "Angular range start:end")->capture_default_str();
    cmd_recon->add_flag("--include-end", rc_include_end, "Include the end angle");
    cmd_recon->add_option("--detectors", rc_detectors, "Detector bins (default: sinogram columns)");
    cmd_recon->add_option("--pitch", rc_pitch, "Pixel pitch")->capture_default_str();
    cmd_recon->add_option("--truth", rc_truth, "Ground-truth image for SNR reporting");
    cmd_recon->add_option("--trace", rc_trace, "Per-iteration trace CSV");
    add_recon_flags(cmd_recon, rc_cfg, rc_reg, rc_global, rc_step);

    // experiment
    auto* cmd_exp = app.add_subcommand("experiment", "Run an experiment spec file");
    std::string ex_file;
    cmd_exp->add_option("spec", ex_file, "Experiment spec file")->required();

    // spectrum
    auto* cmd_spec = app.add_subcommand("spectrum", "Fourier magnitude image");
    std::string sp_in, sp_out;
    cmd_spec->add_option("-i,--input", sp_in, "Input image")->required();
    cmd_spec->add_option("-o,--output", sp_out, "Output image (.pgm/.f32)")->required();

    // snr
    auto* cmd_snr = app.add_subcommand("snr", "SNR between two images");
    std::string sn_ref, sn_est;
    cmd_snr->add_option("reference", sn_ref, "Reference image")->required();
    cmd_snr->add_option("estimate", sn_est, "Estimate image")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*cmd_phantom) {
            PhantomSpec spec;
            if (ph_kind == "shepp_logan") spec.kind = PhantomKind::SheppLogan;
            else if (ph_kind == "disk") spec.kind = PhantomKind::Disk;
            else throw std::runtime_error("unknown phantom kind: " + ph_kind);
            spec.size = ph_size;
            spec.disk_radius_px = ph_radius > 0.0 ? ph_radius : 0.35 * ph_size;
            spec.modified_contrast = ph_modified;
            save_image(make_phantom(spec), ph_out);
        } else if (*cmd_project) {
            const Image img = load_grayscale(pr_in);
            if (img.width != img.height)
                throw std::runtime_error("project: image must be square");
            Geometry geom = geometry_from_flags(img.width, pr_views, pr_angles,
                                                pr_include_end, pr_detectors, pr_pitch);
            save_sinogram_f32(forward_project(img, geom), pr_out);
        } else if (*cmd_noise) {
            const Sinogram g = load_sinogram_f32(no_in);
            save_sinogram_f32(simulate_lowdose(g, NoiseSpec{no_i0, no_seed}), no_out);
        } else if (*cmd_recon) {
            const Sinogram g = load_sinogram_f32(rc_in);
            if (rc_views == 0) rc_views = g.n_angles;
            Geometry geom = geometry_from_flags(rc_size, rc_views, rc_angles,
                                                rc_include_end, rc_detectors, rc_pitch);
            if (rc_detectors == 0) geom.detector_count = g.n_detectors;
            rc_cfg.regularizer.kind = reg_kind_from_name(rc_reg);
            rc_cfg.global_enabled = rc_global == "on";
            rc_cfg.step_mode = rc_step == "raw" ? StepMode::Raw : StepMode::Normalized;
            if (!cmd_recon->count("--n-stop") && rc_cfg.n_stop > rc_cfg.n_iter)
                rc_cfg.n_stop = rc_cfg.n_iter;

            Image truth;
            const Image* truth_ptr = nullptr;
            if (!rc_truth.empty()) {
                truth = load_grayscale(rc_truth);
                truth_ptr = &truth;
            }
            ReconResult res = reconstruct(g, geom, rc_cfg, truth_ptr);
            save_image(res.image, rc_out);
            if (truth_ptr) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.6f", snr_db(truth, res.image));
                std::cout << buf << "\n";
            }
            if (!rc_trace.empty()) {
                std::ofstream out(rc_trace);
                out << "iteration,residual_norm,snr_db,update_magnitude,n_groups\n";
                for (const auto& r : res.trace) {
                    out << r.iteration << ',' << r.residual_norm << ',';
                    if (r.snr_db) out << *r.snr_db;
                    out << ',' << r.update_magnitude << ',';
                    if (r.n_groups) out << *r.n_groups;
                    out << '\n';
                }
            }
        } else if (*cmd_exp) {
            const ExperimentSpec spec = parse_experiment_spec(ex_file);
            const auto rows = run_experiment(spec);
            int errored = 0;
            for (const auto& r : rows)
                if (r.errored) ++errored;
            std::cout << rows.size() - errored << " rows written to " << spec.output_dir
                      << "/metrics.csv\n";
            if (errored > 0)
                throw std::runtime_error(std::to_string(errored) + " rows failed");
        } else if (*cmd_spec) {
            save_image(spectrum_magnitude(load_grayscale(sp_in)), sp_out);
        } else if (*cmd_snr) {
            const Image ref = load_grayscale(sn_ref);
            const Image est = load_grayscale(sn_est);
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6f", snr_db(ref, est));
            std::cout << buf << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace tomoseg
