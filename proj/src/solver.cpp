#include "tomoseg/solver.hpp"

#include <cmath>
#include <iostream>

#include "tomoseg/globalseg.hpp"
#include "tomoseg/harness.hpp"

namespace tomoseg {

void ReconConfig::validate() const {
    if (!(alpha > 0.0))
        throw std::invalid_argument("ReconConfig: alpha must be > 0");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw std::invalid_argument("ReconConfig: beta must be in [0, 1]");
    if (beta_local >= 0.0 && beta_local > 1.0)
        throw std::invalid_argument("ReconConfig: beta_local must be in [0, 1]");
    if (beta_global >= 0.0 && beta_global > 1.0)
        throw std::invalid_argument("ReconConfig: beta_global must be in [0, 1]");
    if (n_g < 0)
        throw std::invalid_argument("ReconConfig: n_g must be >= 0");
    if (n_c < 1)
        throw std::invalid_argument("ReconConfig: n_c must be >= 1");
    if (n_stop < 0 || n_stop > n_iter)
        throw std::invalid_argument("ReconConfig: need 0 <= n_stop <= n_iter");
    if (n_iter < 0)
        throw std::invalid_argument("ReconConfig: n_iter must be >= 0");
    if (data_steps < 1)
        throw std::invalid_argument("ReconConfig: data_steps must be >= 1");
    if (group_count_override != 0 && group_count_override < 2)
        throw std::invalid_argument("ReconConfig: group_count_override must be 0 or >= 2");
    regularizer.validate();
}

Image sirt_step(const Image& f, const Sinogram& g, const Geometry& geom, double alpha) {
    if (!(alpha >= 0.0))
        throw std::invalid_argument("sirt_step: alpha must be >= 0");
    Sinogram residual = forward_project(f, geom);
    if (residual.n_angles != g.n_angles || residual.n_detectors != g.n_detectors)
        throw std::invalid_argument("sirt_step: sinogram dimensions do not match geometry");
    for (std::size_t i = 0; i < residual.data.size(); ++i)
        residual.data[i] = g.data[i] - residual.data[i];
    Image update = back_project(residual, geom);
    Image out = f;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] += alpha * update.data[i];
    if (!out.all_finite())
        throw std::runtime_error("sirt_step: divergence, non-finite result");
    return out;
}

Image enforce_positivity(const Image& f) {
    Image out = f;
    for (double& v : out.data)
        if (v < 0.0) v = 0.0;
    return out;
}

std::vector<std::pair<int, int>> run_schedule_preview(const ReconConfig& cfg) {
    cfg.validate();
    std::vector<std::pair<int, int>> schedule;
    if (!cfg.global_enabled) return schedule;
    for (int i = 1; i <= cfg.n_iter; ++i)
        if (i % cfg.n_c == 0 && i < cfg.n_stop)
            schedule.emplace_back(i, scheduled_group_count(i, cfg));
    return schedule;
}

ReconResult reconstruct(const Sinogram& g, const Geometry& geom, const ReconConfig& cfg,
                        const Image* ground_truth) {
    cfg.validate();
    geom.validate();
    if (g.n_angles != static_cast<int>(geom.angles_deg.size()) ||
        g.n_detectors != geom.detector_count)
        throw std::invalid_argument("reconstruct: sinogram dimensions do not match geometry");
    if (!g.all_finite())
        throw std::invalid_argument("reconstruct: non-finite sinogram value");
    if (ground_truth &&
        (ground_truth->width != geom.image_size || ground_truth->height != geom.image_size))
        throw std::invalid_argument("reconstruct: ground truth dimensions do not match geometry");

    ReconResult result;
    result.image = Image(geom.image_size, geom.image_size, 0.0);
    if (cfg.n_iter == 0) return result;

    // Normalized mode is the classical SIRT update
    //   f += alpha * C^-1 H^T R^-1 r
    // with R, C the row and column sums of H, stable for alpha in (0, 2).
    // Raw mode applies alpha to H^T r directly.
    const bool normalized = cfg.step_mode == StepMode::Normalized;
    std::vector<double> inv_row, inv_col;
    if (normalized) {
        Sinogram row_sums = forward_project(Image(geom.image_size, geom.image_size, 1.0), geom);
        Image col_sums = back_project(
            Sinogram(g.n_angles, g.n_detectors, 1.0), geom);
        inv_row.resize(row_sums.data.size());
        for (std::size_t k = 0; k < inv_row.size(); ++k)
            inv_row[k] = row_sums.data[k] > 1e-12 ? 1.0 / row_sums.data[k] : 0.0;
        inv_col.resize(col_sums.data.size());
        for (std::size_t k = 0; k < inv_col.size(); ++k)
            inv_col[k] = col_sums.data[k] > 1e-12 ? 1.0 / col_sums.data[k] : 0.0;
        if (cfg.alpha >= 2.0)
            std::cerr << "reconstruct: warning: normalized alpha " << cfg.alpha
                      << " >= 2, the data step may diverge\n";
    } else {
        const double sigma = operator_norm_estimate(geom, 30);
        if (sigma > 0.0 && cfg.alpha > 2.0 / (sigma * sigma))
            std::cerr << "reconstruct: warning: alpha " << cfg.alpha
                      << " exceeds the safety bound " << 2.0 / (sigma * sigma)
                      << ", the data step may diverge\n";
    }
    const double alpha_eff = cfg.alpha;

    const double beta_local = cfg.local_beta();
    const double initial_residual = l2_norm(g.data);
    result.trace.reserve(cfg.n_iter);

    Image f = result.image;
    for (int i = 1; i <= cfg.n_iter; ++i) {
        const Image prev = f;

        // Data sub-steps; the first residual norm is the state entering this
        // iteration and completes the previous record.
        for (int sub = 0; sub < cfg.data_steps; ++sub) {
            Sinogram residual = forward_project(f, geom);
            for (std::size_t k = 0; k < residual.data.size(); ++k)
                residual.data[k] = g.data[k] - residual.data[k];
            if (sub == 0) {
                const double res_norm = l2_norm(residual.data);
                if (i > 1) result.trace[i - 2].residual_norm = res_norm;
                if (!std::isfinite(res_norm) || res_norm > 1e3 * initial_residual)
                    throw std::runtime_error("reconstruct: divergence at iteration " +
                                             std::to_string(i) + ", residual " +
                                             std::to_string(res_norm) + " vs initial " +
                                             std::to_string(initial_residual));
            }
            if (normalized)
                for (std::size_t k = 0; k < residual.data.size(); ++k)
                    residual.data[k] *= inv_row[k];
            Image update = back_project(residual, geom);
            if (normalized)
                for (std::size_t k = 0; k < update.data.size(); ++k)
                    update.data[k] *= inv_col[k];
            for (std::size_t k = 0; k < f.data.size(); ++k)
                f.data[k] += alpha_eff * update.data[k];
        }

        f = enforce_positivity(f);

        if (cfg.n_g > 0 && beta_local > 0.0)
            f = descent_step(f, cfg.regularizer, beta_local, cfg.n_g);

        IterationRecord rec;
        rec.iteration = i;
        if (cfg.global_enabled && i % cfg.n_c == 0 && i < cfg.n_stop) {
            rec.n_groups = scheduled_group_count(i, cfg);
            f = global_update(f, i, cfg);
        }

        rec.update_magnitude = l2_distance(f.data, prev.data);
        if (ground_truth) rec.snr_db = snr_db(*ground_truth, f);
        result.trace.push_back(rec);
    }

    // Final residual for the last record.
    Sinogram hf = forward_project(f, geom);
    double s = 0.0;
    for (std::size_t k = 0; k < hf.data.size(); ++k) {
        const double d = g.data[k] - hf.data[k];
        s += d * d;
    }
    result.trace.back().residual_norm = std::sqrt(s);

    result.image = std::move(f);
    return result;
}

} // namespace tomoseg
