#pragma once

#include <utility>

#include "tomoseg/config.hpp"
#include "tomoseg/core.hpp"
#include "tomoseg/geometry.hpp"

namespace tomoseg {

struct ReconResult {
    Image image;
    std::vector<IterationRecord> trace;
};

/// One simultaneous data-fidelity update: f + alpha * H^T (g - H f).
/// No clipping. Throws on divergence to non-finite values.
Image sirt_step(const Image& f, const Sinogram& g, const Geometry& geom, double alpha);

/// max(pixel, 0) elementwise; idempotent.
Image enforce_positivity(const Image& f);

/// Full reconstruction loop: per outer iteration a data step, positivity,
/// n_g local-constraint descent steps, and the global segmentation update
/// whenever i mod n_c == 0 and i < n_stop (1-based i). The initial image is
/// all zeros. Returns the final image and one record per iteration.
ReconResult reconstruct(const Sinogram& g, const Geometry& geom, const ReconConfig& cfg,
                        const Image* ground_truth = nullptr);

/// The (iteration, group count) pairs at which the global step fires.
std::vector<std::pair<int, int>> run_schedule_preview(const ReconConfig& cfg);

} // namespace tomoseg
