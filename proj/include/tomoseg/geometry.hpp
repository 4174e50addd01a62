#pragma once

#include <vector>

#include "tomoseg/core.hpp"

namespace tomoseg {

/// Parallel-beam acquisition description.
///
/// Angles are the normal direction of each projection line set, in degrees,
/// measured counterclockwise from the +x axis; at 0 degrees the rays run
/// vertically and the detector axis lies along +x. The detector is centered
/// on the grid center. A pixel contributes to a view by splatting its value
/// onto the two detector bins straddling the projection of its center, with
/// linear interpolation weights; the back projector is the literal transpose
/// (gather with the same weights), so <Hf, g> == <f, H^T g> holds to
/// rounding error by construction.
struct Geometry {
    int image_size = 0;          // pixels per side, square grid
    double pixel_pitch = 1.0;    // length units per pixel
    std::vector<double> angles_deg;
    int detector_count = 0;      // bins per view
    double detector_pitch = 1.0; // length units per bin

    /// Detector sized to cover the grid diagonal.
    static int default_detector_count(int image_size);

    /// Uniform geometry helper: n_views angles covering [start, end) when
    /// endpoint_exclusive, else [start, end] inclusive.
    static Geometry make_uniform(int image_size, int n_views, double start_deg,
                                 double end_deg, bool endpoint_exclusive = true);

    void validate() const;
};

/// Line-integral-style forward projection of f (the action of H).
Sinogram forward_project(const Image& f, const Geometry& geom);

/// Exact adjoint of forward_project (the action of H^T).
Image back_project(const Sinogram& g, const Geometry& geom);

/// Power-iteration estimate of the largest singular value of H.
/// Monotone non-decreasing in iters; deterministic (fixed internal seed).
double operator_norm_estimate(const Geometry& geom, int iters);

} // namespace tomoseg
