#pragma once

#include <cstdint>

#include "tomoseg/core.hpp"

namespace tomoseg {

enum class PhantomKind { SheppLogan, Disk, CustomEllipses };

/// One additive ellipse in normalized [-1, 1]^2 coordinates.
struct EllipseSpec {
    double cx = 0.0;
    double cy = 0.0;
    double half_axis_x = 0.0;
    double half_axis_y = 0.0;
    double angle_deg = 0.0;
    double density = 0.0;
};

struct PhantomSpec {
    PhantomKind kind = PhantomKind::SheppLogan;
    int size = 256;
    double disk_radius_px = 0.0;    // disk only, in pixels
    bool modified_contrast = false; // Shepp-Logan high-contrast variant
    std::vector<EllipseSpec> ellipses;

    void validate() const;
};

/// Analytic evaluation at pixel centers; values clamped to >= 0.
Image make_phantom(const PhantomSpec& spec);

Image make_shepp_logan(int size, bool modified_contrast = false);
Image make_disk(int size, double radius_px);

struct NoiseSpec {
    double i0 = 1e5;        // blank-scan photon count
    std::uint64_t seed = 0;

    void validate() const;
};

/// Poisson low-dose measurement of clean line integrals g:
/// per bin, Y ~ Poisson(I0 * exp(-g)) and the returned value is
/// -ln(max(Y, 1) / I0). Per-bin RNG streams derive from (seed, bin index),
/// so parallel and serial evaluation agree bit for bit.
Sinogram simulate_lowdose(const Sinogram& g, const NoiseSpec& noise);

} // namespace tomoseg
