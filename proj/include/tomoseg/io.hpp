#pragma once

#include <string>

#include "tomoseg/core.hpp"

namespace tomoseg {

struct ImageFileInfo {
    int width = 0;
    int height = 0;
    int bit_depth = 0; // 8 or 16 for PGM, 32 for raw float
};

/// Load a grayscale image. ".pgm" reads binary PGM (8- or 16-bit) scaled to
/// [0, 1]; ".f32"/".raw" reads little-endian 32-bit floats described by a
/// "<path>.hdr" sidecar holding "width height".
Image load_grayscale(const std::string& path, ImageFileInfo* info = nullptr);

/// Binary PGM with fixed [0, 1] -> full-scale mapping (values clamped).
void save_pgm(const Image& img, const std::string& path, int bit_depth = 8);

/// 8-bit PGM preview with [lo, hi] windowing; lo >= hi means min-max.
void save_pgm_preview(const Image& img, const std::string& path, double lo = 0.0,
                      double hi = -1.0);

/// Raw little-endian float32 plus the "<path>.hdr" sidecar.
void save_raw_f32(const Image& img, const std::string& path);

/// Dispatch on extension: ".pgm" -> save_pgm, ".f32"/".raw" -> save_raw_f32.
void save_image(const Image& img, const std::string& path);

/// Sinograms reuse the raw float32 container, one row per angle.
void save_sinogram_f32(const Sinogram& g, const std::string& path);
Sinogram load_sinogram_f32(const std::string& path);

} // namespace tomoseg
