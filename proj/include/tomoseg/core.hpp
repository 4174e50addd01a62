#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tomoseg {

/// 2-D attenuation map on a square (or rectangular) pixel grid, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
        if (w < 0 || h < 0)
            throw std::invalid_argument("Image: negative dimensions");
    }

    double& at(int ix, int iy) { return data[static_cast<std::size_t>(iy) * width + ix]; }
    double at(int ix, int iy) const { return data[static_cast<std::size_t>(iy) * width + ix]; }
    std::size_t size() const { return data.size(); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Projection measurements, one row per angle, row-major over detector bins.
struct Sinogram {
    int n_angles = 0;
    int n_detectors = 0;
    std::vector<double> data;

    Sinogram() = default;
    Sinogram(int na, int nd, double fill = 0.0)
        : n_angles(na), n_detectors(nd), data(static_cast<std::size_t>(na) * nd, fill) {
        if (na < 0 || nd < 0)
            throw std::invalid_argument("Sinogram: negative dimensions");
    }

    double& at(int ia, int id) { return data[static_cast<std::size_t>(ia) * n_detectors + id]; }
    double at(int ia, int id) const { return data[static_cast<std::size_t>(ia) * n_detectors + id]; }
    std::size_t size() const { return data.size(); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("l2_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace tomoseg
