#include "tomoseg/simulate.hpp"

#include <cmath>
#include <random>

namespace tomoseg {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Shepp & Logan's ten-ellipse head phantom. The modified variant swaps the
// low-contrast interior densities for the high-contrast ones common in
// textbook reproductions.
std::vector<EllipseSpec> shepp_logan_ellipses(bool modified) {
    std::vector<EllipseSpec> e{
        {0.0, 0.0, 0.69, 0.92, 0.0, 2.0},
        {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98},
        {0.22, 0.0, 0.11, 0.31, -18.0, -0.02},
        {-0.22, 0.0, 0.16, 0.41, 18.0, -0.02},
        {0.0, 0.35, 0.21, 0.25, 0.0, 0.01},
        {0.0, 0.1, 0.046, 0.046, 0.0, 0.01},
        {0.0, -0.1, 0.046, 0.046, 0.0, 0.01},
        {-0.08, -0.605, 0.046, 0.023, 0.0, 0.01},
        {0.0, -0.605, 0.023, 0.023, 0.0, 0.01},
        {0.06, -0.605, 0.023, 0.046, 0.0, 0.01},
    };
    if (modified) {
        const double dens[10] = {1.0, -0.8, -0.2, -0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
        for (int i = 0; i < 10; ++i) e[i].density = dens[i];
    }
    return e;
}

Image render_ellipses(int size, const std::vector<EllipseSpec>& ellipses) {
    Image img(size, size, 0.0);
    const double c = 0.5 * (size - 1);
    const double scale = 2.0 / size; // pixel centers in (-1, 1)
    for (const auto& e : ellipses) {
        const double th = e.angle_deg * kPi / 180.0;
        const double ct = std::cos(th), st = std::sin(th);
        for (int iy = 0; iy < size; ++iy) {
            const double y = (c - iy) * scale; // row 0 at the top
            for (int ix = 0; ix < size; ++ix) {
                const double x = (ix - c) * scale;
                const double rx = (ct * (x - e.cx) + st * (y - e.cy)) / e.half_axis_x;
                const double ry = (-st * (x - e.cx) + ct * (y - e.cy)) / e.half_axis_y;
                if (rx * rx + ry * ry <= 1.0)
                    img.at(ix, iy) += e.density;
            }
        }
    }
    for (double& v : img.data)
        if (v < 0.0) v = 0.0;
    return img;
}

} // namespace

void PhantomSpec::validate() const {
    if (size < 16)
        throw std::invalid_argument("PhantomSpec: size must be >= 16");
    if (kind == PhantomKind::Disk && !(disk_radius_px >= 0.0))
        throw std::invalid_argument("PhantomSpec: disk radius must be >= 0");
    for (const auto& e : ellipses) {
        if (!std::isfinite(e.density))
            throw std::invalid_argument("PhantomSpec: non-finite density");
        if (!(e.half_axis_x > 0.0) || !(e.half_axis_y > 0.0))
            throw std::invalid_argument("PhantomSpec: ellipse half-axes must be > 0");
    }
}

Image make_shepp_logan(int size, bool modified_contrast) {
    return render_ellipses(size, shepp_logan_ellipses(modified_contrast));
}

Image make_disk(int size, double radius_px) {
    Image img(size, size, 0.0);
    const double c = 0.5 * (size - 1);
    for (int iy = 0; iy < size; ++iy)
        for (int ix = 0; ix < size; ++ix) {
            const double dx = ix - c, dy = iy - c;
            if (std::sqrt(dx * dx + dy * dy) < radius_px)
                img.at(ix, iy) = 1.0;
        }
    return img;
}

Image make_phantom(const PhantomSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case PhantomKind::SheppLogan:
            return make_shepp_logan(spec.size, spec.modified_contrast);
        case PhantomKind::Disk:
            return make_disk(spec.size, spec.disk_radius_px);
        case PhantomKind::CustomEllipses:
            return render_ellipses(spec.size, spec.ellipses);
    }
    throw std::logic_error("make_phantom: unreachable");
}

void NoiseSpec::validate() const {
    if (!(i0 > 0.0))
        throw std::invalid_argument("NoiseSpec: i0 must be > 0");
}

namespace {

// SplitMix64, used to whiten (seed, bin) into an engine seed.
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace

Sinogram simulate_lowdose(const Sinogram& g, const NoiseSpec& noise) {
    noise.validate();
    if (!g.all_finite())
        throw std::invalid_argument("simulate_lowdose: non-finite sinogram value");

    Sinogram out(g.n_angles, g.n_detectors, 0.0);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(g.data.size()); ++i) {
        const double mean = noise.i0 * std::exp(-g.data[i]);
        std::mt19937_64 rng(splitmix64(noise.seed * 0x9e3779b97f4a7c15ull +
                                       static_cast<std::uint64_t>(i)));
        std::poisson_distribution<long long> poisson(mean);
        const long long y = poisson(rng);
        out.data[i] = -std::log(static_cast<double>(std::max<long long>(y, 1)) / noise.i0);
    }
    return out;
}

} // namespace tomoseg
