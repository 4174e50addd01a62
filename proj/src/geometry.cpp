#include "tomoseg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tomoseg {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

int Geometry::default_detector_count(int image_size) {
    return static_cast<int>(std::ceil(std::sqrt(2.0) * image_size));
}

Geometry Geometry::make_uniform(int image_size, int n_views, double start_deg,
                                double end_deg, bool endpoint_exclusive) {
    Geometry g;
    g.image_size = image_size;
    g.detector_count = default_detector_count(image_size);
    g.angles_deg.reserve(n_views);
    if (n_views == 1) {
        g.angles_deg.push_back(start_deg);
    } else {
        double span = end_deg - start_deg;
        double step = endpoint_exclusive ? span / n_views : span / (n_views - 1);
        for (int i = 0; i < n_views; ++i)
            g.angles_deg.push_back(start_deg + i * step);
    }
    g.validate();
    return g;
}

void Geometry::validate() const {
    if (image_size < 1)
        throw std::invalid_argument("Geometry: image_size must be >= 1");
    if (detector_count < 1)
        throw std::invalid_argument("Geometry: detector_count must be >= 1");
    if (angles_deg.empty())
        throw std::invalid_argument("Geometry: angles must be non-empty");
    if (!(pixel_pitch > 0.0) || !(detector_pitch > 0.0))
        throw std::invalid_argument("Geometry: pitches must be > 0");
    for (double a : angles_deg)
        if (!(a >= 0.0) || !(a < 360.0))
            throw std::invalid_argument("Geometry: angles must lie in [0, 360)");
    std::vector<double> sorted = angles_deg;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("Geometry: duplicate angles rejected");
}

namespace {

void check_image_matches(const Image& f, const Geometry& geom) {
    if (f.width != geom.image_size || f.height != geom.image_size)
        throw std::invalid_argument("forward_project: image dimensions do not match geometry");
}

void check_sino_matches(const Sinogram& g, const Geometry& geom) {
    if (g.n_angles != static_cast<int>(geom.angles_deg.size()) ||
        g.n_detectors != geom.detector_count)
        throw std::invalid_argument("back_project: sinogram dimensions do not match geometry");
}

} // namespace

Sinogram forward_project(const Image& f, const Geometry& geom) {
    geom.validate();
    check_image_matches(f, geom);
    if (!f.all_finite())
        throw std::invalid_argument("forward_project: non-finite pixel value");

    const int n = geom.image_size;
    const int na = static_cast<int>(geom.angles_deg.size());
    const int nd = geom.detector_count;
    const double p = geom.pixel_pitch;
    const double dp = geom.detector_pitch;
    const double amp = p * p / dp;        // per-pixel deposit, bin-width normalized
    const double c = 0.5 * (n - 1);
    const double cd = 0.5 * (nd - 1);

    Sinogram out(na, nd, 0.0);

#pragma omp parallel for schedule(static)
    for (int ia = 0; ia < na; ++ia) {
        const double th = geom.angles_deg[ia] * kPi / 180.0;
        const double ct = std::cos(th), st = std::sin(th);
        const double du = p * ct / dp;
        double* row = &out.data[static_cast<std::size_t>(ia) * nd];
        for (int iy = 0; iy < n; ++iy) {
            const double yw = (iy - c) * p;
            const double u0 = (yw * st - c * p * ct) / dp + cd;
            const double* src = &f.data[static_cast<std::size_t>(iy) * n];
            for (int ix = 0; ix < n; ++ix) {
                const double v = src[ix];
                if (v == 0.0) continue;
                const double u = u0 + ix * du;
                const double k0f = std::floor(u);
                const int k0 = static_cast<int>(k0f);
                const double w1 = u - k0f;
                const double av = amp * v;
                if (k0 >= 0 && k0 < nd) row[k0] += av * (1.0 - w1);
                if (k0 + 1 >= 0 && k0 + 1 < nd) row[k0 + 1] += av * w1;
            }
        }
    }
    return out;
}

Image back_project(const Sinogram& g, const Geometry& geom) {
    geom.validate();
    check_sino_matches(g, geom);

    const int n = geom.image_size;
    const int na = g.n_angles;
    const int nd = geom.detector_count;
    const double p = geom.pixel_pitch;
    const double dp = geom.detector_pitch;
    const double amp = p * p / dp;
    const double c = 0.5 * (n - 1);
    const double cd = 0.5 * (nd - 1);

    std::vector<double> ct(na), st(na), du(na);
    for (int ia = 0; ia < na; ++ia) {
        const double th = geom.angles_deg[ia] * kPi / 180.0;
        ct[ia] = std::cos(th);
        st[ia] = std::sin(th);
        du[ia] = p * ct[ia] / dp;
    }

    Image out(n, n, 0.0);

#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < n; ++iy) {
        const double yw = (iy - c) * p;
        double* dst = &out.data[static_cast<std::size_t>(iy) * n];
        for (int ia = 0; ia < na; ++ia) {
            const double u0 = (yw * st[ia] - c * p * ct[ia]) / dp + cd;
            const double dua = du[ia];
            const double* row = &g.data[static_cast<std::size_t>(ia) * nd];
            for (int ix = 0; ix < n; ++ix) {
                const double u = u0 + ix * dua;
                const double k0f = std::floor(u);
                const int k0 = static_cast<int>(k0f);
                const double w1 = u - k0f;
                double acc = 0.0;
                if (k0 >= 0 && k0 < nd) acc += (1.0 - w1) * row[k0];
                if (k0 + 1 >= 0 && k0 + 1 < nd) acc += w1 * row[k0 + 1];
                dst[ix] += amp * acc;
            }
        }
    }
    return out;
}

double operator_norm_estimate(const Geometry& geom, int iters) {
    geom.validate();
    if (iters < 1)
        throw std::invalid_argument("operator_norm_estimate: iters must be >= 1");

    const int n = geom.image_size;
    std::mt19937_64 rng(0x5eedull);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Image v(n, n);
    for (double& x : v.data) x = uni(rng);

    double sigma_sq = 0.0;
    for (int k = 0; k < iters; ++k) {
        const double vn = l2_norm(v.data);
        if (vn == 0.0) return 0.0;
        for (double& x : v.data) x /= vn;
        Sinogram hv = forward_project(v, geom);
        const double hn = l2_norm(hv.data);
        sigma_sq = hn * hn; // Rayleigh quotient of H^T H at unit v
        if (hn == 0.0) return 0.0;
        v = back_project(hv, geom);
    }
    return std::sqrt(sigma_sq);
}

} // namespace tomoseg
