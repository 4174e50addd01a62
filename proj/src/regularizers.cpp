#include "tomoseg/regularizers.hpp"

#include <algorithm>
#include <cmath>

namespace tomoseg {

const char* reg_kind_name(RegKind kind) {
    switch (kind) {
        case RegKind::TV: return "tv";
        case RegKind::ATV: return "atv";
        case RegKind::RwATV: return "rwatv";
        case RegKind::QGGMRF: return "qggmrf";
    }
    return "?";
}

RegKind reg_kind_from_name(const std::string& name) {
    if (name == "tv") return RegKind::TV;
    if (name == "atv") return RegKind::ATV;
    if (name == "rwatv") return RegKind::RwATV;
    if (name == "qggmrf") return RegKind::QGGMRF;
    throw std::invalid_argument("unknown regularizer kind: " + name);
}

void RegularizerParams::validate() const {
    if (!(a >= 0.0) || !(b >= 0.0))
        throw std::invalid_argument("RegularizerParams: a, b must be >= 0");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("RegularizerParams: epsilon must be > 0");
    if (!(q >= 1.0 && q <= p && p <= 2.0))
        throw std::invalid_argument("RegularizerParams: need 1 <= q <= p <= 2");
    if (!(c > 0.0))
        throw std::invalid_argument("RegularizerParams: c must be > 0");
    if (!(lambda_weight >= 0.0))
        throw std::invalid_argument("RegularizerParams: lambda_weight must be >= 0");
}

namespace {

// Forward differences with replicate boundary (edge differences are 0).
inline double dx_at(const Image& f, int ix, int iy) {
    return ix + 1 < f.width ? f.at(ix + 1, iy) - f.at(ix, iy) : 0.0;
}
inline double dy_at(const Image& f, int ix, int iy) {
    return iy + 1 < f.height ? f.at(ix, iy + 1) - f.at(ix, iy) : 0.0;
}

double weighted_atv(const Image& f, double a, double b, const std::vector<double>* w) {
    double s = 0.0;
    for (int iy = 0; iy < f.height; ++iy)
        for (int ix = 0; ix < f.width; ++ix) {
            const double dx = dx_at(f, ix, iy);
            const double dy = dy_at(f, ix, iy);
            const double m = std::sqrt(a * dx * dx + b * dy * dy);
            s += w ? (*w)[static_cast<std::size_t>(iy) * f.width + ix] * m : m;
        }
    return s;
}

// d rho / d delta for the qGGMRF potential.
double qggmrf_potential_deriv(double delta, const RegularizerParams& prm) {
    if (delta == 0.0) return 0.0;
    const double u = std::fabs(delta);
    const double sgn = delta > 0.0 ? 1.0 : -1.0;
    const double e = prm.p - prm.q;
    const double t = std::pow(u / prm.c, e);
    const double denom = 1.0 + t;
    const double up1 = std::pow(u, prm.p - 1.0);
    double d = prm.p * up1 / denom;
    if (e > 0.0)
        d -= up1 * e * t / (denom * denom);
    return sgn * d;
}

Image smoothed_gradient_tv_family(const Image& f, const RegularizerParams& prm,
                                  const std::vector<double>* w) {
    const int W = f.width, H = f.height;
    const double a = prm.kind == RegKind::TV ? 1.0 : prm.a;
    const double b = prm.kind == RegKind::TV ? 1.0 : prm.b;

    // Per-pixel inverse magnitudes r/m with epsilon smoothing inside the sqrt.
    std::vector<double> dxv(f.size()), dyv(f.size()), inv_m(f.size());
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < H; ++iy)
        for (int ix = 0; ix < W; ++ix) {
            const std::size_t i = static_cast<std::size_t>(iy) * W + ix;
            const double dx = dx_at(f, ix, iy);
            const double dy = dy_at(f, ix, iy);
            dxv[i] = dx;
            dyv[i] = dy;
            double r = w ? (*w)[i] : 1.0;
            inv_m[i] = r / std::sqrt(a * dx * dx + b * dy * dy + prm.epsilon);
        }

    Image g(W, H, 0.0);
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < H; ++iy)
        for (int ix = 0; ix < W; ++ix) {
            const std::size_t i = static_cast<std::size_t>(iy) * W + ix;
            double v = -(a * dxv[i] + b * dyv[i]) * inv_m[i];
            if (ix > 0) {
                const std::size_t l = i - 1;
                v += a * dxv[l] * inv_m[l];
            }
            if (iy > 0) {
                const std::size_t u = i - W;
                v += b * dyv[u] * inv_m[u];
            }
            g.data[i] = v;
        }
    return g;
}

Image qggmrf_gradient(const Image& f, const RegularizerParams& prm) {
    static const int off_x[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int off_y[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    static const int n_axial = 4;

    Image g(f.width, f.height, 0.0);
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < f.height; ++iy)
        for (int ix = 0; ix < f.width; ++ix) {
            double v = 0.0;
            for (int k = 0; k < 8; ++k) {
                const int jx = ix + off_x[k];
                const int jy = iy + off_y[k];
                if (jx < 0 || jx >= f.width || jy < 0 || jy >= f.height) continue;
                const double wk = k < n_axial ? 1.0 : inv_sqrt2;
                v += wk * qggmrf_potential_deriv(f.at(ix, iy) - f.at(jx, jy), prm);
            }
            g.at(ix, iy) = v;
        }
    return g;
}

} // namespace

double tv_value(const Image& f) {
    return weighted_atv(f, 1.0, 1.0, nullptr);
}

double atv_value(const Image& f, const RegularizerParams& params) {
    params.validate();
    return weighted_atv(f, params.a, params.b, nullptr);
}

WeightField rwatv_update_weights(const Image& f_prev, const RegularizerParams& params) {
    params.validate();
    WeightField w;
    w.width = f_prev.width;
    w.height = f_prev.height;
    w.weights.resize(f_prev.size());
    for (int iy = 0; iy < f_prev.height; ++iy)
        for (int ix = 0; ix < f_prev.width; ++ix) {
            const double dx = dx_at(f_prev, ix, iy);
            const double dy = dy_at(f_prev, ix, iy);
            const double m = std::sqrt(params.a * dx * dx + params.b * dy * dy);
            w.weights[static_cast<std::size_t>(iy) * f_prev.width + ix] =
                1.0 / (m + params.epsilon);
        }
    return w;
}

double rwatv_value(const Image& f, const WeightField& w, const RegularizerParams& params) {
    params.validate();
    if (w.width != f.width || w.height != f.height)
        throw std::invalid_argument("rwatv_value: weight field dimensions mismatch");
    return weighted_atv(f, params.a, params.b, &w.weights);
}

double qggmrf_potential(double delta, const RegularizerParams& params) {
    params.validate();
    const double u = std::fabs(delta);
    if (u == 0.0) return 0.0;
    return std::pow(u, params.p) / (1.0 + std::pow(u / params.c, params.p - params.q));
}

double qggmrf_value(const Image& f, const RegularizerParams& params) {
    params.validate();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    double s = 0.0;
    // Unordered pairs: right, down, down-right, down-left from each pixel.
    for (int iy = 0; iy < f.height; ++iy)
        for (int ix = 0; ix < f.width; ++ix) {
            const double v = f.at(ix, iy);
            if (ix + 1 < f.width)
                s += qggmrf_potential(v - f.at(ix + 1, iy), params);
            if (iy + 1 < f.height) {
                s += qggmrf_potential(v - f.at(ix, iy + 1), params);
                if (ix + 1 < f.width)
                    s += inv_sqrt2 * qggmrf_potential(v - f.at(ix + 1, iy + 1), params);
                if (ix > 0)
                    s += inv_sqrt2 * qggmrf_potential(v - f.at(ix - 1, iy + 1), params);
            }
        }
    return s;
}

Image regularizer_gradient(const Image& f, const RegularizerParams& params,
                           const WeightField* w) {
    params.validate();
    switch (params.kind) {
        case RegKind::TV:
            return smoothed_gradient_tv_family(f, params, nullptr);
        case RegKind::ATV:
            return smoothed_gradient_tv_family(f, params, nullptr);
        case RegKind::RwATV:
            if (!w)
                throw std::invalid_argument("regularizer_gradient: RwATV requires a weight field");
            if (w->width != f.width || w->height != f.height)
                throw std::invalid_argument("regularizer_gradient: weight field dimensions mismatch");
            return smoothed_gradient_tv_family(f, params, &w->weights);
        case RegKind::QGGMRF:
            return qggmrf_gradient(f, params);
    }
    throw std::logic_error("regularizer_gradient: unreachable");
}

Image descent_step(const Image& f, const RegularizerParams& params, double beta, int n_g) {
    params.validate();
    if (beta < 0.0)
        throw std::invalid_argument("descent_step: beta must be >= 0");
    if (n_g < 0)
        throw std::invalid_argument("descent_step: n_g must be >= 0");
    if (n_g == 0 || beta == 0.0 || params.lambda_weight == 0.0) return f;

    const auto [mn, mx] = std::minmax_element(f.data.begin(), f.data.end());
    const double step_scale = (*mx - *mn) / 100.0;
    if (step_scale == 0.0) return f;

    WeightField w;
    const WeightField* wp = nullptr;
    if (params.kind == RegKind::RwATV) {
        w = rwatv_update_weights(f, params);
        wp = &w;
    }

    Image cur = f;
    for (int k = 0; k < n_g; ++k) {
        Image grad = regularizer_gradient(cur, params, wp);
        for (double& v : grad.data) v *= params.lambda_weight;
        const double gn = l2_norm(grad.data);
        if (gn == 0.0) break;
        const double scale = beta * step_scale / (gn + params.epsilon);
        for (std::size_t i = 0; i < cur.data.size(); ++i)
            cur.data[i] -= scale * grad.data[i];
    }
    return cur;
}

} // namespace tomoseg
