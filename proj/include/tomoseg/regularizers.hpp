#pragma once

#include "tomoseg/core.hpp"

namespace tomoseg {

enum class RegKind { TV, ATV, RwATV, QGGMRF };

const char* reg_kind_name(RegKind kind);
RegKind reg_kind_from_name(const std::string& name);

struct RegularizerParams {
    RegKind kind = RegKind::TV;
    double a = 1.0;              // weight on the x partial derivative (ATV/RwATV)
    double b = 1.0;              // weight on the y partial derivative
    double epsilon = 1e-8;       // denominator guard / smoothing constant
    double p = 2.0;              // qGGMRF near-origin power
    double q = 1.0;              // qGGMRF tail power
    double c = 0.0625;           // qGGMRF transition scale
    double lambda_weight = 1.0;  // constraint weight; folded into the step by normalization

    void validate() const;
};

/// Per-pixel reweighting field for RwATV, refreshed once per outer iteration.
struct WeightField {
    int width = 0;
    int height = 0;
    std::vector<double> weights;
    int iteration = 0;
};

/// Sum of gradient magnitudes, forward differences, replicate boundary.
double tv_value(const Image& f);

/// Anisotropic TV: sum of sqrt(a*dx^2 + b*dy^2).
double atv_value(const Image& f, const RegularizerParams& params);

/// w = 1 / (|grad_{a,b} f_prev| + epsilon), elementwise.
WeightField rwatv_update_weights(const Image& f_prev, const RegularizerParams& params);

/// Weighted anisotropic TV: sum of w * |grad_{a,b} f|.
double rwatv_value(const Image& f, const WeightField& w, const RegularizerParams& params);

/// rho(delta) = |delta|^p / (1 + |delta/c|^(p-q)).
double qggmrf_potential(double delta, const RegularizerParams& params);

/// Sum of b_{s,r} * rho(f_s - f_r) over unordered 8-neighbor cliques,
/// axial weight 1, diagonal weight 1/sqrt(2).
double qggmrf_value(const Image& f, const RegularizerParams& params);

/// Gradient of the selected value function, with sqrt(.+epsilon) smoothing at
/// gradient-magnitude singularities. For RwATV a weight field is required.
Image regularizer_gradient(const Image& f, const RegularizerParams& params,
                           const WeightField* w = nullptr);

/// n_g normalized-gradient descent steps with step beta * step_scale, where
/// step_scale is the input's dynamic range / 100. RwATV refreshes its weight
/// field once per call.
Image descent_step(const Image& f, const RegularizerParams& params, double beta, int n_g);

} // namespace tomoseg
