#pragma once

#include <cstdint>
#include <optional>

#include "tomoseg/regularizers.hpp"

namespace tomoseg {

enum class StepMode {
    /// Data step uses alpha / sigma_max^2, so alpha is a unitless relaxation
    /// factor stable on any grid size for alpha in (0, 2).
    Normalized,
    /// Data step applies alpha directly to H^T r. A startup check warns when
    /// alpha exceeds 2 / sigma_max^2; the step is not rescaled.
    Raw,
};

struct ReconConfig {
    double alpha = 0.2;   // data-fidelity step size
    double beta = 0.5;    // constraint step size, in [0, 1]
    int n_g = 20;         // local-constraint descent steps per outer iteration
    int n_c = 50;         // global-constraint period
    int n_stop = 800;     // iteration at/after which the global step is disabled
    int n_iter = 1000;    // outer iterations
    RegularizerParams regularizer{};
    bool global_enabled = true;
    std::uint64_t rng_seed = 0;

    StepMode step_mode = StepMode::Normalized;
    int data_steps = 1;             // simultaneous data sub-steps per outer iteration
    int group_count_override = 0;   // 0: schedule formula floor(i/n_c)+2; >=2: fixed n
    double beta_local = -1.0;       // <0: use beta for the local descent steps
    double beta_global = -1.0;      // <0: use beta for the global update
    bool refine_eight_neighbors = false;

    double local_beta() const { return beta_local < 0.0 ? beta : beta_local; }
    double global_beta() const { return beta_global < 0.0 ? beta : beta_global; }

    void validate() const;
};

struct IterationRecord {
    int iteration = 0;               // 1-based
    double residual_norm = 0.0;      // ||g - H f|| at the end of this iteration
    std::optional<double> snr_db;    // vs. ground truth, when supplied
    double update_magnitude = 0.0;   // ||f_i - f_{i-1}||
    std::optional<int> n_groups;     // present iff the global step fired
};

} // namespace tomoseg
