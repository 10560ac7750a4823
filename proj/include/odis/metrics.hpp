#pragma once

#include <vector>

#include "odis/engine.hpp"
#include "odis/oracle.hpp"

namespace odis {

struct MetricsReport {
    std::vector<double> regret_cum;  // Reg_t, t = 1..T (empty without oracle)
    std::vector<double> violation;   // Vio_t, t = 1..T
    double path_length = 0.0;        // P_T (0 without oracle)

    // Per-step optima summary (zeros without oracle).
    int optima_count = 0;
    double optima_max_residual = 0.0;
    double optima_max_multiplier = 0.0;
    int optima_max_iterations = 0;
};

/// P_T = sum_{t=2..T} sum_i ||x*_{i,t} - x*_{i,t-1}||; P_1 = 0.
double path_length(const std::vector<StepOptimum>& optima);

/// Reg_t = sum_{s<=t} (objective_total_s - f*_s). Throws on horizon mismatch.
std::vector<double> dynamic_regret(const RunTrace& trace,
                                   const std::vector<StepOptimum>& optima);

/// Vio_t = || [ sum_{s<=t} aggregate_g_s ]_+ ||: cumulative sum over time
/// first (cross-time cancellation allowed), clip, then norm.
std::vector<double> constraint_violation(const RunTrace& trace);

MetricsReport compute_metrics(const RunTrace& trace,
                              const std::vector<StepOptimum>* optima);

}  // namespace odis
