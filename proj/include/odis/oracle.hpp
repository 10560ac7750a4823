#pragma once

#include <Eigen/Dense>
#include <vector>

#include "odis/problem.hpp"

namespace odis {

/// Offline optimum of the time-t problem min sum_i f_{i,t}(x_i) over the
/// local sets subject to sum_i g_{i,t}(x_i) <= 0.
struct StepOptimum {
    int t = 0;
    std::vector<VectorXd> x_star;  // per node
    double f_star = 0.0;           // sum_i f_{i,t}(x*_i)
    VectorXd g_at_star;            // aggregate constraint at x*
    VectorXd multiplier;           // optimal dual estimate
    int iterations = 0;
    double residual = 0.0;         // max positive aggregate component
};

struct OracleOptions {
    double tolerance = 1e-8;   // on the aggregate constraint residual
    int max_iters = 500000;    // n > 1 fixed-point budget
};

/// Per-step oracle. For n = 1 this is dual bisection on the scalar
/// multiplier with the nodes' closed-form penalized minimizers inside
/// (exact for both experiment families); the bracket is doubled from 1
/// until the constraint is slack, and infeasibility is declared past 1e12.
/// For n > 1 it is damped projected dual ascent with exact inner
/// minimization, run until the KKT residuals fall below the tolerance.
/// Requires every node to supply penalized_argmin.
StepOptimum solve_step(const std::vector<NodeProblem>& problems, int t,
                       const OracleOptions& options = {});

/// solve_step for every t in [1, horizon].
std::vector<StepOptimum> solve_horizon(const std::vector<NodeProblem>& problems,
                                       int horizon, const OracleOptions& options = {});

}  // namespace odis
