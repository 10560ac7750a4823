#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "odis/network.hpp"
#include "odis/problem.hpp"

namespace odis {

/// Step-size and regularization exponents: alpha_t = t^-kappa1,
/// gamma_t = t^-kappa2. Only admissible pairs can be constructed; see
/// validate_schedule.
struct Schedule {
    double kappa1 = 0.25;
    double kappa2 = 0.25;

    double alpha(int t) const { return std::pow(static_cast<double>(t), -kappa1); }
    double gamma(int t) const { return std::pow(static_cast<double>(t), -kappa2); }
};

/// Admissibility gate: kappa2 in (0, 1/2) and 0 < kappa1 < min{2 kappa2,
/// 1 - 2 kappa2}. Throws ScheduleError naming the violated inequality.
Schedule validate_schedule(double kappa1, double kappa2);

struct StepSizes {
    double alpha = 0.0;
    double gamma = 0.0;
};

/// (alpha_t, gamma_t) for t >= 1; throws std::out_of_range for t < 1.
StepSizes step_size(const Schedule& schedule, int t);

enum class InitPolicy {
    ZeroProjection,  // x_{i,1} = P_Omega(0)
    SeededUniform,   // uniform draw in the set's bounding box, then projected
};

/// Per-node algorithm state at one time step. mu and z are the
/// post-consensus values computed during that step's synchronous round.
struct NodeState {
    VectorXd x;       // d_i
    VectorXd lambda;  // n, >= 0
    VectorXd mu;      // n, >= 0
    VectorXd y;       // n
    VectorXd z;       // n
};

struct StepRecord {
    double alpha = 0.0;
    double gamma = 0.0;
    std::vector<NodeState> nodes;
    VectorXd lambda_bar;           // (1/N) sum_i lambda_{i,t}
    VectorXd y_bar;                // (1/N) sum_i y_{i,t}
    VectorXd aggregate_g;          // sum_i g_{i,t}(x_{i,t}), evaluated fresh
    std::vector<double> objectives;  // f_{i,t}(x_{i,t})
    double objective_total = 0.0;
};

struct RunMetadata {
    std::string scenario_id;
    std::string graph_label;
    std::uint64_t seed = 0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    int horizon = 0;
    std::string init_policy;
};

struct RunTrace {
    RunMetadata meta;
    std::vector<StepRecord> steps;  // one per t = 1..T (append-only)
    int node_count = 0;
    int constraint_dim = 0;
    bool completed = false;
    int failure_step = -1;  // first t with a non-finite state, if any
};

/// States at t = 1: x per the init policy, lambda = 0,
/// y_{i,1} = N g_{i,1}(x_{i,1}); mu and z are zero until the first
/// consensus round fills them.
std::vector<NodeState> init_run(const std::vector<NodeProblem>& problems,
                                std::uint64_t seed, InitPolicy policy);

/// One synchronous round at time t: consensus on (lambda, y) through A_t,
/// then the projected primal step, the regularized dual ascent step, and the
/// tracking update with the step-(t+1) constraint increment. Fills mu/z of
/// `states` (time-t values) and returns the states at t+1. All consensus
/// sums read the pre-step states. At t = horizon the tracking increment is
/// skipped (g beyond the horizon does not exist) and y is carried as z.
std::vector<NodeState> distributed_step(std::vector<NodeState>& states,
                                        const std::vector<NodeProblem>& problems,
                                        const WeightMatrix& a_t, int t,
                                        const Schedule& schedule);

/// Centralized baseline update: every node sees the exact dual and the exact
/// aggregate constraint. Returns (x', lambda').
std::pair<std::vector<VectorXd>, VectorXd> centralized_step(
    const std::vector<VectorXd>& x, const VectorXd& lambda, int t,
    const Schedule& schedule, const std::vector<NodeProblem>& problems);

/// Full distributed run over t = 1..horizon. Deterministic given all inputs.
/// On numerical blow-up the trace is returned truncated with
/// completed = false and failure_step set.
RunTrace run(const Scenario& scenario, const GraphSequence& graph,
             const Schedule& schedule, std::uint64_t seed, int horizon,
             InitPolicy policy = InitPolicy::ZeroProjection);

struct CentralRecord {
    double alpha = 0.0;
    double gamma = 0.0;
    std::vector<VectorXd> x;
    VectorXd lambda;
    VectorXd aggregate_g;
    double objective_total = 0.0;
};

struct CentralTrace {
    std::vector<CentralRecord> steps;
    bool completed = false;
    int failure_step = -1;
};

/// Centralized baseline over the same horizon, from the same init policy.
CentralTrace run_centralized(const Scenario& scenario, const Schedule& schedule,
                             std::uint64_t seed, int horizon,
                             InitPolicy policy = InitPolicy::ZeroProjection);

}  // namespace odis
