#pragma once

#include <string>
#include <vector>

#include "odis/engine.hpp"
#include "odis/network.hpp"

namespace odis {

/// Post-run invariant measurements over a trace. Gated checks (the ones a
/// run must pass) are the tracking identity, the dual bound, dual
/// nonnegativity, primal feasibility, and the transition-matrix mixing
/// bound; the rest are reported for inspection.
struct InvariantReport {
    // Tracking identity: max_t || (1/N) sum_i y_{i,t} - sum_i g_{i,t}(x_{i,t}) ||.
    double tracking_identity_max_residual = 0.0;
    bool tracking_identity_ok = false;  // residual <= 1e-9

    // Mean-dual identity: max_t || (1/N) sum_i mu_{i,t} - (1/N) sum_i lambda_{i,t} ||.
    double dual_mean_identity_max_residual = 0.0;

    // lambda, mu >= 0 componentwise everywhere.
    bool dual_nonneg_ok = false;

    // x_{i,t} in Omega_i for all i and t >= 2 (and t = 1 under projection init).
    bool feasibility_ok = false;

    // Boundedness witnesses.
    double max_y_norm = 0.0;
    double max_z_norm = 0.0;  // C_run in the dual bound
    double max_abs_objective = 0.0;
    double max_g_norm = 0.0;
    bool tracking_state_stable = false;  // second-half max of ||y|| does not exceed first-half max

    // Dual bound: max over i,t of ||lambda_{i,t}|| gamma_t / C_run and the
    // same for mu; must not exceed 1 beyond 1e-12 relative slack.
    double dual_bound_max_ratio = 0.0;
    bool dual_bound_ok = false;

    // Consensus-error decay: fitted D' = max_{t>=2} sum_i ||lambda_{i,t} -
    // lambda_bar_t|| / alpha_{t-1}, compared against the analysis constant
    // 2 N^2 C_hat C_run / (1 - tau) + 2 N C_run.
    double consensus_decay_fitted = 0.0;
    double consensus_decay_analysis = 0.0;
    bool consensus_decay_ok = false;

    // Mixing bound over 1 <= s <= t <= min(T, 50):
    // max (|[Phi(t,s)]_ij - 1/N| - C_hat tau^(t-s)); <= 0 passes.
    double mixing_max_excess = 0.0;
    bool mixing_bound_ok = false;

    bool run_completed = false;

    bool all_ok() const {
        return run_completed && tracking_identity_ok && dual_nonneg_ok &&
               feasibility_ok && dual_bound_ok && mixing_bound_ok;
    }
};

InvariantReport check_invariants(const RunTrace& trace, const Scenario& scenario,
                                 const GraphSequence& graph);

}  // namespace odis
