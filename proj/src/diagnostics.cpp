#include "odis/diagnostics.hpp"

#include <cmath>

#include "odis/compensated.hpp"

namespace odis {

namespace {

// Residual of |(1/N) sum_i v_i - target| computed with compensated sums so
// the check itself does not inject rounding at large magnitudes.
double mean_vs_target_residual(const std::vector<const VectorXd*>& values,
                               const VectorXd& target, int big_n) {
    const int n = static_cast<int>(target.size());
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        DD sum(0.0);
        for (const auto* v : values) sum = dd_add(sum, (*v)(k));
        DD mean = dd_mul(sum, 1.0 / static_cast<double>(big_n));
        worst = std::max(worst, std::abs(dd_add(mean, -target(k)).hi));
    }
    return worst;
}

}  // namespace

InvariantReport check_invariants(const RunTrace& trace, const Scenario& scenario,
                                 const GraphSequence& graph) {
    InvariantReport report;
    report.run_completed = trace.completed;
    if (trace.steps.empty()) return report;

    const int big_n = trace.node_count;
    const std::size_t horizon = trace.steps.size();
    const bool projected_init = trace.meta.init_policy != "uniform";

    report.dual_nonneg_ok = true;
    report.feasibility_ok = true;

    std::vector<double> max_y_per_step(horizon, 0.0);
    for (std::size_t s = 0; s < horizon; ++s) {
        const auto& rec = trace.steps[s];
        const int t = static_cast<int>(s) + 1;

        // Tracking identity: mean of y against the freshly recorded aggregate,
        // and mean of mu against mean of lambda.
        std::vector<const VectorXd*> ys, mus, lambdas;
        for (const auto& node : rec.nodes) {
            ys.push_back(&node.y);
            mus.push_back(&node.mu);
            lambdas.push_back(&node.lambda);
        }
        report.tracking_identity_max_residual =
            std::max(report.tracking_identity_max_residual,
                     mean_vs_target_residual(ys, rec.aggregate_g, big_n));

        VectorXd lambda_mean = VectorXd::Zero(trace.constraint_dim);
        for (const auto* l : lambdas) lambda_mean += *l;
        lambda_mean /= static_cast<double>(big_n);
        report.dual_mean_identity_max_residual =
            std::max(report.dual_mean_identity_max_residual,
                     mean_vs_target_residual(mus, lambda_mean, big_n));

        for (std::size_t i = 0; i < rec.nodes.size(); ++i) {
            const auto& node = rec.nodes[i];
            if ((node.lambda.array() < 0.0).any() || (node.mu.array() < 0.0).any())
                report.dual_nonneg_ok = false;
            if ((t >= 2 || projected_init) &&
                !scenario.problems[i].set.contains(node.x, 1e-9))
                report.feasibility_ok = false;
            const double ny = node.y.norm();
            report.max_y_norm = std::max(report.max_y_norm, ny);
            max_y_per_step[s] = std::max(max_y_per_step[s], ny);
            report.max_z_norm = std::max(report.max_z_norm, node.z.norm());
            report.max_abs_objective =
                std::max(report.max_abs_objective, std::abs(rec.objectives[i]));
            report.max_g_norm = std::max(
                report.max_g_norm,
                scenario.problems[i].constraint(t, node.x).norm());
        }
    }
    report.tracking_identity_ok =
        std::isfinite(report.tracking_identity_max_residual) &&
        report.tracking_identity_max_residual <= 1e-9;

    // Dual bound in run-relative form: ||lambda|| gamma_t <= C_run, likewise mu.
    const double c_run = report.max_z_norm;
    if (c_run > 0.0) {
        for (const auto& rec : trace.steps) {
            for (const auto& node : rec.nodes) {
                report.dual_bound_max_ratio =
                    std::max(report.dual_bound_max_ratio,
                             std::max(node.lambda.norm(), node.mu.norm()) * rec.gamma / c_run);
            }
        }
        report.dual_bound_ok = report.dual_bound_max_ratio <= 1.0 + 1e-12;
    } else {
        report.dual_bound_ok = true;
    }

    // Stability witness: the tracking state must not trend upward.
    if (horizon < 4) {
        report.tracking_state_stable = true;
    } else {
        double first = 0.0, second = 0.0;
        for (std::size_t s = 0; s < horizon; ++s) {
            if (s < horizon / 2)
                first = std::max(first, max_y_per_step[s]);
            else
                second = std::max(second, max_y_per_step[s]);
        }
        report.tracking_state_stable = second <= first * 1.001 + 1e-12;
    }

    // Consensus-error decay: sum_i ||lambda_{i,t} - lambda_bar_t|| <= D' alpha_{t-1}.
    for (std::size_t s = 1; s < horizon; ++s) {
        const auto& rec = trace.steps[s];
        double r = 0.0;
        for (const auto& node : rec.nodes) r += (node.lambda - rec.lambda_bar).norm();
        report.consensus_decay_fitted =
            std::max(report.consensus_decay_fitted, r / trace.steps[s - 1].alpha);
    }
    const MixingConstants mix = mixing_bound(graph);
    report.consensus_decay_analysis =
        2.0 * big_n * big_n * mix.c_hat * c_run / (1.0 - mix.tau) + 2.0 * big_n * c_run;
    report.consensus_decay_ok =
        report.consensus_decay_fitted <= report.consensus_decay_analysis;

    // Geometric mixing bound on the transition matrices, exhaustive at desk scale.
    const int t_max = std::min<int>(static_cast<int>(horizon), 50);
    const double inv_n = 1.0 / static_cast<double>(big_n);
    double worst_excess = -1.0;
    for (int s = 1; s <= t_max; ++s) {
        MatrixXd phi = MatrixXd::Identity(big_n, big_n);
        for (int t = s; t <= t_max; ++t) {
            if (t > s) phi = graph.at(t - 1).w * phi;
            const double dev = (phi.array() - inv_n).abs().maxCoeff();
            worst_excess =
                std::max(worst_excess, dev - mix.c_hat * std::pow(mix.tau, t - s));
        }
    }
    report.mixing_max_excess = worst_excess;
    report.mixing_bound_ok = worst_excess <= 0.0;

    return report;
}

}  // namespace odis
