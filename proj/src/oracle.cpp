#include "odis/oracle.hpp"

#include <cmath>

#include "odis/errors.hpp"

namespace odis {

namespace {

struct Inner {
    std::vector<VectorXd> x;
    VectorXd aggregate;
    double objective = 0.0;
};

// Exact per-node minimization of f + nu' g over the local sets, plus the
// aggregate constraint and objective at the result.
Inner minimize_penalized(const std::vector<NodeProblem>& problems, int t,
                         const VectorXd& nu) {
    Inner out;
    out.x.resize(problems.size());
    out.aggregate = VectorXd::Zero(problems.front().constraint_dim);
    for (std::size_t i = 0; i < problems.size(); ++i) {
        const auto& p = problems[i];
        if (!p.penalized_argmin)
            throw ContractError("solve_step: node " + std::to_string(p.id) +
                                " provides no penalized minimizer");
        out.x[i] = p.penalized_argmin(t, nu);
        out.aggregate += p.constraint(t, out.x[i]);
        out.objective += p.objective(t, out.x[i]);
    }
    return out;
}

StepOptimum solve_scalar(const std::vector<NodeProblem>& problems, int t,
                         const OracleOptions& opt) {
    auto phi = [&](double nu) {
        return minimize_penalized(problems, t, VectorXd::Constant(1, nu)).aggregate(0);
    };

    StepOptimum out;
    out.t = t;
    int iters = 0;

    if (phi(0.0) <= 0.0) {
        const Inner sol = minimize_penalized(problems, t, VectorXd::Zero(1));
        out.x_star = sol.x;
        out.f_star = sol.objective;
        out.g_at_star = sol.aggregate;
        out.multiplier = VectorXd::Zero(1);
        out.iterations = 1;
        out.residual = std::max(0.0, sol.aggregate(0));
        return out;
    }

    double hi = 1.0;
    double phi_hi = phi(hi);
    while (phi_hi > 0.0) {
        hi *= 2.0;
        ++iters;
        if (hi > 1e12)
            throw InfeasibleError("solve_step: aggregate constraint unsatisfiable at t=" +
                                  std::to_string(t));
        phi_hi = phi(hi);
    }
    // Shrink the bracket, keeping hi on the feasible side, until the residual
    // at hi is inside the tolerance or the bracket collapses.
    double lo = 0.0;
    while (phi_hi < -opt.tolerance && hi - lo > 1e-12 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        const double phi_mid = phi(mid);
        if (phi_mid > 0.0) {
            lo = mid;
        } else {
            hi = mid;
            phi_hi = phi_mid;
        }
        ++iters;
    }
    // Feasible end of the bracket.
    const Inner sol = minimize_penalized(problems, t, VectorXd::Constant(1, hi));
    out.x_star = sol.x;
    out.f_star = sol.objective;
    out.g_at_star = sol.aggregate;
    out.multiplier = VectorXd::Constant(1, hi);
    out.iterations = iters;
    out.residual = std::max(0.0, sol.aggregate(0));
    return out;
}

// Dual of the step problem: q(lambda) = min_x L(x, lambda); concave, smooth
// for strongly convex nodes, with gradient = aggregate g at the inner
// minimizer. Projected ascent with an adaptive step; the active-set geometry
// of the presets makes this converge linearly in practice.
StepOptimum solve_vector(const std::vector<NodeProblem>& problems, int t,
                         const OracleOptions& opt) {
    const int n = problems.front().constraint_dim;
    VectorXd lambda = VectorXd::Zero(n);

    auto dual_value = [&](const VectorXd& lam, const Inner& inner) {
        return inner.objective + lam.dot(inner.aggregate);
    };

    Inner cur = minimize_penalized(problems, t, lambda);
    double q_cur = dual_value(lambda, cur);
    double step = 1.0;
    int iters = 0;

    auto done = [&](const VectorXd& lam, const Inner& inner) {
        const double infeas = inner.aggregate.cwiseMax(0.0).maxCoeff();
        const double comp = std::abs(lam.dot(inner.aggregate));
        return infeas <= opt.tolerance &&
               comp <= opt.tolerance * std::max(1.0, lam.norm());
    };

    while (!done(lambda, cur)) {
        if (++iters > opt.max_iters)
            throw ConvergenceError("solve_step: dual ascent exceeded max_iters at t=" +
                                       std::to_string(t),
                                   cur.aggregate.cwiseMax(0.0).maxCoeff());
        const VectorXd candidate = (lambda + step * cur.aggregate).cwiseMax(0.0);
        const Inner next = minimize_penalized(problems, t, candidate);
        const double q_next = dual_value(candidate, next);
        if (q_next >= q_cur || (candidate - lambda).norm() == 0.0) {
            lambda = candidate;
            cur = next;
            q_cur = q_next;
            step *= 1.25;
        } else {
            step *= 0.5;
            if (step < 1e-14)
                throw ConvergenceError("solve_step: dual ascent stalled at t=" +
                                           std::to_string(t),
                                       cur.aggregate.cwiseMax(0.0).maxCoeff());
        }
    }

    StepOptimum out;
    out.t = t;
    out.x_star = cur.x;
    out.f_star = cur.objective;
    out.g_at_star = cur.aggregate;
    out.multiplier = lambda;
    out.iterations = iters;
    out.residual = cur.aggregate.cwiseMax(0.0).maxCoeff();
    return out;
}

}  // namespace

StepOptimum solve_step(const std::vector<NodeProblem>& problems, int t,
                       const OracleOptions& options) {
    if (problems.empty()) throw ContractError("solve_step: no problems");
    const int n = problems.front().constraint_dim;
    if (n == 1) return solve_scalar(problems, t, options);
    return solve_vector(problems, t, options);
}

std::vector<StepOptimum> solve_horizon(const std::vector<NodeProblem>& problems,
                                       int horizon, const OracleOptions& options) {
    std::vector<StepOptimum> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) out.push_back(solve_step(problems, t, options));
    return out;
}

}  // namespace odis
