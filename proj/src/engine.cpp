#include "odis/engine.hpp"

#include <cmath>

#include "odis/compensated.hpp"
#include "odis/rng.hpp"

namespace odis {

namespace {

constexpr std::uint64_t kInitStreamKind = 100;

void check_problems(const std::vector<NodeProblem>& problems) {
    if (problems.empty()) throw ContractError("engine: no node problems");
    const int n = problems.front().constraint_dim;
    for (const auto& p : problems) {
        if (p.constraint_dim != n)
            throw ContractError("engine: all nodes must share the constraint dimension n");
    }
}

bool finite(const VectorXd& v) { return v.allFinite(); }

// Projected primal step shared by the distributed and centralized updates so
// that the two produce identical arithmetic on identical inputs.
VectorXd primal_step(const NodeProblem& p, int t, const VectorXd& x,
                     const VectorXd& dual, double alpha) {
    const VectorXd grad = p.objective_grad(t, x) + p.constraint_jac(t, x).transpose() * dual;
    return p.set.project(x - alpha * grad);
}

double dual_step_component(double mu, double z, double alpha, double gamma) {
    return std::max(0.0, mu + alpha * (z - gamma * mu));
}

}  // namespace

Schedule validate_schedule(double kappa1, double kappa2) {
    if (!std::isfinite(kappa1) || !std::isfinite(kappa2))
        throw ScheduleError("finite", "schedule exponents must be finite");
    if (!(kappa2 > 0.0 && kappa2 < 0.5))
        throw ScheduleError("kappa2 in (0, 1/2)",
                            "kappa2=" + std::to_string(kappa2) +
                                " violates kappa2 in (0, 1/2)");
    const double limit = std::min(2.0 * kappa2, 1.0 - 2.0 * kappa2);
    if (!(kappa1 > 0.0 && kappa1 < limit))
        throw ScheduleError("0 < kappa1 < min{2 kappa2, 1 - 2 kappa2}",
                            "kappa1=" + std::to_string(kappa1) +
                                " violates 0 < kappa1 < min{2 kappa2, 1 - 2 kappa2} = " +
                                std::to_string(limit));
    return Schedule{kappa1, kappa2};
}

StepSizes step_size(const Schedule& schedule, int t) {
    if (t < 1) throw std::out_of_range("step_size: t must be >= 1");
    return StepSizes{schedule.alpha(t), schedule.gamma(t)};
}

std::vector<NodeState> init_run(const std::vector<NodeProblem>& problems,
                                std::uint64_t seed, InitPolicy policy) {
    check_problems(problems);
    const int big_n = static_cast<int>(problems.size());
    const int n = problems.front().constraint_dim;

    std::vector<NodeState> states(problems.size());
    for (std::size_t i = 0; i < problems.size(); ++i) {
        const auto& p = problems[i];
        VectorXd x0;
        if (policy == InitPolicy::ZeroProjection) {
            x0 = p.set.project(VectorXd::Zero(p.decision_dim));
        } else {
            auto rng = Rng::stream(seed, static_cast<std::uint64_t>(p.id), kInitStreamKind);
            VectorXd draw(p.decision_dim);
            if (p.set.kind() == FeasibleSet::Kind::Ball) {
                for (int k = 0; k < p.decision_dim; ++k)
                    draw(k) = rng.uniform(-p.set.radius(), p.set.radius());
            } else {
                for (int k = 0; k < p.decision_dim; ++k)
                    draw(k) = rng.uniform(p.set.lower()(k), p.set.upper()(k));
            }
            x0 = p.set.project(draw);
        }
        states[i].x = x0;
        states[i].lambda = VectorXd::Zero(n);
        states[i].mu = VectorXd::Zero(n);
        states[i].y = static_cast<double>(big_n) * p.constraint(1, x0);
        states[i].z = VectorXd::Zero(n);
    }
    return states;
}

namespace {

// Internal per-node state. The tracking variables are kept as double-double
// so the average-preservation identity of the consensus recursion survives
// long horizons at large magnitudes; everything else is plain binary64.
struct EngineState {
    VectorXd x;
    VectorXd lambda;
    std::vector<DD> y;
};

struct ConsensusRound {
    std::vector<VectorXd> mu;         // per node, n
    std::vector<std::vector<DD>> z;   // per node, n
};

ConsensusRound consensus(const std::vector<EngineState>& st, const WeightMatrix& a) {
    const int big_n = static_cast<int>(st.size());
    const int n = static_cast<int>(st.front().lambda.size());
    ConsensusRound round;
    round.mu.resize(st.size());
    round.z.resize(st.size());
    for (int i = 0; i < big_n; ++i) {
        VectorXd mu = VectorXd::Zero(n);
        std::vector<DD> z(static_cast<std::size_t>(n));
        for (int j = 0; j < big_n; ++j) {
            const double w = a.w(i, j);
            if (w == 0.0) continue;
            mu += w * st[static_cast<std::size_t>(j)].lambda;
            for (int k = 0; k < n; ++k) {
                const DD& yj = st[static_cast<std::size_t>(j)].y[static_cast<std::size_t>(k)];
                DD prod = two_prod(w, yj.hi);
                prod.lo += w * yj.lo;
                z[static_cast<std::size_t>(k)] = dd_add(z[static_cast<std::size_t>(k)], prod);
            }
        }
        round.mu[static_cast<std::size_t>(i)] = mu;
        round.z[static_cast<std::size_t>(i)] = std::move(z);
    }
    return round;
}

}  // namespace

std::vector<NodeState> distributed_step(std::vector<NodeState>& states,
                                        const std::vector<NodeProblem>& problems,
                                        const WeightMatrix& a_t, int t,
                                        const Schedule& schedule) {
    check_problems(problems);
    if (states.size() != problems.size())
        throw ContractError("distributed_step: state/problem count mismatch");
    const auto sizes = step_size(schedule, t);
    const int big_n = static_cast<int>(problems.size());
    const int n = problems.front().constraint_dim;

    std::vector<EngineState> st(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        st[i].x = states[i].x;
        st[i].lambda = states[i].lambda;
        st[i].y.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) st[i].y[static_cast<std::size_t>(k)] = DD(states[i].y(k));
    }

    const ConsensusRound round = consensus(st, a_t);
    for (std::size_t i = 0; i < states.size(); ++i) {
        states[i].mu = round.mu[i];
        states[i].z.resize(n);
        for (int k = 0; k < n; ++k) states[i].z(k) = round.z[i][static_cast<std::size_t>(k)].hi;
    }

    const bool update_tracking = t < problems.front().horizon;
    std::vector<NodeState> next(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& p = problems[i];
        const VectorXd g_now = p.constraint(t, states[i].x);
        next[i].x = primal_step(p, t, states[i].x, round.mu[i], sizes.alpha);
        next[i].lambda.resize(n);
        for (int k = 0; k < n; ++k)
            next[i].lambda(k) = dual_step_component(
                round.mu[i](k), round.z[i][static_cast<std::size_t>(k)].hi, sizes.alpha,
                sizes.gamma);
        next[i].y.resize(n);
        if (update_tracking) {
            const VectorXd g_next = p.constraint(t + 1, next[i].x);
            for (int k = 0; k < n; ++k) {
                DD incr = dd_mul(two_sum(g_next(k), -g_now(k)), static_cast<double>(big_n));
                next[i].y(k) = dd_add(round.z[i][static_cast<std::size_t>(k)], incr).hi;
            }
        } else {
            for (int k = 0; k < n; ++k) next[i].y(k) = round.z[i][static_cast<std::size_t>(k)].hi;
        }
        next[i].mu = VectorXd::Zero(n);
        next[i].z = VectorXd::Zero(n);
    }
    return next;
}

std::pair<std::vector<VectorXd>, VectorXd> centralized_step(
    const std::vector<VectorXd>& x, const VectorXd& lambda, int t,
    const Schedule& schedule, const std::vector<NodeProblem>& problems) {
    check_problems(problems);
    if (x.size() != problems.size())
        throw ContractError("centralized_step: state/problem count mismatch");
    if ((lambda.array() < 0.0).any())
        throw ContractError("centralized_step: lambda must be nonnegative");
    const auto sizes = step_size(schedule, t);
    const int n = problems.front().constraint_dim;

    VectorXd aggregate = VectorXd::Zero(n);
    for (std::size_t i = 0; i < problems.size(); ++i)
        aggregate += problems[i].constraint(t, x[i]);

    std::vector<VectorXd> x_next(x.size());
    for (std::size_t i = 0; i < problems.size(); ++i)
        x_next[i] = primal_step(problems[i], t, x[i], lambda, sizes.alpha);

    VectorXd lambda_next(n);
    for (int k = 0; k < n; ++k)
        lambda_next(k) = dual_step_component(lambda(k), aggregate(k), sizes.alpha, sizes.gamma);
    return {std::move(x_next), std::move(lambda_next)};
}

RunTrace run(const Scenario& scenario, const GraphSequence& graph,
             const Schedule& schedule, std::uint64_t seed, int horizon,
             InitPolicy policy) {
    const auto& problems = scenario.problems;
    check_problems(problems);
    if (horizon < 1) throw ContractError("run: horizon must be >= 1");
    if (horizon > scenario.horizon)
        throw ContractError("run: horizon exceeds scenario horizon");
    if (graph.node_count != static_cast<int>(problems.size()))
        throw ContractError("run: graph node count does not match problem count");

    const int big_n = static_cast<int>(problems.size());
    const int n = problems.front().constraint_dim;

    RunTrace trace;
    trace.meta = RunMetadata{
        scenario.id,
        "",
        seed,
        schedule.kappa1,
        schedule.kappa2,
        horizon,
        policy == InitPolicy::ZeroProjection ? "zero" : "uniform"};
    trace.node_count = big_n;
    trace.constraint_dim = n;
    trace.steps.reserve(static_cast<std::size_t>(horizon));

    const auto init = init_run(problems, seed, policy);
    std::vector<EngineState> st(init.size());
    for (std::size_t i = 0; i < init.size(); ++i) {
        st[i].x = init[i].x;
        st[i].lambda = init[i].lambda;
        st[i].y.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) st[i].y[static_cast<std::size_t>(k)] = DD(init[i].y(k));
    }

    for (int t = 1; t <= horizon; ++t) {
        const auto sizes = step_size(schedule, t);
        const auto& a_t = graph.at(t);
        const ConsensusRound round = consensus(st, a_t);

        StepRecord rec;
        rec.alpha = sizes.alpha;
        rec.gamma = sizes.gamma;
        rec.nodes.resize(st.size());
        rec.objectives.resize(st.size());
        rec.aggregate_g = VectorXd::Zero(n);
        rec.lambda_bar = VectorXd::Zero(n);
        rec.y_bar = VectorXd::Zero(n);
        std::vector<VectorXd> g_now(st.size());
        for (std::size_t i = 0; i < st.size(); ++i) {
            const auto& p = problems[i];
            auto& node = rec.nodes[i];
            node.x = st[i].x;
            node.lambda = st[i].lambda;
            node.mu = round.mu[i];
            node.y.resize(n);
            node.z.resize(n);
            for (int k = 0; k < n; ++k) {
                node.y(k) = st[i].y[static_cast<std::size_t>(k)].hi;
                node.z(k) = round.z[i][static_cast<std::size_t>(k)].hi;
            }
            g_now[i] = p.constraint(t, st[i].x);
            rec.aggregate_g += g_now[i];
            rec.objectives[i] = p.objective(t, st[i].x);
            rec.objective_total += rec.objectives[i];
            rec.lambda_bar += node.lambda;
            rec.y_bar += node.y;
        }
        rec.lambda_bar /= static_cast<double>(big_n);
        rec.y_bar /= static_cast<double>(big_n);
        trace.steps.push_back(std::move(rec));

        if (t == horizon) break;

        std::vector<EngineState> next(st.size());
        bool blew_up = false;
        for (std::size_t i = 0; i < st.size(); ++i) {
            const auto& p = problems[i];
            next[i].x = primal_step(p, t, st[i].x, round.mu[i], sizes.alpha);
            next[i].lambda.resize(n);
            for (int k = 0; k < n; ++k)
                next[i].lambda(k) = dual_step_component(
                    round.mu[i](k), round.z[i][static_cast<std::size_t>(k)].hi, sizes.alpha,
                    sizes.gamma);
            next[i].y.resize(static_cast<std::size_t>(n));
            const VectorXd g_next = p.constraint(t + 1, next[i].x);
            for (int k = 0; k < n; ++k) {
                DD incr = dd_mul(two_sum(g_next(k), -g_now[i](k)), static_cast<double>(big_n));
                next[i].y[static_cast<std::size_t>(k)] =
                    dd_add(round.z[i][static_cast<std::size_t>(k)], incr);
            }
            bool node_finite = finite(next[i].x) && finite(next[i].lambda);
            for (int k = 0; k < n && node_finite; ++k)
                node_finite = std::isfinite(next[i].y[static_cast<std::size_t>(k)].hi);
            if (!node_finite) blew_up = true;
        }
        if (blew_up) {
            trace.completed = false;
            trace.failure_step = t + 1;
            return trace;
        }
        st = std::move(next);
    }
    trace.completed = true;
    return trace;
}

CentralTrace run_centralized(const Scenario& scenario, const Schedule& schedule,
                             std::uint64_t seed, int horizon, InitPolicy policy) {
    const auto& problems = scenario.problems;
    check_problems(problems);
    if (horizon < 1 || horizon > scenario.horizon)
        throw ContractError("run_centralized: bad horizon");
    const int n = problems.front().constraint_dim;

    const auto init = init_run(problems, seed, policy);
    std::vector<VectorXd> x(init.size());
    for (std::size_t i = 0; i < init.size(); ++i) x[i] = init[i].x;
    VectorXd lambda = VectorXd::Zero(n);

    CentralTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) {
        const auto sizes = step_size(schedule, t);
        CentralRecord rec;
        rec.alpha = sizes.alpha;
        rec.gamma = sizes.gamma;
        rec.x = x;
        rec.lambda = lambda;
        rec.aggregate_g = VectorXd::Zero(n);
        for (std::size_t i = 0; i < problems.size(); ++i) {
            rec.aggregate_g += problems[i].constraint(t, x[i]);
            rec.objective_total += problems[i].objective(t, x[i]);
        }
        trace.steps.push_back(rec);
        if (t == horizon) break;
        auto [x_next, lambda_next] = centralized_step(x, lambda, t, schedule, problems);
        bool ok = finite(lambda_next);
        for (const auto& xi : x_next) ok = ok && finite(xi);
        if (!ok) {
            trace.completed = false;
            trace.failure_step = t + 1;
            return trace;
        }
        x = std::move(x_next);
        lambda = std::move(lambda_next);
    }
    trace.completed = true;
    return trace;
}

}  // namespace odis
