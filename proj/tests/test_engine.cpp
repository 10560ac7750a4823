#include <doctest.h>

#include <cmath>

#include "odis/engine.hpp"
#include "odis/scenarios.hpp"

using namespace odis;

namespace {

VectorXd scalar(double v) { return VectorXd::Constant(1, v); }

// Single node, f(x) = x^2, g(x) = x - 1, ball of radius 10, any horizon.
Scenario single_node_scenario(int horizon) {
    NodeProblem p;
    p.id = 0;
    p.decision_dim = 1;
    p.constraint_dim = 1;
    p.horizon = horizon;
    p.set = FeasibleSet::ball(1, 10.0);
    p.objective = [](int, const VectorXd& x) { return x(0) * x(0); };
    p.objective_grad = [](int, const VectorXd& x) { return scalar(2.0 * x(0)); };
    p.constraint = [](int, const VectorXd& x) { return scalar(x(0) - 1.0); };
    p.constraint_jac = [](int, const VectorXd&) { return MatrixXd::Constant(1, 1, 1.0); };
    p.penalized_argmin = [](int, const VectorXd& nu) {
        return FeasibleSet::ball(1, 10.0).project(scalar(-nu(0) / 2.0));
    };
    Scenario s;
    s.id = "single";
    s.horizon = horizon;
    s.problems.push_back(std::move(p));
    return s;
}

// A gentle two-node scenario at O(1) magnitudes: f_i = a_i (x - m_i)^2,
// g_i = x - r_i, slowly moving targets.
Scenario gentle_pair(int horizon) {
    Scenario s;
    s.id = "gentle";
    s.horizon = horizon;
    for (int i = 0; i < 2; ++i) {
        NodeProblem p;
        p.id = i;
        p.decision_dim = 1;
        p.constraint_dim = 1;
        p.horizon = horizon;
        p.set = FeasibleSet::box(scalar(-5.0), scalar(5.0));
        const double a = 0.3 + 0.1 * i;
        p.objective = [a, i](int t, const VectorXd& x) {
            const double m = 0.5 * i + 0.001 * t;
            return a * (x(0) - m) * (x(0) - m);
        };
        p.objective_grad = [a, i](int t, const VectorXd& x) {
            const double m = 0.5 * i + 0.001 * t;
            return scalar(2.0 * a * (x(0) - m));
        };
        p.constraint = [i](int t, const VectorXd& x) {
            return scalar(x(0) - 1.0 - 0.2 * i - 0.0005 * t);
        };
        p.constraint_jac = [](int, const VectorXd&) {
            return MatrixXd::Constant(1, 1, 1.0);
        };
        s.problems.push_back(std::move(p));
    }
    return s;
}

}  // namespace

TEST_CASE("schedule gate accepts and rejects the right exponents") {
    CHECK_NOTHROW(validate_schedule(0.25, 0.25));
    CHECK_NOTHROW(validate_schedule(0.125, 0.125));
    CHECK_NOTHROW(validate_schedule(1.0 / 3.0, 0.25));

    try {
        validate_schedule(0.5, 0.25);
        FAIL("accepted kappa1 at the boundary");
    } catch (const ScheduleError& e) {
        CHECK(e.condition() == "0 < kappa1 < min{2 kappa2, 1 - 2 kappa2}");
    }
    try {
        validate_schedule(0.2, 0.6);
        FAIL("accepted kappa2 outside (0, 1/2)");
    } catch (const ScheduleError& e) {
        CHECK(e.condition() == "kappa2 in (0, 1/2)");
    }
    CHECK_THROWS_AS(validate_schedule(0.2, 0.5), ScheduleError);
    CHECK_THROWS_AS(validate_schedule(-0.1, 0.25), ScheduleError);
}

TEST_CASE("step sizes follow t^-kappa") {
    const Schedule quarter{0.25, 0.25};
    auto s1 = step_size(quarter, 1);
    CHECK(s1.alpha == 1.0);
    CHECK(s1.gamma == 1.0);
    auto s16 = step_size(quarter, 16);
    CHECK(s16.alpha == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s16.gamma == doctest::Approx(0.5).epsilon(1e-15));

    const Schedule third{1.0 / 3.0, 0.25};
    auto s8 = step_size(third, 8);
    CHECK(s8.alpha == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s8.gamma == doctest::Approx(std::pow(8.0, -0.25)).epsilon(1e-15));

    CHECK_THROWS_AS(step_size(quarter, 0), std::out_of_range);

    // alpha_t gamma_t <= 1 and nonincreasing.
    double prev_a = 2.0, prev_g = 2.0;
    for (int t = 1; t <= 100; ++t) {
        const auto s = step_size(quarter, t);
        CHECK(s.alpha * s.gamma <= 1.0);
        CHECK(s.alpha <= prev_a);
        CHECK(s.gamma <= prev_g);
        prev_a = s.alpha;
        prev_g = s.gamma;
    }
}

TEST_CASE("init_run sets x, lambda, y per the initialization rule") {
    const auto single = single_node_scenario(4);
    const auto states = init_run(single.problems, 0, InitPolicy::ZeroProjection);
    CHECK(states[0].x(0) == 0.0);
    CHECK(states[0].lambda(0) == 0.0);
    CHECK(states[0].y(0) == -1.0);  // 1 * g(0) = -1

    // Dispatch-style: N=5, x=0, g_i = D/5 - x with D=100 -> y = 5*20 = 100.
    MarketSeries series;
    series.timestamps = {0};
    series.price = {1.0};
    series.demand = {100.0};
    series.region = "T";
    DispatchSpec dspec;
    dspec.costs = default_dispatch_costs();
    dspec.output_max = 1e6;
    const auto dispatch = build_dispatch(series, dspec);
    const auto dstates = init_run(dispatch.problems, 0, InitPolicy::ZeroProjection);
    for (const auto& st : dstates) {
        CHECK(st.lambda == VectorXd::Zero(1));
        CHECK(st.y(0) == doctest::Approx(100.0).epsilon(1e-15));
    }
}

TEST_CASE("seeded uniform init lands in the feasible set deterministically") {
    const auto scenario = gentle_pair(3);
    const auto a = init_run(scenario.problems, 42, InitPolicy::SeededUniform);
    const auto b = init_run(scenario.problems, 42, InitPolicy::SeededUniform);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(scenario.problems[i].set.contains(a[i].x));
    }
    const auto c = init_run(scenario.problems, 43, InitPolicy::SeededUniform);
    CHECK(a[0].x != c[0].x);
}

TEST_CASE("distributed_step reproduces the hand-traced single-node round") {
    // f(x)=x^2, g(x)=x-1 (time-invariant), x1=0, lambda1=0, y1=-1, alpha=gamma=1.
    const auto scenario = single_node_scenario(5);
    auto states = init_run(scenario.problems, 0, InitPolicy::ZeroProjection);
    const auto a1 = make_preset("complete", 1, 1);

    // Independent straight-line trace of the same round.
    const double x1 = 0.0, lam1 = 0.0, y1 = -1.0, alpha = 1.0, gamma = 1.0;
    const double mu = 1.0 * lam1;
    const double z = 1.0 * y1;
    const double grad = 2.0 * x1 + 1.0 * mu;
    const double x2_expect = std::max(-10.0, std::min(10.0, x1 - alpha * grad));
    const double lam2_expect = std::max(0.0, mu + alpha * (z - gamma * mu));
    const double y2_expect = z + 1.0 * ((x2_expect - 1.0) - (x1 - 1.0));

    const Schedule sched{0.25, 0.25};  // alpha_1 = gamma_1 = 1
    const auto next = distributed_step(states, scenario.problems, a1.at(1), 1, sched);

    CHECK(states[0].mu(0) == mu);
    CHECK(states[0].z(0) == z);
    CHECK(next[0].x(0) == x2_expect);
    CHECK(next[0].lambda(0) == lam2_expect);
    CHECK(next[0].y(0) == y2_expect);
    CHECK(x2_expect == 0.0);
    CHECK(lam2_expect == 0.0);
    CHECK(y2_expect == -1.0);
}

TEST_CASE("consensus of identical duals is the identity") {
    SyntheticSpec spec;
    spec.nodes = 5;
    spec.uniform_dims(2);
    spec.horizon = 3;
    spec.seed = 9;
    const auto scenario = build_synthetic(spec);
    auto states = init_run(scenario.problems, 9, InitPolicy::ZeroProjection);
    for (auto& st : states) st.lambda = VectorXd::Constant(1, 3.25);

    const auto graph = make_preset("switching3", 5, 3);
    const Schedule sched{0.25, 0.25};
    distributed_step(states, scenario.problems, graph.at(1), 1, sched);
    for (const auto& st : states)
        CHECK(st.mu(0) == doctest::Approx(3.25).epsilon(1e-15));
}

TEST_CASE("complete-graph consensus averages basis duals") {
    SyntheticSpec spec;
    spec.nodes = 4;
    spec.uniform_dims(1);
    spec.horizon = 3;
    spec.seed = 1;
    const auto scenario = build_synthetic(spec);
    auto states = init_run(scenario.problems, 1, InitPolicy::ZeroProjection);
    for (std::size_t i = 0; i < states.size(); ++i)
        states[i].lambda = VectorXd::Constant(1, i == 0 ? 1.0 : 0.0);

    const auto graph = make_preset("complete", 4, 1);
    const Schedule sched{0.25, 0.25};
    distributed_step(states, scenario.problems, graph.at(1), 1, sched);
    for (const auto& st : states)
        CHECK(st.mu(0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("centralized step leaves a stationary point alone") {
    // lambda = 0 and all gradients zero at x -> x unchanged by projection.
    Scenario s;
    s.id = "flat";
    s.horizon = 3;
    NodeProblem p;
    p.id = 0;
    p.decision_dim = 1;
    p.constraint_dim = 1;
    p.horizon = 3;
    p.set = FeasibleSet::box(scalar(-1.0), scalar(1.0));
    p.objective = [](int, const VectorXd&) { return 1.0; };
    p.objective_grad = [](int, const VectorXd&) { return scalar(0.0); };
    p.constraint = [](int, const VectorXd& x) { return scalar(x(0) - 2.0); };
    p.constraint_jac = [](int, const VectorXd&) { return MatrixXd::Constant(1, 1, 1.0); };
    s.problems.push_back(std::move(p));

    const Schedule sched{0.25, 0.25};
    const std::vector<VectorXd> x = {scalar(0.5)};
    const auto [x2, lam2] = centralized_step(x, VectorXd::Zero(1), 1, sched, s.problems);
    CHECK(x2[0](0) == 0.5);
    CHECK_THROWS_AS(
        centralized_step(x, VectorXd::Constant(1, -1.0), 1, sched, s.problems),
        ContractError);
}

TEST_CASE("run: horizon-1 trace has one step and no tracking update") {
    const auto scenario = single_node_scenario(1);
    const auto graph = make_preset("complete", 1, 1);
    const auto trace = run(scenario, graph, Schedule{0.25, 0.25}, 0, 1);
    CHECK(trace.completed);
    CHECK(trace.steps.size() == 1);
    CHECK(trace.steps[0].nodes[0].y(0) == -1.0);
}

TEST_CASE("run is deterministic: same seed gives identical traces") {
    SyntheticSpec spec;
    spec.uniform_dims(3);
    spec.horizon = 60;
    spec.seed = 5830;
    const auto scenario = build_synthetic(spec);
    const auto graph = make_preset("switching3", 5, 3);
    const Schedule sched{0.25, 0.25};
    const auto t1 = run(scenario, graph, sched, 5830, 60);
    const auto t2 = run(build_synthetic(spec), graph, sched, 5830, 60);
    REQUIRE(t1.steps.size() == t2.steps.size());
    for (std::size_t s = 0; s < t1.steps.size(); ++s) {
        for (std::size_t i = 0; i < t1.steps[s].nodes.size(); ++i) {
            CHECK(t1.steps[s].nodes[i].x == t2.steps[s].nodes[i].x);
            CHECK(t1.steps[s].nodes[i].lambda == t2.steps[s].nodes[i].lambda);
            CHECK(t1.steps[s].nodes[i].y == t2.steps[s].nodes[i].y);
            CHECK(t1.steps[s].nodes[i].z == t2.steps[s].nodes[i].z);
        }
    }
}

TEST_CASE("numerical blow-up yields a truncated trace with a failure marker") {
    Scenario s;
    s.id = "explodes";
    s.horizon = 5;
    NodeProblem p;
    p.id = 0;
    p.decision_dim = 1;
    p.constraint_dim = 1;
    p.horizon = 5;
    p.set = FeasibleSet::ball(1, 1.0);
    p.objective = [](int, const VectorXd&) { return 0.0; };
    p.objective_grad = [](int, const VectorXd&) { return scalar(0.0); };
    p.constraint = [](int t, const VectorXd&) {
        return scalar(t >= 2 ? std::numeric_limits<double>::infinity() : 0.0);
    };
    p.constraint_jac = [](int, const VectorXd&) { return MatrixXd::Constant(1, 1, 0.0); };
    s.problems.push_back(std::move(p));

    const auto graph = make_preset("complete", 1, 1);
    const auto trace = run(s, graph, Schedule{0.25, 0.25}, 0, 5);
    CHECK_FALSE(trace.completed);
    CHECK(trace.failure_step == 2);
    CHECK(trace.steps.size() == 1);
}

TEST_CASE("single-node distributed run equals the centralized recursion") {
    const int horizon = 200;
    const auto scenario = single_node_scenario(horizon);
    const auto graph = make_preset("complete", 1, 1);
    const Schedule sched{0.25, 0.25};
    const auto dist = run(scenario, graph, sched, 0, horizon);
    const auto central = run_centralized(scenario, sched, 0, horizon);
    REQUIRE(dist.completed);
    REQUIRE(central.completed);
    for (int s = 0; s < horizon; ++s) {
        const auto& d = dist.steps[static_cast<std::size_t>(s)];
        const auto& c = central.steps[static_cast<std::size_t>(s)];
        CHECK(std::abs(d.nodes[0].x(0) - c.x[0](0)) <= 1e-12);
        CHECK(std::abs(d.nodes[0].lambda(0) - c.lambda(0)) <= 1e-12);
    }
}

TEST_CASE("dual iterates stay nonnegative and primal iterates feasible") {
    const auto scenario = gentle_pair(150);
    const auto graph = make_preset("ring", 2, 1);
    const auto trace = run(scenario, graph, Schedule{0.25, 0.25}, 3, 150);
    REQUIRE(trace.completed);
    for (const auto& rec : trace.steps) {
        for (std::size_t i = 0; i < rec.nodes.size(); ++i) {
            CHECK(rec.nodes[i].lambda(0) >= 0.0);
            CHECK(rec.nodes[i].mu(0) >= 0.0);
            CHECK(scenario.problems[i].set.contains(rec.nodes[i].x, 1e-9));
        }
    }
}

TEST_CASE("tracking identity and dual bound hold along a gentle run") {
    const auto scenario = gentle_pair(300);
    const auto graph = make_preset("ring", 2, 1);
    const auto trace = run(scenario, graph, Schedule{0.25, 0.25}, 3, 300);
    REQUIRE(trace.completed);

    double c_run = 0.0;
    for (const auto& rec : trace.steps)
        for (const auto& node : rec.nodes) c_run = std::max(c_run, node.z.norm());

    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
        const auto& rec = trace.steps[s];
        // (1/N) sum_i y = sum_i g_i(x_i)
        double ymean = 0.0, mumean = 0.0, lammean = 0.0;
        for (const auto& node : rec.nodes) {
            ymean += node.y(0);
            mumean += node.mu(0);
            lammean += node.lambda(0);
        }
        ymean /= 2.0;
        mumean /= 2.0;
        lammean /= 2.0;
        CHECK(std::abs(ymean - rec.aggregate_g(0)) <= 1e-9);
        CHECK(std::abs(mumean - lammean) <= 1e-12);
        for (const auto& node : rec.nodes) {
            CHECK(node.lambda.norm() * rec.gamma <= c_run * (1.0 + 1e-12));
            CHECK(node.mu.norm() * rec.gamma <= c_run * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("distributed_step at the horizon boundary skips the tracking increment") {
    const auto scenario = single_node_scenario(3);
    auto states = init_run(scenario.problems, 0, InitPolicy::ZeroProjection);
    const auto graph = make_preset("complete", 1, 1);
    const Schedule sched{0.25, 0.25};
    auto s2 = distributed_step(states, scenario.problems, graph.at(1), 1, sched);
    auto s3 = distributed_step(s2, scenario.problems, graph.at(2), 2, sched);
    // t = horizon: y is carried as z, no g(t+1) evaluation.
    const auto s4 = distributed_step(s3, scenario.problems, graph.at(3), 3, sched);
    CHECK(s4[0].y(0) == s3[0].z(0));
}
