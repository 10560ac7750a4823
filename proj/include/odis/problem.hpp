#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "odis/errors.hpp"

namespace odis {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// A nonempty, closed, bounded, convex feasible set with a closed-form
/// Euclidean projection. Two variants cover every scenario in this library:
/// an origin-centered 2-norm ball and an axis-aligned box.
class FeasibleSet {
public:
    enum class Kind { Ball, Box };

    static FeasibleSet ball(int dim, double radius);
    static FeasibleSet box(VectorXd lower, VectorXd upper);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    double radius() const { return radius_; }
    const VectorXd& lower() const { return lower_; }
    const VectorXd& upper() const { return upper_; }

    /// argmin_{y in set} ||x - y||^2. Idempotent and nonexpansive.
    VectorXd project(const VectorXd& x) const;

    bool contains(const VectorXd& x, double tol = 1e-12) const;

    /// A bound eta with ||x|| <= eta for every x in the set.
    double norm_bound() const;

private:
    FeasibleSet() = default;
    Kind kind_ = Kind::Ball;
    int dim_ = 0;
    double radius_ = 0.0;  // Ball only
    VectorXd lower_, upper_;  // Box only
};

/// Componentwise max with zero. Idempotent and nonexpansive.
VectorXd clip_nonneg(const VectorXd& v);

/// One node's slice of the online problem: time-indexed objective and
/// constraint with analytic derivatives, over a fixed local feasible set.
/// Time indices are 1-based and valid for t in [1, horizon].
///
/// All members are immutable after construction; instances are safe to share
/// across threads. The callables must be pure.
struct NodeProblem {
    int id = 0;
    int decision_dim = 0;    // d_i
    int constraint_dim = 0;  // n, shared by all nodes of one instance
    int horizon = 0;         // T
    FeasibleSet set = FeasibleSet::ball(1, 1.0);

    std::function<double(int, const VectorXd&)> objective;            // f_{i,t}
    std::function<VectorXd(int, const VectorXd&)> objective_grad;     // d_i
    std::function<VectorXd(int, const VectorXd&)> constraint;         // n
    std::function<MatrixXd(int, const VectorXd&)> constraint_jac;     // n x d_i

    // Optional closed form for argmin_{x in set} f_t(x) + nu' g_t(x), used by
    // the offline oracle. Scenario builders provide it; absent means the
    // oracle falls back to iterative minimization.
    std::function<VectorXd(int, const VectorXd& nu)> penalized_argmin;
};

struct NodeEvaluation {
    double f = 0.0;
    VectorXd grad_f;
    VectorXd g;
    MatrixXd jac_g;
};

/// A named multi-node problem instance over a common horizon. All nodes
/// share the same constraint dimension n.
struct Scenario {
    std::string id;
    std::vector<NodeProblem> problems;
    int horizon = 0;
};

/// Evaluates objective, gradient, constraint, and Jacobian at (t, x).
/// Throws std::out_of_range if t is outside [1, horizon] and ContractError
/// on a shape mismatch.
NodeEvaluation eval_node(const NodeProblem& problem, int t, const VectorXd& x);

/// Scalar generation cost a x^2 + b x + c net of market settlement p x.
/// a > 0 keeps the cost strongly convex.
struct QuadraticScalarCost {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double value(double x, double price) const {
        return a * x * x + b * x + c - price * x;
    }
    double derivative(double x, double price) const {
        return 2.0 * a * x + b - price;
    }
};

}  // namespace odis
