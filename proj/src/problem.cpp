#include "odis/problem.hpp"

#include <cmath>

namespace odis {

FeasibleSet FeasibleSet::ball(int dim, double radius) {
    if (dim <= 0) throw ContractError("FeasibleSet::ball: dimension must be positive");
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ContractError("FeasibleSet::ball: radius must be positive and finite");
    FeasibleSet s;
    s.kind_ = Kind::Ball;
    s.dim_ = dim;
    s.radius_ = radius;
    return s;
}

FeasibleSet FeasibleSet::box(VectorXd lower, VectorXd upper) {
    if (lower.size() == 0 || lower.size() != upper.size())
        throw ContractError("FeasibleSet::box: bounds must be nonempty and equally sized");
    if (!lower.allFinite() || !upper.allFinite())
        throw InvalidInputError("FeasibleSet::box: bounds must be finite");
    if ((lower.array() > upper.array()).any())
        throw ContractError("FeasibleSet::box: lower must not exceed upper");
    FeasibleSet s;
    s.kind_ = Kind::Box;
    s.dim_ = static_cast<int>(lower.size());
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
}

VectorXd FeasibleSet::project(const VectorXd& x) const {
    if (x.size() != dim_)
        throw ContractError("project: point dimension " + std::to_string(x.size()) +
                            " does not match set dimension " + std::to_string(dim_));
    if (!x.allFinite()) throw InvalidInputError("project: point has non-finite entries");
    if (kind_ == Kind::Ball) {
        const double norm = x.norm();
        if (norm <= radius_) return x;
        return x * (radius_ / norm);
    }
    return x.cwiseMax(lower_).cwiseMin(upper_);
}

bool FeasibleSet::contains(const VectorXd& x, double tol) const {
    if (x.size() != dim_) return false;
    if (kind_ == Kind::Ball) return x.norm() <= radius_ + tol;
    return (x.array() >= lower_.array() - tol).all() &&
           (x.array() <= upper_.array() + tol).all();
}

double FeasibleSet::norm_bound() const {
    if (kind_ == Kind::Ball) return radius_;
    return lower_.cwiseAbs().cwiseMax(upper_.cwiseAbs()).norm();
}

VectorXd clip_nonneg(const VectorXd& v) {
    if (!v.allFinite()) throw InvalidInputError("clip_nonneg: non-finite input");
    return v.cwiseMax(0.0);
}

NodeEvaluation eval_node(const NodeProblem& problem, int t, const VectorXd& x) {
    if (t < 1 || t > problem.horizon)
        throw std::out_of_range("eval_node: t=" + std::to_string(t) +
                                " outside horizon [1," + std::to_string(problem.horizon) + "]");
    if (x.size() != problem.decision_dim)
        throw ContractError("eval_node: decision dimension mismatch");
    NodeEvaluation out;
    out.f = problem.objective(t, x);
    out.grad_f = problem.objective_grad(t, x);
    out.g = problem.constraint(t, x);
    out.jac_g = problem.constraint_jac(t, x);
    if (out.grad_f.size() != problem.decision_dim ||
        out.g.size() != problem.constraint_dim ||
        out.jac_g.rows() != problem.constraint_dim ||
        out.jac_g.cols() != problem.decision_dim) {
        throw ContractError("eval_node: evaluation shape mismatch for node " +
                            std::to_string(problem.id));
    }
    return out;
}

}  // namespace odis
