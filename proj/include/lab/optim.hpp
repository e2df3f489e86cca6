#pragma once

#include <functional>

#include <Eigen/Dense>

#include "lab/geom.hpp"

namespace lab {

// Equality constraints h(p) = 0 with rows normalized so a fixed absolute
// tolerance per row is meaningful.
struct ConstraintSet {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
    Eigen::VectorXd tolerance;  // per row

    bool satisfied(const Eigen::VectorXd& p) const;
};

// Minimal-norm Gauss-Newton onto {h = 0}, with residual-norm backtracking.
bool project_to_constraints(const ConstraintSet& cs, Eigen::VectorXd& p, int max_iter = 60);

struct Objective {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

struct MinimizeResult {
    Eigen::VectorXd p;
    double value = 0.0;
    bool feasible = false;
    int iterations = 0;
};

// Projected gradient descent on the manifold {h = 0}: Euclidean gradient
// projected onto the tangent space, Armijo backtracking, re-projection after
// every trial step (projection retraction).
MinimizeResult projected_gradient_minimize(const ConstraintSet& cs, const Objective& obj,
                                           const Eigen::VectorXd& p0, int max_iter,
                                           double initial_step);

// Constraint set {F(x,t) = 0} on points p = (x, t), residual scaled by the
// local term magnitude of F.
ConstraintSet on_surface_constraints(const Family& fam);

// {F(x,t) = 0, |x| = radius}.
ConstraintSet sphere_slice_constraints(const Family& fam, double radius);

// {F(x, t_fixed) = 0, |x| = radius} acting on x alone (t frozen).
ConstraintSet level_sphere_constraints(const Family& fam, double t_fixed, double radius);

}  // namespace lab
