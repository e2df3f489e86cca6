#include "lab/optim.hpp"

#include <cmath>

namespace lab {

bool ConstraintSet::satisfied(const Eigen::VectorXd& p) const {
    Eigen::VectorXd h = residual(p);
    for (int i = 0; i < h.size(); ++i)
        if (std::abs(h[i]) > tolerance[i]) return false;
    return true;
}

bool project_to_constraints(const ConstraintSet& cs, Eigen::VectorXd& p, int max_iter) {
    Eigen::VectorXd h = cs.residual(p);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool ok = true;
        for (int i = 0; i < h.size(); ++i)
            if (std::abs(h[i]) > cs.tolerance[i]) ok = false;
        if (ok) return true;

        Eigen::MatrixXd J = cs.jacobian(p);
        Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-h);
        if (!step.allFinite()) return false;

        double lambda = 1.0;
        bool improved = false;
        double hn = h.norm();
        for (int back = 0; back < 30; ++back) {
            Eigen::VectorXd trial = p + lambda * step;
            Eigen::VectorXd ht = cs.residual(trial);
            if (ht.norm() < hn) {
                p = trial;
                h = ht;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) return false;
    }
    return cs.satisfied(p);
}

MinimizeResult projected_gradient_minimize(const ConstraintSet& cs, const Objective& obj,
                                           const Eigen::VectorXd& p0, int max_iter,
                                           double initial_step) {
    MinimizeResult res;
    res.p = p0;
    if (!project_to_constraints(cs, res.p)) {
        res.feasible = false;
        res.value = obj.value(res.p);
        return res;
    }
    res.feasible = true;
    double f = obj.value(res.p);
    double step = initial_step;

    int stall = 0;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        Eigen::VectorXd g = obj.gradient(res.p);
        Eigen::MatrixXd J = cs.jacobian(res.p);
        // Tangent component: g - J^T (J J^T)^{-1} J g.
        Eigen::VectorXd lam =
            (J * J.transpose()).completeOrthogonalDecomposition().solve(J * g);
        Eigen::VectorXd gt = g - J.transpose() * lam;
        double gn = gt.norm();
        if (gn < 1e-14 * (1.0 + std::abs(f))) break;

        bool accepted = false;
        for (int back = 0; back < 40; ++back) {
            Eigen::VectorXd trial = res.p - step * gt;
            if (!project_to_constraints(cs, trial)) {
                step *= 0.5;
                continue;
            }
            double ft = obj.value(trial);
            if (ft <= f - 1e-4 * step * gn * gn) {
                res.p = trial;
                if (f - ft < 1e-13 * (1.0 + std::abs(f)))
                    ++stall;
                else
                    stall = 0;
                f = ft;
                accepted = true;
                step *= 1.8;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || stall >= 4) break;
    }
    res.value = f;
    res.iterations = iter;
    return res;
}

ConstraintSet on_surface_constraints(const Family& fam) {
    const int n = fam.n();
    ConstraintSet cs;
    cs.residual = [&fam, n](const Eigen::VectorXd& p) {
        Eigen::VectorXd x = p.head(n);
        double scale = fam.value_scale(x, p[n]);
        Eigen::VectorXd h(1);
        h[0] = fam.value(x, p[n]) / scale;
        return h;
    };
    cs.jacobian = [&fam, n](const Eigen::VectorXd& p) {
        Eigen::VectorXd x = p.head(n);
        double scale = fam.value_scale(x, p[n]);
        Eigen::MatrixXd J(1, n + 1);
        J.row(0) = fam.gradient(x, p[n]).transpose() / scale;
        return J;
    };
    cs.tolerance = Eigen::VectorXd::Constant(1, kSurfaceResidualTol);
    return cs;
}

ConstraintSet sphere_slice_constraints(const Family& fam, double radius) {
    const int n = fam.n();
    ConstraintSet cs;
    cs.residual = [&fam, n, radius](const Eigen::VectorXd& p) {
        Eigen::VectorXd x = p.head(n);
        double scale = fam.value_scale(x, p[n]);
        Eigen::VectorXd h(2);
        h[0] = fam.value(x, p[n]) / scale;
        h[1] = x.norm() - radius;
        return h;
    };
    cs.jacobian = [&fam, n, radius](const Eigen::VectorXd& p) {
        Eigen::VectorXd x = p.head(n);
        double scale = fam.value_scale(x, p[n]);
        Eigen::MatrixXd J(2, n + 1);
        J.row(0) = fam.gradient(x, p[n]).transpose() / scale;
        double r = std::max(x.norm(), 1e-30);
        J.row(1).setZero();
        J.row(1).head(n) = x.transpose() / r;
        return J;
    };
    cs.tolerance.resize(2);
    cs.tolerance << kSurfaceResidualTol, 1e-8;
    return cs;
}

ConstraintSet level_sphere_constraints(const Family& fam, double t_fixed, double radius) {
    const int n = fam.n();
    ConstraintSet cs;
    cs.residual = [&fam, n, t_fixed, radius](const Eigen::VectorXd& x) {
        double scale = fam.value_scale(x, t_fixed);
        Eigen::VectorXd h(2);
        h[0] = fam.value(x, t_fixed) / scale;
        h[1] = x.norm() - radius;
        return h;
    };
    cs.jacobian = [&fam, n, t_fixed, radius](const Eigen::VectorXd& x) {
        double scale = fam.value_scale(x, t_fixed);
        Eigen::MatrixXd J(2, n);
        J.row(0) = fam.grad_x(x, t_fixed).transpose() / scale;
        double r = std::max(x.norm(), 1e-30);
        J.row(1) = x.transpose() / r;
        return J;
    };
    cs.tolerance.resize(2);
    cs.tolerance << kSurfaceResidualTol, 1e-8;
    return cs;
}

}  // namespace lab
