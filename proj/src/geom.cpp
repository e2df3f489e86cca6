#include "lab/geom.hpp"

#include <cmath>

#include "lab/errors.hpp"

namespace lab {

Family::Family(Polynomial F) : F_(std::move(F)), n_(F_.nvars()) {
    grad_.reserve(n_ + 1);
    for (int i = 0; i <= n_; ++i) grad_.push_back(F_.derivative(i));
    hess_.resize(n_ + 1);
    for (int i = 0; i <= n_; ++i) {
        hess_[i].reserve(n_ + 1);
        for (int j = 0; j <= n_; ++j)
            hess_[i].push_back(j >= i ? grad_[i].derivative(j) : hess_[j][i]);
    }
}

double Family::value_scale(const Eigen::VectorXd& x, double t) const {
    double scale = 0.0;
    F_.eval_with_scale(x, t, &scale);
    return std::max(1.0, scale);
}

Eigen::VectorXd Family::gradient(const Eigen::VectorXd& x, double t) const {
    Eigen::VectorXd g(n_ + 1);
    for (int i = 0; i <= n_; ++i) g[i] = grad_[i].eval(x, t);
    return g;
}

Eigen::VectorXd Family::grad_x(const Eigen::VectorXd& x, double t) const {
    Eigen::VectorXd g(n_);
    for (int i = 0; i < n_; ++i) g[i] = grad_[i].eval(x, t);
    return g;
}

double Family::dF_dt(const Eigen::VectorXd& x, double t) const { return grad_[n_].eval(x, t); }

Eigen::MatrixXd Family::hessian(const Eigen::VectorXd& x, double t) const {
    Eigen::MatrixXd H(n_ + 1, n_ + 1);
    for (int i = 0; i <= n_; ++i) {
        for (int j = i; j <= n_; ++j) {
            H(i, j) = hess_[i][j].eval(x, t);
            H(j, i) = H(i, j);
        }
    }
    return H;
}

Eigen::MatrixXd Family::hessian_x(const Eigen::VectorXd& x, double t) const {
    Eigen::MatrixXd H(n_, n_);
    for (int i = 0; i < n_; ++i) {
        for (int j = i; j < n_; ++j) {
            H(i, j) = hess_[i][j].eval(x, t);
            H(j, i) = H(i, j);
        }
    }
    return H;
}

SurfacePoint surface_point(const Family& fam, const Point& p) {
    if (p.x.size() != fam.n()) throw DimensionMismatch("point dimension does not match family");

    const double value = fam.value(p.x, p.t);
    const double scale = fam.value_scale(p.x, p.t);
    if (std::abs(value) > kSurfaceResidualTol * scale)
        throw NotOnSurface("residual " + std::to_string(value) + " too large for surface point");

    Eigen::VectorXd g = fam.gradient(p.x, p.t);
    const double gnorm = g.norm();
    if (gnorm < kSingularGradientTol)
        throw SingularGradient("gradient vanished on the zero level");

    SurfacePoint sp;
    sp.p = p;
    sp.normal = g / gnorm;
    sp.normal_x = sp.normal.head(fam.n());
    sp.normal_t = sp.normal[fam.n()];

    // param_gradient = -(dF/dt / |grad F|^2) d_x F + (|d_x F|^2 / |grad F|^2) e_t
    const Eigen::VectorXd gx = g.head(fam.n());
    const double gt = g[fam.n()];
    const double g2 = gnorm * gnorm;
    sp.param_gradient.setZero(fam.n() + 1);
    sp.param_gradient.head(fam.n()) = -(gt / g2) * gx;
    sp.param_gradient[fam.n()] = gx.squaredNorm() / g2;

    if (gx.norm() < kCriticalTol) {
        sp.critical = true;
    } else {
        sp.level_normal = gx / gx.norm();
        sp.curvature = kronecker_curvature(fam, sp);
    }
    return sp;
}

Eigen::VectorXd gauss_map(const SurfacePoint& sp) {
    if (sp.critical)
        throw SingularGradient("gauss map undefined at a critical point of the projection");
    return sp.level_normal;
}

Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& N) {
    const int n = static_cast<int>(N.size());
    const double s = (N[0] >= 0.0) ? 1.0 : -1.0;
    Eigen::VectorXd u = N;
    u[0] += s;
    const double u2 = u.squaredNorm();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) - (2.0 / u2) * (u * u.transpose());
    return H.rightCols(n - 1);
}

double kronecker_curvature(const Family& fam, const SurfacePoint& sp) {
    if (sp.critical)
        throw SingularGradient("curvature undefined at a critical point of the projection");
    if (fam.n() < 2) throw DimensionMismatch("curvature needs n >= 2");

    const Eigen::VectorXd gx = fam.grad_x(sp.p.x, sp.p.t);
    const Eigen::MatrixXd Hx = fam.hessian_x(sp.p.x, sp.p.t);
    const Eigen::MatrixXd B = tangent_basis(sp.level_normal);
    const Eigen::MatrixXd shape = B.transpose() * (Hx / gx.norm()) * B;
    return shape.determinant();
}

}  // namespace lab
