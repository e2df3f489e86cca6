#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lab/poly.hpp"

namespace lab {

struct Point {
    Eigen::VectorXd x;
    double t = 0.0;
};

// Residual tolerance for "the point lies on M", relative to the magnitude of
// the evaluated terms.  Newton projections target this.
inline constexpr double kSurfaceResidualTol = 1e-9;
// |grad F| below this contradicts the regularity assumption on the family.
inline constexpr double kSingularGradientTol = 1e-12;
// |d_x F| below this marks a critical point of the parameter projection.
inline constexpr double kCriticalTol = 1e-12;

// A one-parameter family of hypersurfaces T_c = {x : F(x,c) = 0}, presented
// through the zero level M = F^{-1}(0) in R^n x R_t.  Caches the exact
// gradient and Hessian polynomials.  Immutable and shareable across threads.
class Family {
public:
    explicit Family(Polynomial F);

    int n() const { return n_; }
    const Polynomial& F() const { return F_; }

    double value(const Eigen::VectorXd& x, double t) const { return F_.eval(x, t); }
    // Residual magnitude: sum of |term| at the point, floored at 1.
    double value_scale(const Eigen::VectorXd& x, double t) const;

    Eigen::VectorXd gradient(const Eigen::VectorXd& x, double t) const;  // length n+1
    Eigen::VectorXd grad_x(const Eigen::VectorXd& x, double t) const;    // length n
    double dF_dt(const Eigen::VectorXd& x, double t) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& x, double t) const;   // (n+1)x(n+1)
    Eigen::MatrixXd hessian_x(const Eigen::VectorXd& x, double t) const; // n x n

private:
    Polynomial F_;
    int n_;
    std::vector<Polynomial> grad_;
    std::vector<std::vector<Polynomial>> hess_;  // upper triangle mirrored
};

// First-order data of M at a point, cached together.  normal_x/normal_t are
// the horizontal and vertical components of the unit normal; param_gradient
// is the gradient of the parameter projection restricted to M; level_normal
// is the Gauss map value of the level hypersurface T_t (defined when the
// point is not critical), and curvature its Gauss-Kronecker curvature.
struct SurfacePoint {
    Point p;
    Eigen::VectorXd normal;          // n+1, unit
    Eigen::VectorXd normal_x;        // n
    double normal_t = 0.0;
    Eigen::VectorXd param_gradient;  // n+1
    bool critical = false;
    Eigen::VectorXd level_normal;    // n, empty when critical
    double curvature = 0.0;          // meaningless when critical
};

// Validates the residual and regularity, fills all cached fields.  Throws
// NotOnSurface / SingularGradient; a vanishing horizontal gradient is not an
// error and only sets the critical flag.
SurfacePoint surface_point(const Family& fam, const Point& p);

// N = normal_x / |normal_x|; requires !sp.critical.
Eigen::VectorXd gauss_map(const SurfacePoint& sp);

// det of the level's shape operator in an orthonormal tangent basis, i.e.
// det d(gauss map) of T_t at the point, oriented by d_x F.  Requires
// !sp.critical and n >= 2.
double kronecker_curvature(const Family& fam, const SurfacePoint& sp);

// Deterministic orthonormal complement of the unit vector N: the trailing
// columns of the Householder reflection mapping e1 onto -sign(N_1) N.
Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& N);

}  // namespace lab
