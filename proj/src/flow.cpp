#include "lab/flow.hpp"

#include <cmath>
#include <functional>
#include <optional>

#include "lab/errors.hpp"
#include "lab/optim.hpp"

namespace lab {

namespace {

constexpr double kCriticalAbort = 1e-8;

// Dormand-Prince 5(4) coefficients.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600, E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640, E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;

using Field = std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd&)>;

// grad t_M at p, or nullopt when the point is numerically critical.
std::optional<Eigen::VectorXd> param_gradient_at(const Family& fam, const Eigen::VectorXd& p) {
    const int n = fam.n();
    Eigen::VectorXd g = fam.gradient(p.head(n), p[n]);
    double g2 = g.squaredNorm();
    if (g2 < kSingularGradientTol * kSingularGradientTol) return std::nullopt;
    Eigen::VectorXd gx = g.head(n);
    double gt = g[n];
    Eigen::VectorXd grad_tm(n + 1);
    grad_tm.head(n) = -(gt / g2) * gx;
    grad_tm[n] = gx.squaredNorm() / g2;
    if (grad_tm.norm() < kCriticalAbort) return std::nullopt;
    return grad_tm;
}

FlowTrajectory integrate(const Family& fam, const SurfacePoint& start, double s_target,
                         double tol, FieldKind kind, const Field& field,
                         const ConstraintSet& projection, FlowStatus failure_status) {
    FlowTrajectory traj;
    traj.start = start;
    traj.field_kind = kind;

    const int n = fam.n();
    Eigen::VectorXd p(n + 1);
    p.head(n) = start.p.x;
    p[n] = start.p.t;

    auto record = [&](double s, const Eigen::VectorXd& q) {
        traj.steps.push_back({s, Point{q.head(n), q[n]}, q.head(n).norm(), q[n]});
    };
    record(0.0, p);
    if (s_target == 0.0) return traj;

    const double dir = (s_target > 0.0) ? 1.0 : -1.0;
    const double span = std::abs(s_target);
    const double h_min = 1e-14 * std::max(1.0, span);

    auto f0 = field(p);
    if (!f0) {
        traj.status = failure_status;
        return traj;
    }
    double h = dir * std::min(span / 10.0, 0.1 * (1.0 + p.norm()) / (f0->norm() + 1e-30));
    double s = 0.0;
    const double s_done = 1e-15 * std::max(1.0, span);

    Eigen::VectorXd k1 = *f0;
    const int max_steps = 200000;
    int step = 0;
    while (dir * (s_target - s) > s_done) {
        if (++step > max_steps || std::abs(h) < h_min) {
            traj.status = FlowStatus::step_underflow;
            return traj;
        }
        if (dir * (s + h) > dir * s_target) h = s_target - s;

        bool stage_failed = false;
        auto stage = [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
            if (stage_failed) return k1;
            auto r = field(q);
            if (!r) {
                stage_failed = true;
                return k1;
            }
            return *r;
        };
        Eigen::VectorXd k2 = stage(p + h * (A21 * k1));
        Eigen::VectorXd k3 = stage(p + h * (A31 * k1 + A32 * k2));
        Eigen::VectorXd k4 = stage(p + h * (A41 * k1 + A42 * k2 + A43 * k3));
        Eigen::VectorXd k5 = stage(p + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        Eigen::VectorXd k6 =
            stage(p + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        Eigen::VectorXd p5 = p + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        Eigen::VectorXd k7 = stage(p5);
        if (stage_failed) {
            // A stage left the regular region: shrink, and if the step is
            // already tiny treat it as a genuine approach to the bad set.
            h *= 0.25;
            if (std::abs(h) < h_min) {
                traj.status = failure_status;
                return traj;
            }
            continue;
        }

        Eigen::VectorXd err_vec =
            h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        double err = 0.0;
        for (int i = 0; i <= n; ++i)
            err = std::max(err, std::abs(err_vec[i]) / (tol + tol * std::abs(p5[i])));

        if (err <= 1.0) {
            Eigen::VectorXd q = p5;
            if (!project_to_constraints(projection, q)) {
                traj.status = failure_status;
                return traj;
            }
            s += h;
            p = q;
            record(s, p);
            auto fnext = field(p);
            if (!fnext) {
                traj.status = failure_status;
                return traj;
            }
            k1 = *fnext;  // first-same-as-last restart after projection
        }
        double grow = (err > 1e-30) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        if (dir * h <= 0.0) h = dir * h_min * 2.0;
    }
    return traj;
}

}  // namespace

FlowTrajectory transport(const Family& fam, const SurfacePoint& start, double s_target,
                         double tol) {
    if (start.critical) throw SingularGradient("transport from a critical point");
    Field chi = [&fam](const Eigen::VectorXd& p) -> std::optional<Eigen::VectorXd> {
        auto g = param_gradient_at(fam, p);
        if (!g) return std::nullopt;
        return *g / g->squaredNorm();
    };
    return integrate(fam, start, s_target, tol, FieldKind::chi, chi,
                     on_surface_constraints(fam), FlowStatus::near_critical);
}

bool gronwall_check(const FlowTrajectory& traj, double A, double tol) {
    if (A <= 0.0) throw DimensionMismatch("gronwall_check needs A > 0");
    if (traj.steps.size() <= 1) return true;
    const double r0 = traj.steps.front().radius;
    for (const FlowStep& st : traj.steps) {
        if (st.radius > r0 * std::exp(std::abs(st.s) / A) * (1.0 + tol)) return false;
    }
    return true;
}

FlowTrajectory xi_transport(const Family& fam, const SurfacePoint& start, double s_target,
                            double tol) {
    if (start.critical) throw SingularGradient("xi_transport from a critical point");
    const int n = fam.n();
    const double radius0 = start.p.x.norm();

    // Check the degenerate case up front so callers get the error eagerly.
    {
        Eigen::VectorXd p(n + 1);
        p.head(n) = start.p.x;
        p[n] = start.p.t;
        auto g = param_gradient_at(fam, p);
        if (!g) throw SingularGradient("xi_transport start is numerically critical");
        Eigen::VectorXd nu = fam.gradient(start.p.x, start.p.t).normalized();
        Eigen::VectorXd radial = Eigen::VectorXd::Zero(n + 1);
        radial.head(n) = start.p.x.normalized();
        Eigen::VectorXd rho = radial - radial.dot(nu) * nu;
        if (rho.norm() < 1e-10)
            throw DegenerateSphericalComponent("sphere slice tangent to the surface");
        Eigen::VectorXd nu_tm = g->normalized();
        Eigen::VectorXd rho_hat = rho.normalized();
        Eigen::VectorXd nuS = nu_tm - nu_tm.dot(rho_hat) * rho_hat;
        if (nuS.norm() < kCriticalAbort)
            throw DegenerateSphericalComponent(
                "sphere-tangent component of grad t_M vanished at the start");
    }

    Field xi = [&fam, n](const Eigen::VectorXd& p) -> std::optional<Eigen::VectorXd> {
        auto g = param_gradient_at(fam, p);
        if (!g) return std::nullopt;
        Eigen::VectorXd nu = fam.gradient(p.head(n), p[n]).normalized();
        Eigen::VectorXd radial = Eigen::VectorXd::Zero(n + 1);
        double r = p.head(n).norm();
        if (r < 1e-300) return std::nullopt;
        radial.head(n) = p.head(n) / r;
        Eigen::VectorXd rho = radial - radial.dot(nu) * nu;
        if (rho.norm() < 1e-10) return std::nullopt;
        Eigen::VectorXd nu_tm = g->normalized();
        Eigen::VectorXd rho_hat = rho.normalized();
        Eigen::VectorXd nuS = nu_tm - nu_tm.dot(rho_hat) * rho_hat;
        double denom = g->dot(nuS);
        if (nuS.norm() < kCriticalAbort || denom < 1e-300) return std::nullopt;
        return nuS / denom;  // unit level speed by construction
    };
    return integrate(fam, start, s_target, tol, FieldKind::xi, xi,
                     sphere_slice_constraints(fam, radius0), FlowStatus::degenerate_spherical);
}

}  // namespace lab
