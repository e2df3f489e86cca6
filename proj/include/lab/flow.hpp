#pragma once

#include <vector>

#include "lab/geom.hpp"

namespace lab {

enum class FieldKind { chi, xi };
enum class FlowStatus { ok, near_critical, step_underflow, degenerate_spherical };

struct FlowStep {
    double s = 0.0;
    Point p;
    double radius = 0.0;  // |x|
    double level = 0.0;   // parameter value t_M at the point
};

struct FlowTrajectory {
    SurfacePoint start;
    std::vector<FlowStep> steps;
    FieldKind field_kind = FieldKind::chi;
    FlowStatus status = FlowStatus::ok;

    bool ok() const { return status == FlowStatus::ok; }
    const FlowStep& back() const { return steps.back(); }
};

// Integrates chi = grad t_M / |grad t_M|^2 from the start point with an
// adaptive embedded Runge-Kutta pair and per-step Newton re-projection onto
// M.  The continuous flow advances the level at unit rate, so the terminal
// level is start level + s_target within tol.  Aborts with a partial
// trajectory when |grad t_M| falls under 1e-8 (near the critical locus) or
// when the step size underflows.
FlowTrajectory transport(const Family& fam, const SurfacePoint& start, double s_target,
                         double tol);

// Radius bound along a trajectory: radius(s) <= radius(0) * exp(|s|/A) * (1+tol)
// for every recorded step.  A is a measured positive lower bound of
// |x| * |grad t_M| over the traversed pencil.
bool gronwall_check(const FlowTrajectory& traj, double A, double tol = 1e-8);

// Integrates the unit-level-speed field whose x-part is tangent to the
// Euclidean spheres {|x| = const}: |x| stays constant along the trajectory
// and the level advances monotonically.  Re-projection targets
// {F = 0, |x| = |x(0)|}.  Aborts with degenerate_spherical when the
// sphere-tangent component of grad t_M falls under 1e-8.
FlowTrajectory xi_transport(const Family& fam, const SurfacePoint& start, double s_target,
                            double tol);

}  // namespace lab
