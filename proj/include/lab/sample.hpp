#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lab/geom.hpp"

namespace lab {

// Damped Newton along d_x F onto the level {F(., c) = 0}.  Returns nullopt
// when no convergence within 50 iterations (caller discards the seed).
std::optional<Point> newton_project(const Family& fam, const Eigen::VectorXd& x0, double c);

// Connected piece of a traced level curve (n = 2).  Every vertex satisfies
// the surface residual tolerance; consecutive vertices stay within the
// tracer step bound.
struct Polyline {
    std::vector<Eigen::Vector2d> vertices;
    bool closed = false;

    double length() const;
};

// Marching squares on [-R, R]^2 with linear interpolation, Newton refinement
// of every vertex and linking into ordered polylines.  Saddle cells are
// resolved by the sign of the cell-center value, so traces are deterministic.
// Components leaving the box come back as open polylines.
std::vector<Polyline> trace_level_curve(const Family& fam, double c, double box_radius,
                                        double cell);

struct WeightedSample {
    SurfacePoint sp;
    double weight = 0.0;  // estimated surface measure carried by this sample
};

struct SampleBatch {
    std::vector<WeightedSample> samples;
    long long proposals_used = 0;
    double ball_radius = 0.0;
    double shell_half_width = 0.0;
    double ball_volume = 0.0;

    double weight_sum() const;
};

double ball_volume(int n, double radius);

// Rejection sampler for the co-area surface estimator: uniform proposals in
// the ball of radius R, kept when |F| < delta * |d_x F| (first-order shell
// test), Newton-projected onto T_c.  Each accepted sample carries weight
// vol(ball) / (2 delta * proposals), so the weight sum estimates the
// (n-1)-volume of T_c inside the ball.  Deterministic in (seed); independent
// of the worker count.  Throws EmptyLevelInBall when the 20x retry budget
// yields no acceptance.
SampleBatch thin_shell_samples(const Family& fam, double c, double ball_radius,
                               double shell_half_width, long long count, std::uint64_t seed);

}  // namespace lab
