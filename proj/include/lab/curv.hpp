#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lab/geom.hpp"
#include "lab/sample.hpp"

namespace lab {

enum class Method { tracer, thin_shell };

// Per-grid-point marker bits.
enum PointFlag : unsigned {
    kFlagNearK0 = 1u,
    kFlagEmpty = 2u,
    kFlagDiscontinuityLeft = 4u,
    kFlagDiscontinuityRight = 8u,
};

std::string flag_string(unsigned flags);

struct CurvatureEstimate {
    double K = 0.0;
    double absK = 0.0;
    double err = 0.0;
    unsigned flags = 0;
};

// Signed and absolute total turning of one polyline (sum of exterior angles;
// interior vertices only when open).
std::pair<double, double> polyline_turning(const Polyline& pl);

// Total curvature and total absolute curvature of T_c inside the ball of
// radius ball_radius.  tracer (n = 2): exterior-angle sums over the refined
// polylines, budget = grid cells per axis, err from a half-resolution
// comparison.  thin_shell: weighted sums over a sample batch, budget = target
// acceptance count, err from batch variance.  An empty level yields zeros
// with the empty flag.
CurvatureEstimate total_curvature_at(const Family& fam, double c, Method method,
                                     long long budget, double ball_radius, std::uint64_t seed);

struct CurvatureProfile {
    std::vector<double> tgrid;
    std::vector<double> K;
    std::vector<double> absK;
    std::vector<double> err;
    std::vector<unsigned> flags;

    bool triangle_ok() const;  // |K| <= absK + 2 err everywhere
};

// Grid of total_curvature_at values with shared configuration; grid points
// adjacent to a detected K0 value are flagged near_K0.  Per-point errors
// never abort the whole profile.  Deterministic: each grid point derives its
// stream from (seed, index).
CurvatureProfile profile(const Family& fam, double tmin, double tmax, int steps, Method method,
                         long long budget, double ball_radius, std::uint64_t seed);

// Change-of-variables cross-check (n = 2): counts Gauss-map preimages with
// orientation signs over sampled directions of S^1 on the traced level.
// Returns (K_deg, absK_deg) = 2*pi * (mean signed count, mean unsigned count).
std::pair<double, double> degree_crosscheck(const Family& fam, double c, int directions,
                                            double ball_radius, long long budget,
                                            std::uint64_t seed);

struct JumpInterval {
    int left_index = 0;   // first grid index of the merged run
    int right_index = 0;  // last grid index (inclusive)
    double t_left = 0.0;
    double t_right = 0.0;
};

// Core detector: flags the elementary interval (t_i, t_i+1) when the absK
// gap exceeds k_sigma * (err_i + err_i+1) and the gap persists under the
// recompute callback (double budget).  Adjacent flagged intervals merge into
// one reported jump.  Updates the profile's discontinuity flag bits.
std::vector<JumpInterval> detect_discontinuities(
    CurvatureProfile& prof, double k_sigma,
    const std::function<CurvatureEstimate(double t)>& recompute_double_budget);

// Convenience wrapper binding total_curvature_at with doubled budget.
std::vector<JumpInterval> detect_discontinuities(const Family& fam, CurvatureProfile& prof,
                                                 Method method, long long budget,
                                                 double ball_radius, std::uint64_t seed,
                                                 double k_sigma);

}  // namespace lab
