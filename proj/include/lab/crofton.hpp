#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lab/poly.hpp"

namespace lab {

// Hyperplane through the origin, antipodally identified: the representative
// normal has its first non-negligible component positive.
struct Hyperplane {
    Eigen::VectorXd normal;
};

// Uniform on G(n-1, n), deterministic in (seed, index).
Hyperplane random_hyperplane(int n, std::uint64_t seed, long long index);

// Euler characteristic data of the section of the level {f = t} by H.
// n = 2: H is a line through the origin; returns
//   chi({f >= t} ∩ H) - chi({f <= t} ∩ H)
// exactly, from the isolated real roots of f - t restricted to the line.
// n = 3: H is a plane; returns chi(f^{-1}(t) ∩ H) computed from the traced
// section curve inside the box (one per unbounded arc, zero per loop).
// Throws RootIsolationFailure on a degenerate (tangent) section; the caller
// redraws H.
int euler_of_section(const Polynomial& f, double t, const Hyperplane& H, double box_radius);

struct EulerAverages {
    std::vector<double> tgrid;
    std::vector<double> mean;
    std::vector<double> stderr_of_mean;
    long long draws_used = 0;
    long long failures = 0;  // redraws forced by degenerate sections
};

// Monte-Carlo Grassmannian average of euler_of_section over a fixed set of
// hyperplanes reused across the whole t-grid (common random numbers), so the
// t-dependence of the average is not drowned by resampling noise.
EulerAverages average_euler(const Polynomial& f, const std::vector<double>& tgrid,
                            long long draws, double box_radius, std::uint64_t seed);

// Exact real roots of a univariate polynomial (coefficients in increasing
// degree), polished by Newton; throws RootIsolationFailure when a root fails
// the simplicity check.  Exposed for tests.
std::vector<double> isolated_real_roots(const std::vector<double>& coef);

}  // namespace lab
