#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lab/geom.hpp"

namespace lab {

// Critical values of the parameter projection: Newton continuation on the
// system {F = 0, d_x F = 0} from a lattice of seeds in the box, deduplicated
// t-values inside [t_lo, t_hi].  Conservative: every returned value carries a
// converged witness; missed roots outside the seed basin are a documented
// completeness caveat.
std::vector<double> find_K0(const Family& fam, double t_lo, double t_hi, double box_radius);
std::vector<std::pair<double, Point>> find_K0_witnessed(const Family& fam, double t_lo,
                                                        double t_hi, double box_radius);

enum class AcvClass { malgrange_holds, acv_with_exponent, vacuous_compact, inconclusive };
std::string to_string(AcvClass c);

struct AcvReport {
    double c = 0.0;
    double epsilon = 0.0;
    std::vector<double> radii;
    std::vector<double> mu0;  // +inf marks an empty slab at that radius
    double fitted_slope = 0.0;
    AcvClass classification = AcvClass::inconclusive;
    std::vector<bool> undersampled;
    std::vector<std::vector<double>> local_minima;  // per radius
    bool slope_fit_stable = false;
};

// Radial Malgrange profile: per radius R, the minimized |x| * |grad t_M| over
// M intersected with {|x| = R, |t - c| <= epsilon} (thin sampling of the
// sphere slice plus projected-gradient descent with restarts), log-log slope
// over the largest stable window, and the classification.
AcvReport malgrange_profile(const Family& fam, double c, double epsilon,
                            std::vector<double> radii, long long budget, std::uint64_t seed);

enum class SphVerdict { spherical, not_spherical, vacuous_compact, inconclusive };
std::string to_string(SphVerdict v);

struct SphericalnessReport {
    double c = 0.0;
    double ec_estimate = 0.0;  // NaN when the envelope is not fittable
    double defect = 0.0;       // max |<x/|x|, N>| at the largest radius band
    SphVerdict verdict = SphVerdict::inconclusive;
};

// Exponent fit of the lower envelope of |x|*|grad t_M| against |t_M - c|
// over far samples, plus the orthogonality defect between radial directions
// and Gauss-map values.  spherical requires ec < 1 - margin(0.05) and
// defect <= 0.1; not_spherical additionally demands strong evidence
// (defect >= 0.3 and ec >= 0.95) so noise never contradicts the Malgrange
// hierarchy.
SphericalnessReport sphericalness_report(const Family& fam, double c, double epsilon,
                                         std::vector<double> radii, long long budget,
                                         std::uint64_t seed);

struct NormalCloud {
    struct DirectionPair {
        Eigen::VectorXd u;  // x / |x|
        Eigen::VectorXd v;  // Gauss map value
        double radius = 0.0;
        double tval = 0.0;
    };
    std::vector<DirectionPair> pairs;
    double occupancy = 0.0;  // fraction of sphere-grid cells containing some v
    double grid_h = 0.0;
};

// Collects (u, v) limit pairs at radii r_min, 2 r_min, 4 r_min inside the
// slab |t - c| <= epsilon; occupancy decreasing as r_min grows is the
// numerical signature of an area-zero limit normal set.  Empty pencils
// return an empty cloud.
NormalCloud limit_normal_cloud(const Family& fam, double c, double epsilon, double r_min,
                               long long budget, std::uint64_t seed, double grid_h);

// ---------------------------------------------------------------------------
// Lower-level machinery, exposed for tests and for the flow module.

struct FarBand {
    double radius = 0.0;
    std::vector<SurfacePoint> points;  // feasible: on {F=0, |x|=R}, |t-c| <= eps
    bool reachable = false;            // sphere slice met M at any t
    int converged_seeds = 0;
    double min_q = 0.0;       // min |x| * |grad t_M| over feasible points (inf if none)
    double min_q_dt = 0.0;    // |t - c| at the minimizing point
    double max_defect = 0.0;  // max |<u, N>| over feasible points
    std::vector<double> local_minima;
};

// Samples the sphere slice {F = 0, |x| = R}, keeps slab-feasible points, and
// (optionally) runs penalty projected-gradient descents both minimizing
// |x|*|grad t_M| and maximizing the defect, recording every polished point.
FarBand collect_far_band(const Family& fam, double c, double epsilon, double radius,
                         long long budget, int restarts, std::uint64_t seed, bool optimize,
                         const std::vector<Eigen::VectorXd>& extra_starts = {});

// Occupied direction cells (angular bins of width grid_h, n = 2 only) of
// x/|x| over the band at radius R; epsilon = 0 collects on the exact level
// t = c instead of the slab.
std::vector<long long> far_direction_cells(const Family& fam, double c, double epsilon,
                                           double radius, long long budget, std::uint64_t seed,
                                           double grid_h);

double sphere_grid_occupancy(const std::vector<Eigen::VectorXd>& dirs, double grid_h, int n);

}  // namespace lab
