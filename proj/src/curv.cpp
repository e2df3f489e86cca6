#include "lab/curv.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "lab/asym.hpp"
#include "lab/errors.hpp"
#include "lab/parallel.hpp"
#include "lab/rng.hpp"

namespace lab {

std::string flag_string(unsigned flags) {
    if (flags == 0) return "ok";
    std::string out;
    auto add = [&](const char* name) {
        if (!out.empty()) out += ";";
        out += name;
    };
    if (flags & kFlagNearK0) add("near_K0");
    if (flags & kFlagEmpty) add("empty");
    if (flags & kFlagDiscontinuityLeft) add("discontinuity_left");
    if (flags & kFlagDiscontinuityRight) add("discontinuity_right");
    return out;
}

std::pair<double, double> polyline_turning(const Polyline& pl) {
    const auto& v = pl.vertices;
    const std::size_t m = v.size();
    if (m < 3) return {0.0, 0.0};

    auto edge = [&](std::size_t i) { return Eigen::Vector2d(v[(i + 1) % m] - v[i % m]); };
    double K = 0.0, absK = 0.0;
    // Exterior angle at vertex i is the signed rotation from edge i-1 to edge i.
    std::size_t first = pl.closed ? 0 : 1;
    std::size_t last = pl.closed ? m : m - 1;
    for (std::size_t i = first; i < last; ++i) {
        Eigen::Vector2d a = edge(i + m - 1);
        Eigen::Vector2d b = edge(i);
        if (a.norm() < 1e-14 || b.norm() < 1e-14) continue;
        double ang = std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
        K += ang;
        absK += std::abs(ang);
    }
    return {K, absK};
}

namespace {

CurvatureEstimate tracer_estimate(const Family& fam, double c, long long budget,
                                  double ball_radius) {
    auto sum_at = [&](double cell) {
        std::vector<Polyline> curves = trace_level_curve(fam, c, ball_radius, cell);
        double K = 0.0, absK = 0.0;
        bool any = false;
        for (const Polyline& pl : curves) {
            auto [k, a] = polyline_turning(pl);
            K += k;
            absK += a;
            any = true;
        }
        return std::tuple<double, double, bool>(K, absK, any);
    };

    const double cell = 2.0 * ball_radius / static_cast<double>(std::max<long long>(budget, 8));
    auto [K, absK, any] = sum_at(cell);
    if (!any) {
        CurvatureEstimate est;
        est.flags = kFlagEmpty;
        return est;
    }
    auto [K2, absK2, any2] = sum_at(2.0 * cell);
    (void)any2;
    CurvatureEstimate est;
    est.K = K;
    est.absK = absK;
    est.err = std::max(std::abs(K - K2), std::abs(absK - absK2)) / 3.0 + 1e-9;
    return est;
}

CurvatureEstimate shell_estimate(const Family& fam, double c, long long budget,
                                 double ball_radius, std::uint64_t seed) {
    CurvatureEstimate est;
    SampleBatch batch;
    try {
        double delta = 1e-3 * ball_radius;
        batch = thin_shell_samples(fam, c, ball_radius, delta, budget, seed);
    } catch (const EmptyLevelInBall&) {
        est.flags = kFlagEmpty;
        return est;
    }

    const double n = static_cast<double>(batch.proposals_used);
    double K = 0.0, absK = 0.0, sq_k = 0.0, sq_a = 0.0;
    for (const WeightedSample& ws : batch.samples) {
        if (ws.sp.critical) continue;
        const double w = ws.weight;
        const double kappa = ws.sp.curvature;
        K += w * kappa;
        absK += w * std::abs(kappa);
        sq_k += w * w * kappa * kappa;
        sq_a += w * w * kappa * kappa;
    }
    est.K = K;
    est.absK = absK;
    // Per-proposal variance of the indicator-weighted summand.
    double var_k = std::max(0.0, sq_k - K * K / n);
    double var_a = std::max(0.0, sq_a - absK * absK / n);
    est.err = std::sqrt(std::max(var_k, var_a)) + 1e-12;
    return est;
}

}  // namespace

CurvatureEstimate total_curvature_at(const Family& fam, double c, Method method,
                                     long long budget, double ball_radius, std::uint64_t seed) {
    if (method == Method::tracer) return tracer_estimate(fam, c, budget, ball_radius);
    return shell_estimate(fam, c, budget, ball_radius, seed);
}

bool CurvatureProfile::triangle_ok() const {
    for (std::size_t i = 0; i < tgrid.size(); ++i)
        if (std::abs(K[i]) > absK[i] + 2.0 * err[i] + 1e-12) return false;
    return true;
}

CurvatureProfile profile(const Family& fam, double tmin, double tmax, int steps, Method method,
                         long long budget, double ball_radius, std::uint64_t seed) {
    if (steps < 2) throw DimensionMismatch("profile needs at least 2 grid points");

    CurvatureProfile prof;
    prof.tgrid.resize(steps);
    prof.K.assign(steps, 0.0);
    prof.absK.assign(steps, 0.0);
    prof.err.assign(steps, 0.0);
    prof.flags.assign(steps, 0u);
    const double h = (tmax - tmin) / (steps - 1);
    for (int i = 0; i < steps; ++i) prof.tgrid[i] = tmin + h * i;

    parallel_for(steps, [&](long long i) {
        RandomStream stream(seed, {0x70726f66ull, static_cast<std::uint64_t>(i)});
        try {
            CurvatureEstimate est = total_curvature_at(fam, prof.tgrid[i], method, budget,
                                                       ball_radius, stream.next_u64());
            prof.K[i] = est.K;
            prof.absK[i] = est.absK;
            prof.err[i] = est.err;
            prof.flags[i] |= est.flags;
        } catch (const LabError&) {
            prof.flags[i] |= kFlagEmpty;
        }
    });

    for (double v : find_K0(fam, tmin, tmax, ball_radius)) {
        for (int i = 0; i < steps; ++i)
            if (std::abs(prof.tgrid[i] - v) <= h * (1.0 + 1e-9)) prof.flags[i] |= kFlagNearK0;
    }
    return prof;
}

std::pair<double, double> degree_crosscheck(const Family& fam, double c, int directions,
                                            double ball_radius, long long budget,
                                            std::uint64_t seed) {
    if (fam.n() != 2) throw DimensionMismatch("degree_crosscheck requires n = 2");
    const double cell = 2.0 * ball_radius / static_cast<double>(std::max<long long>(budget, 8));
    std::vector<Polyline> curves = trace_level_curve(fam, c, ball_radius, cell);

    // Lifted Gauss-map angle along each polyline: between consecutive
    // vertices the normal direction rotates by less than pi, so the
    // principal-branch increment recovers the continuous lift.
    struct AngleSegment {
        double a, b;
    };
    std::vector<AngleSegment> segments;
    for (const Polyline& pl : curves) {
        const auto& v = pl.vertices;
        std::size_t m = v.size();
        if (m < 2) continue;
        std::vector<double> theta(m);
        for (std::size_t i = 0; i < m; ++i) {
            Eigen::VectorXd g = fam.grad_x(v[i], c);
            theta[i] = std::atan2(g[1], g[0]);
        }
        double lift = theta[0];
        std::size_t count = pl.closed ? m : m - 1;
        for (std::size_t i = 0; i < count; ++i) {
            double next = theta[(i + 1) % m];
            double d = next - theta[i % m];
            while (d > M_PI) d -= 2.0 * M_PI;
            while (d <= -M_PI) d += 2.0 * M_PI;
            segments.push_back({lift, lift + d});
            lift += d;
        }
    }

    // Stratified direction sampling: one uniform draw per arc of S^1, which
    // collapses the variance of the preimage-count average.
    RandomStream stream(seed, {0x64656772ull});
    double signed_total = 0.0, unsigned_total = 0.0;
    const double two_pi = 2.0 * M_PI;
    for (int k = 0; k < directions; ++k) {
        double phi = two_pi * (static_cast<double>(k) + stream.uniform01()) /
                     static_cast<double>(directions);
        long long signed_count = 0, unsigned_count = 0;
        for (const AngleSegment& s : segments) {
            long long cross = static_cast<long long>(std::floor((s.b - phi) / two_pi)) -
                              static_cast<long long>(std::floor((s.a - phi) / two_pi));
            signed_count += cross;
            unsigned_count += std::llabs(cross);
        }
        signed_total += static_cast<double>(signed_count);
        unsigned_total += static_cast<double>(unsigned_count);
    }
    const double inv = two_pi / static_cast<double>(directions);
    return {signed_total * inv, unsigned_total * inv};
}

std::vector<JumpInterval> detect_discontinuities(
    CurvatureProfile& prof, double k_sigma,
    const std::function<CurvatureEstimate(double t)>& recompute_double_budget) {
    const int m = static_cast<int>(prof.tgrid.size());
    std::vector<bool> flagged(std::max(0, m - 1), false);

    unsigned bad = kFlagNearK0 | kFlagEmpty;
    std::vector<double> gaps(std::max(0, m - 1), 0.0);
    std::vector<bool> usable(std::max(0, m - 1), false);
    for (int i = 0; i + 1 < m; ++i) {
        if ((prof.flags[i] & bad) || (prof.flags[i + 1] & bad)) continue;
        gaps[i] = std::abs(prof.absK[i + 1] - prof.absK[i]);
        usable[i] = true;
    }

    // A jump must exceed both the estimator noise and the local modulus of
    // continuity of the profile, estimated from the neighboring gaps.  The
    // second term keeps a near-exact estimator (the tracer) from flagging
    // ordinary smooth variation.
    auto local_allowance = [&](int i) {
        std::vector<double> nb;
        for (int d : {-2, -1, 1, 2}) {
            int j = i + d;
            if (j >= 0 && j + 1 < m && usable[j]) nb.push_back(gaps[j]);
        }
        if (nb.empty()) return 0.0;
        std::sort(nb.begin(), nb.end());
        double med = (nb.size() % 2) ? nb[nb.size() / 2]
                                     : 0.5 * (nb[nb.size() / 2 - 1] + nb[nb.size() / 2]);
        return 3.0 * med;
    };

    for (int i = 0; i + 1 < m; ++i) {
        if (!usable[i]) continue;
        double thr = k_sigma * (prof.err[i] + prof.err[i + 1]) + local_allowance(i) + 1e-12;
        if (gaps[i] <= thr) continue;

        // Re-run confirmation at doubled budget.
        CurvatureEstimate a = recompute_double_budget(prof.tgrid[i]);
        CurvatureEstimate b = recompute_double_budget(prof.tgrid[i + 1]);
        if (a.flags || b.flags) continue;
        double gap2 = std::abs(b.absK - a.absK);
        double thr2 = k_sigma * (a.err + b.err) + local_allowance(i) + 1e-12;
        if (gap2 > thr2) flagged[i] = true;
    }

    std::vector<JumpInterval> merged;
    for (int i = 0; i + 1 < m; ++i) {
        if (!flagged[i]) continue;
        prof.flags[i] |= kFlagDiscontinuityRight;
        prof.flags[i + 1] |= kFlagDiscontinuityLeft;
        if (!merged.empty() && merged.back().right_index == i) {
            merged.back().right_index = i + 1;
            merged.back().t_right = prof.tgrid[i + 1];
        } else {
            merged.push_back({i, i + 1, prof.tgrid[i], prof.tgrid[i + 1]});
        }
    }
    return merged;
}

std::vector<JumpInterval> detect_discontinuities(const Family& fam, CurvatureProfile& prof,
                                                 Method method, long long budget,
                                                 double ball_radius, std::uint64_t seed,
                                                 double k_sigma) {
    auto recompute = [&](double t) {
        RandomStream stream(seed, {0x636f6e66ull});
        std::uint64_t bits;
        std::memcpy(&bits, &t, sizeof(bits));
        return total_curvature_at(fam, t, method, 2 * budget, ball_radius,
                                  stream.derive(bits).next_u64());
    };
    return detect_discontinuities(prof, k_sigma, recompute);
}

}  // namespace lab
