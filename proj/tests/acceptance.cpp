// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one [PASS]/[FAIL] line per criterion.  Exit code = number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lab/asym.hpp"
#include "lab/builtins.hpp"
#include "lab/config.hpp"
#include "lab/crofton.hpp"
#include "lab/curv.hpp"
#include "lab/errors.hpp"
#include "lab/flow.hpp"
#include "lab/parallel.hpp"
#include "lab/runner.hpp"
#include "lab/sample.hpp"
#include "test_util.hpp"

using namespace lab;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail += "    failed: " + what + "\n";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool agree_rel(double a, double b, double rel, double abs_floor = 1e-6) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

// --------------------------------------------------------------------------

Check criterion1_circle_profile() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    Family fam = make_builtin("sphere2");
    CurvatureProfile prof = profile(fam, 0.5, 4.0, 30, Method::tracer, 400, 3.0, 42);
    auto jumps = detect_discontinuities(fam, prof, Method::tracer, 400, 3.0, 42, 5.0);
    double elapsed = seconds_since(t0);

    for (int i = 0; i < 30; ++i) {
        c.require(std::abs(prof.absK[i] - 2.0 * M_PI) <= 0.02 * 2.0 * M_PI,
                  "absK within 2% of 2pi at t=" + std::to_string(prof.tgrid[i]));
        c.require(std::abs(prof.K[i] - 2.0 * M_PI) <= 0.02 * 2.0 * M_PI,
                  "K within 2% of 2pi at t=" + std::to_string(prof.tgrid[i]));
        c.require((prof.flags[i] & (kFlagDiscontinuityLeft | kFlagDiscontinuityRight)) == 0,
                  "no discontinuity flag at t=" + std::to_string(prof.tgrid[i]));
    }
    c.require(jumps.empty(), "no flagged jump intervals");
    c.require(elapsed < 10.0, "runtime < 10 s (got " + std::to_string(elapsed) + ")");
    c.detail += "    max |absK - 2pi| over grid: " +
                std::to_string([&] {
                    double w = 0;
                    for (double v : prof.absK) w = std::max(w, std::abs(v - 2 * M_PI));
                    return w;
                }()) +
                ", runtime " + std::to_string(elapsed) + " s\n";
    return c;
}

Check criterion2_gradient_identities() {
    Check c;
    RandomStream rng(20240601, {0xa});
    int points = 0;
    double worst = 0.0;
    for (int famidx = 0; famidx < 20; ++famidx) {
        Point q0;
        Family fam = labtest::random_family(rng, 2 + famidx % 2, 3, &q0);
        auto pts = labtest::random_surface_points(fam, q0, 50, rng);
        for (const SurfacePoint& sp : pts) {
            ++points;
            double e1 = std::abs(sp.normal.dot(sp.param_gradient));
            Eigen::VectorXd g = fam.gradient(sp.p.x, sp.p.t);
            double e2 =
                std::abs(sp.param_gradient.norm() - g.head(fam.n()).norm() / g.norm());
            Eigen::VectorXd et = Eigen::VectorXd::Zero(fam.n() + 1);
            et[fam.n()] = 1.0;
            double e3 = (sp.param_gradient - (et - sp.normal[fam.n()] * sp.normal)).norm();
            worst = std::max({worst, e1, e2, e3});
            c.require(e1 <= 1e-10, "normal orthogonal to param gradient");
            c.require(e2 <= 1e-10, "|grad t_M| = |d_x F| / |grad F|");
            c.require(e3 <= 1e-10, "grad t_M = tangential projection of e_t");
        }
        if (points >= 1000) break;
    }
    c.require(points >= 1000, "1000 projected points collected (got " +
                                  std::to_string(points) + ")");
    c.detail += "    points: " + std::to_string(points) +
                ", worst identity residual: " + std::to_string(worst) + "\n";
    return c;
}

Check criterion3_curvature_vs_fd() {
    Check c;
    RandomStream rng(424242, {0xb});
    const double h = 1e-4;
    int checked = 0;
    double worst_rel = 0.0;
    for (int famidx = 0; famidx < 40 && checked < 200; ++famidx) {
        Point q0;
        Family fam = labtest::random_family(rng, 3, 3, &q0);
        auto pts = labtest::random_surface_points(fam, q0, 20, rng);
        for (const SurfacePoint& sp : pts) {
            if (checked >= 200) break;
            if (sp.critical || std::abs(sp.curvature) < 1e-3) continue;
            Eigen::MatrixXd B = tangent_basis(sp.level_normal);
            Eigen::MatrixXd D(2, 2);
            bool ok = true;
            for (int i = 0; i < 2 && ok; ++i) {
                auto N_at = [&](double d) -> std::optional<Eigen::VectorXd> {
                    auto q = newton_project(fam, sp.p.x + d * B.col(i), sp.p.t);
                    if (!q) return std::nullopt;
                    Eigen::VectorXd gx = fam.grad_x(q->x, sp.p.t);
                    if (gx.norm() < kCriticalTol) return std::nullopt;
                    return (gx / gx.norm()).eval();
                };
                auto np = N_at(h), nm = N_at(-h);
                if (!np || !nm) {
                    ok = false;
                    break;
                }
                Eigen::VectorXd dN = (*np - *nm) / (2.0 * h);
                for (int j = 0; j < 2; ++j) D(i, j) = dN.dot(B.col(j));
            }
            if (!ok) continue;
            double kfd = D.determinant();
            double rel = std::abs(kfd - sp.curvature) /
                         std::max(std::abs(kfd), std::abs(sp.curvature));
            worst_rel = std::max(worst_rel, rel);
            c.require(rel <= 1e-3, "relative agreement 1e-3 (got " + std::to_string(rel) + ")");
            ++checked;
        }
    }
    c.require(checked >= 200, "200 points checked (got " + std::to_string(checked) + ")");
    c.detail += "    points: " + std::to_string(checked) +
                ", worst relative deviation: " + std::to_string(worst_rel) + "\n";
    return c;
}

Check criterion4_change_of_variables() {
    Check c;
    struct Case {
        const char* name;
        std::vector<double> values;
        double ball;
        long long budget;
    };
    std::vector<Case> cases = {{"sphere2", {0.5, 1.0, 4.0}, 3.0, 400},
                               {"linear", {-1.0, 0.0, 2.0}, 5.0, 400},
                               {"broughton", {0.5, 1.0, 1.5}, 50.0, 1500}};
    for (const Case& cs : cases) {
        Family fam = make_builtin(cs.name);
        for (double v : cs.values) {
            CurvatureEstimate est =
                total_curvature_at(fam, v, Method::tracer, cs.budget, cs.ball, 3);
            auto [kd, ad] = degree_crosscheck(fam, v, 1024, cs.ball, cs.budget, 3);
            c.require(agree_rel(kd, est.K, 0.03),
                      std::string(cs.name) + " K at c=" + std::to_string(v) + " (deg " +
                          std::to_string(kd) + " vs int " + std::to_string(est.K) + ")");
            c.require(agree_rel(ad, est.absK, 0.03),
                      std::string(cs.name) + " absK at c=" + std::to_string(v) + " (deg " +
                          std::to_string(ad) + " vs int " + std::to_string(est.absK) + ")");
        }
    }
    return c;
}

Check criterion5_broughton_acv() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    Family fam = make_builtin("broughton");
    AcvReport at0 = malgrange_profile(fam, 0.0, 0.1, {10, 30, 100, 300, 1000}, 1500, 7);
    AcvReport at1 = malgrange_profile(fam, 1.0, 0.1, {10, 30, 100}, 1500, 7);
    double elapsed = seconds_since(t0);

    c.require(at0.fitted_slope <= -0.8,
              "fitted slope <= -0.8 at c=0 (got " + std::to_string(at0.fitted_slope) + ")");
    c.require(at0.classification == AcvClass::acv_with_exponent,
              "classification acv_with_exponent at c=0 (got " +
                  to_string(at0.classification) + ")");
    for (std::size_t i = 0; i < at0.radii.size(); ++i)
        c.require(at0.mu0[i] <= std::sqrt(5.0) / (4.0 * at0.radii[i]) * 1.02,
                  "mu0 below the explicit-path envelope C/R at R=" +
                      std::to_string(at0.radii[i]));
    c.require(at1.classification == AcvClass::malgrange_holds,
              "classification malgrange_holds at c=1 (got " + to_string(at1.classification) +
                  ")");
    double min_mu = 1e300;
    for (double v : at1.mu0) min_mu = std::min(min_mu, v);
    c.require(min_mu > 1.0, "mu0 bounded below at c=1 (min " + std::to_string(min_mu) + ")");
    c.require(elapsed < 60.0, "runtime < 60 s (got " + std::to_string(elapsed) + ")");
    c.detail += "    slope(c=0) = " + std::to_string(at0.fitted_slope) + ", min mu0(c=1) = " +
                std::to_string(min_mu) + ", runtime " + std::to_string(elapsed) + " s\n";
    return c;
}

Check criterion6_sphericalness_hierarchy() {
    Check c;
    std::vector<double> radii = {10, 30, 100};

    // Built-in corpus.
    struct Named {
        const char* name;
        double value;
    };
    for (const Named& nm : std::vector<Named>{{"sphere2", 1.0},
                                              {"sphere3", 1.0},
                                              {"linear", 0.0},
                                              {"plane3", 0.0},
                                              {"broughton", 1.0}}) {
        Family fam = make_builtin(nm.name);
        AcvReport acv = malgrange_profile(fam, nm.value, 0.1, radii, 400, 31);
        if (acv.classification == AcvClass::malgrange_holds) {
            SphericalnessReport sph =
                sphericalness_report(fam, nm.value, 0.1, radii, 400, 31);
            c.require(sph.verdict != SphVerdict::not_spherical,
                      std::string(nm.name) + ": malgrange_holds must not be not_spherical");
        }
    }

    // 20 random quadratic families.
    RandomStream rng(5151, {0xc});
    int tested = 0, holds = 0;
    while (tested < 20) {
        Point q0;
        Family fam = labtest::random_family(rng, 2, 2, &q0);
        double value = q0.t;
        bool near_crit = false;
        for (double v : find_K0(fam, value - 0.3, value + 0.3, 5.0))
            if (std::abs(v - value) < 0.05) near_crit = true;
        if (near_crit) continue;
        ++tested;
        AcvReport acv = malgrange_profile(fam, value, 0.1, radii, 300, 61 + tested);
        if (acv.classification != AcvClass::malgrange_holds) continue;
        ++holds;
        SphericalnessReport sph =
            sphericalness_report(fam, value, 0.1, radii, 300, 61 + tested);
        c.require(sph.verdict != SphVerdict::not_spherical,
                  "random quadratic " + std::to_string(tested) +
                      ": malgrange_holds must not be not_spherical");
    }

    Family broughton = make_builtin("broughton");
    SphericalnessReport b0 =
        sphericalness_report(broughton, 0.0, 0.1, {10, 30, 100, 300, 1000}, 1200, 11);
    c.require(b0.defect >= 0.9, "Broughton c=0 defect >= 0.9 (got " +
                                    std::to_string(b0.defect) + ")");
    c.require(b0.verdict == SphVerdict::not_spherical,
              "Broughton c=0 verdict not_spherical (got " + to_string(b0.verdict) + ")");

    Family linear = make_builtin("linear");
    SphericalnessReport l0 = sphericalness_report(linear, 0.0, 0.1, radii, 400, 11);
    c.require(l0.defect <= 0.1,
              "linear defect <= 0.1 (got " + std::to_string(l0.defect) + ")");
    c.require(l0.verdict == SphVerdict::spherical,
              "linear verdict spherical (got " + to_string(l0.verdict) + ")");

    c.detail += "    random quadratics tested: " + std::to_string(tested) +
                ", with malgrange_holds: " + std::to_string(holds) +
                "; broughton c=0 defect " + std::to_string(b0.defect) + "\n";
    return c;
}

Check criterion7_flow_contract() {
    Check c;
    Family fam = make_builtin("sphere2");
    SurfacePoint start = surface_point(fam, {vec2(1, 0), 1.0});
    FlowTrajectory traj = transport(fam, start, 0.21, 1e-8);
    c.require(traj.ok(), "transport completed");
    if (traj.ok()) {
        const FlowStep& end = traj.back();
        double pos_err = std::hypot(end.p.x[0] - 1.1, end.p.x[1]);
        c.require(pos_err <= 1e-5 && std::abs(end.p.t - 1.21) <= 1e-5,
                  "endpoint within 1e-5 of ((1.1,0),1.21)");

        double clock_err = 0.0;
        double A = 1e300;
        for (const FlowStep& st : traj.steps) {
            clock_err = std::max(clock_err, std::abs(st.level - (1.0 + st.s)));
            SurfacePoint sp = surface_point(fam, st.p);
            A = std::min(A, st.radius * sp.param_gradient.norm());
        }
        c.require(clock_err <= 1e-6,
                  "level-clock error <= 1e-6 (got " + std::to_string(clock_err) + ")");
        c.require(A > 0, "measured A positive");
        c.require(gronwall_check(traj, A), "gronwall bound with measured A");
        c.detail += "    endpoint error " + std::to_string(pos_err) + ", clock error " +
                    std::to_string(clock_err) + ", A " + std::to_string(A) + "\n";
    }
    return c;
}

Check criterion8_discontinuity_localization() {
    Check c;
    Family fam = make_builtin("broughton");
    CurvatureProfile prof = profile(fam, -1.0, 1.0, 41, Method::tracer, 500, 10.0, 42);
    auto jumps = detect_discontinuities(fam, prof, Method::tracer, 500, 10.0, 42, 5.0);
    c.require(jumps.size() == 1,
              "exactly one flagged interval (got " + std::to_string(jumps.size()) + ")");
    if (jumps.size() == 1) {
        c.require(jumps[0].t_left <= 0.0 && jumps[0].t_right >= 0.0,
                  "flagged interval contains 0 ([" + std::to_string(jumps[0].t_left) + "," +
                      std::to_string(jumps[0].t_right) + "])");
        c.detail += "    flagged [" + std::to_string(jumps[0].t_left) + ", " +
                    std::to_string(jumps[0].t_right) + "]\n";
    }

    CurvatureProfile smooth = profile(fam, 0.5, 1.5, 21, Method::tracer, 500, 10.0, 42);
    auto none = detect_discontinuities(fam, smooth, Method::tracer, 500, 10.0, 42, 5.0);
    c.require(none.empty(), "no flags on [0.5, 1.5] (got " + std::to_string(none.size()) + ")");
    return c;
}

Check criterion9_crofton_continuity() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();

    Polynomial f2 = parse_polynomial("x1^2 + x2^2", 2);
    for (int k = 0; k < 200; ++k) {
        Hyperplane H = random_hyperplane(2, 900 + k, k);
        if (euler_of_section(f2, 0.5 + (k % 3) * 0.5, H, 3.0) != 1) {
            c.require(false, "sphere2 euler == 1 per draw");
            break;
        }
    }
    EulerAverages a2 = average_euler(f2, {0.5, 1.0, 2.0}, 200, 3.0, 17);
    for (double m : a2.mean) c.require(m == 1.0, "sphere2 average exactly 1.0");

    Polynomial f3 = parse_polynomial("x1^2 + x2^2 + x3^2", 3);
    EulerAverages a3 = average_euler(f3, {0.5, 1.0, 2.0}, 40, 2.0, 17);
    for (double m : a3.mean) c.require(m == 0.0, "sphere3 average exactly 0.0");

    Polynomial fb = parse_polynomial("x1 + x1^2*x2", 2);
    std::vector<double> tgrid(21);
    for (int i = 0; i < 21; ++i) tgrid[i] = 0.5 + i * 0.05;
    EulerAverages ab = average_euler(fb, tgrid, 10000, 10.0, 23);
    c.require(ab.draws_used == 10000, "all common-random-number draws usable");
    for (std::size_t i = 0; i + 1 < ab.mean.size(); ++i) {
        double bar = 3.0 * (ab.stderr_of_mean[i] + ab.stderr_of_mean[i + 1]) + 1e-12;
        c.require(std::abs(ab.mean[i + 1] - ab.mean[i]) <= bar,
                  "adjacent Broughton averages within 3 standard errors at t=" +
                      std::to_string(tgrid[i]));
    }
    double elapsed = seconds_since(t0);
    c.require(elapsed < 120.0, "runtime < 2 min (got " + std::to_string(elapsed) + ")");
    c.detail += "    runtime " + std::to_string(elapsed) + " s\n";
    return c;
}

Check criterion10_determinism() {
    Check c;
    struct Job {
        const char* text;
        std::vector<const char*> artifacts;
    };
    std::vector<Job> jobs = {
        {"family = sphere2\ncommand = profile\ntmin = 0.5\ntmax = 4\nsteps = 8\n"
         "method = thin_shell\nbudget = 20000\nball_radius = 3\nseed = 42\n",
         {"profile.csv", "jumps.csv"}},
        {"family = broughton\ncommand = acv\nc = 0\nepsilon = 0.1\nradii = 10,30,100\n"
         "budget = 400\nseed = 7\n",
         {"acv_report.json"}},
        {"family = sphere2\ncommand = crofton\ntmin = 0.5\ntmax = 2\nsteps = 5\n"
         "draws = 500\nball_radius = 3\nseed = 9\n",
         {"crofton.csv"}},
    };
    int idx = 0;
    for (const Job& job : jobs) {
        ++idx;
        ExperimentConfig cfg = parse_config_text(job.text);
        cfg.out_dir = "/tmp/gklab_acc_w1_" + std::to_string(idx);
        cfg.workers = 1;
        std::filesystem::remove_all(cfg.out_dir);
        run_experiment(cfg);

        ExperimentConfig cfg4 = parse_config_text(job.text);
        cfg4.out_dir = "/tmp/gklab_acc_w4_" + std::to_string(idx);
        cfg4.workers = 4;
        std::filesystem::remove_all(cfg4.out_dir);
        run_experiment(cfg4);

        for (const char* name : job.artifacts) {
            std::string a = slurp(cfg.out_dir + "/" + name);
            std::string b = slurp(cfg4.out_dir + "/" + name);
            c.require(!a.empty(), std::string(name) + " produced");
            c.require(a == b, std::string(name) + " byte-identical across worker counts");
        }
    }
    set_worker_count(1);
    return c;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Check()> run;
    };
    std::vector<Criterion> criteria = {
        {"1. circle-family curvature profile (tracer, 2% of 2pi, <10s)",
         criterion1_circle_profile},
        {"2. gradient identities on 1000 random surface points (1e-10)",
         criterion2_gradient_identities},
        {"3. curvature vs finite-differenced Gauss map (n=3, rel 1e-3)",
         criterion3_curvature_vs_fd},
        {"4. change-of-variables cross-check (3% on three families)",
         criterion4_change_of_variables},
        {"5. Broughton asymptotic critical value detection (<60s)",
         criterion5_broughton_acv},
        {"6. sphericalness hierarchy (builtins + 20 random quadratics)",
         criterion6_sphericalness_hierarchy},
        {"7. flow contract (endpoint 1e-5, clock 1e-6, Gronwall)",
         criterion7_flow_contract},
        {"8. discontinuity localization (Broughton jump at 0 only)",
         criterion8_discontinuity_localization},
        {"9. Crofton continuity (exact radial cases, CRN averages, <2min)",
         criterion9_crofton_continuity},
        {"10. determinism across worker counts (byte-identical artifacts)",
         criterion10_determinism},
    };

    int failures = 0;
    for (const Criterion& cr : criteria) {
        Check res;
        try {
            res = cr.run();
        } catch (const std::exception& e) {
            res.ok = false;
            res.detail += std::string("    exception: ") + e.what() + "\n";
        }
        std::printf("[%s] %s\n", res.ok ? "PASS" : "FAIL", cr.name);
        if (!res.detail.empty()) std::fputs(res.detail.c_str(), stdout);
        if (!res.ok) ++failures;
    }
    std::printf("%d/%zu acceptance criteria passed\n",
                static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
