#include <doctest.h>

#include <cmath>

#include "lab/errors.hpp"
#include "lab/geom.hpp"
#include "test_util.hpp"

using namespace lab;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}
Eigen::VectorXd vec3(double a, double b, double c) {
    Eigen::VectorXd v(3);
    v << a, b, c;
    return v;
}

Family sphere2() { return Family(parse_polynomial("x1^2 + x2^2 - t", 2)); }
Family linear2() { return Family(parse_polynomial("x1 - t", 2)); }

}  // namespace

TEST_CASE("surface_point: sphere family formulas") {
    Family fam = sphere2();
    SurfacePoint sp = surface_point(fam, {vec2(1, 0), 1.0});
    CHECK(sp.param_gradient[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(sp.param_gradient[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(sp.param_gradient[2] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(sp.param_gradient.norm() == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(!sp.critical);
}

TEST_CASE("surface_point: linear family formulas") {
    Family fam = linear2();
    SurfacePoint sp = surface_point(fam, {vec2(0, 5), 0.0});
    CHECK(sp.normal[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(sp.normal[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(sp.normal[2] == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(sp.param_gradient[0] == doctest::Approx(0.5));
    CHECK(sp.param_gradient[2] == doctest::Approx(0.5));
    CHECK(sp.param_gradient.norm() == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("surface_point: critical point flag at the sphere vertex") {
    Family fam = sphere2();
    SurfacePoint sp = surface_point(fam, {vec2(0, 0), 0.0});
    CHECK(sp.critical);
    CHECK_THROWS_AS(gauss_map(sp), SingularGradient);
    CHECK_THROWS_AS(kronecker_curvature(fam, sp), SingularGradient);
}

TEST_CASE("surface_point: error paths") {
    Family fam = sphere2();
    CHECK_THROWS_AS(surface_point(fam, {vec2(2, 0), 1.0}), NotOnSurface);
    Family bad(parse_polynomial("x1*x2", 2));
    CHECK_THROWS_AS(surface_point(bad, {vec2(0, 0), 0.0}), SingularGradient);
    CHECK_THROWS_AS(surface_point(fam, {vec3(1, 0, 0), 1.0}), DimensionMismatch);
}

TEST_CASE("gauss_map: spec examples") {
    Family fam = sphere2();
    Eigen::VectorXd n1 = gauss_map(surface_point(fam, {vec2(1, 0), 1.0}));
    CHECK(n1[0] == doctest::Approx(1.0));
    CHECK(n1[1] == doctest::Approx(0.0).scale(1.0));
    Eigen::VectorXd n2 = gauss_map(surface_point(fam, {vec2(0, std::sqrt(2.0)), 2.0}));
    CHECK(n2[0] == doctest::Approx(0.0).scale(1.0));
    CHECK(n2[1] == doctest::Approx(1.0));
    Family lin = linear2();
    Eigen::VectorXd n3 = gauss_map(surface_point(lin, {vec2(0.3, -4.0), 0.3}));
    CHECK(n3[0] == doctest::Approx(1.0));
}

TEST_CASE("kronecker_curvature: circle, sphere, hyperplane") {
    Family fam = sphere2();
    CHECK(surface_point(fam, {vec2(1, 0), 1.0}).curvature == doctest::Approx(1.0).epsilon(1e-12));
    double s = 1.0 / std::sqrt(2.0);
    CHECK(surface_point(fam, {vec2(s, s), 1.0}).curvature == doctest::Approx(1.0).epsilon(1e-10));

    Family fam3(parse_polynomial("x1^2 + x2^2 + x3^2 - t", 3));
    double r = 2.0;
    Eigen::VectorXd p = vec3(2.0 / 3, -2.0 / 3, 1.0 / 3) * r;  // |p| = 2
    CHECK(surface_point(fam3, {p, r * r}).curvature == doctest::Approx(0.25).epsilon(1e-10));

    Family lin = linear2();
    CHECK(surface_point(lin, {vec2(0.5, 3.0), 0.5}).curvature ==
          doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("tangent_basis is orthonormal and orthogonal to N") {
    RandomStream rng(5, {9});
    for (int k = 0; k < 50; ++k) {
        int n = 2 + static_cast<int>(rng.uniform01() * 3);
        if (n > 4) n = 4;
        Eigen::VectorXd N = rng.unit_vector(n);
        Eigen::MatrixXd B = tangent_basis(N);
        REQUIRE(B.cols() == n - 1);
        CHECK((B.transpose() * B - Eigen::MatrixXd::Identity(n - 1, n - 1)).norm() < 1e-12);
        CHECK((B.transpose() * N).norm() < 1e-12);
    }
}

TEST_CASE("surface point invariants on random families") {
    RandomStream rng(31337, {4});
    int total = 0;
    for (int famidx = 0; famidx < 20; ++famidx) {
        Point q0;
        Family fam = labtest::random_family(rng, 2 + famidx % 2, 3, &q0);
        auto pts = labtest::random_surface_points(fam, q0, 50, rng);
        for (const SurfacePoint& sp : pts) {
            ++total;
            CHECK(std::abs(sp.normal.norm() - 1.0) < 1e-12);
            CHECK(std::abs(sp.normal.dot(sp.param_gradient)) < 1e-10);
            Eigen::VectorXd g = fam.gradient(sp.p.x, sp.p.t);
            double expected = g.head(fam.n()).norm() / g.norm();
            CHECK(std::abs(sp.param_gradient.norm() - expected) < 1e-10);
            Eigen::VectorXd et = Eigen::VectorXd::Zero(fam.n() + 1);
            et[fam.n()] = 1.0;
            Eigen::VectorXd proj = et - sp.normal[fam.n()] * sp.normal;
            CHECK((sp.param_gradient - proj).norm() < 1e-10);
        }
    }
    CHECK(total >= 900);  // generator must actually produce the sample
}

TEST_CASE("curvature matches the finite-differenced Gauss map at n = 3") {
    RandomStream rng(99, {5});
    const double h = 1e-4;
    int checked = 0;
    for (int famidx = 0; famidx < 12 && checked < 40; ++famidx) {
        Point q0;
        Family fam = labtest::random_family(rng, 3, 3, &q0);
        auto pts = labtest::random_surface_points(fam, q0, 10, rng);
        for (const SurfacePoint& sp : pts) {
            if (sp.critical || std::abs(sp.curvature) < 1e-3) continue;
            Eigen::MatrixXd B = tangent_basis(sp.level_normal);
            Eigen::MatrixXd D(2, 2);
            bool ok = true;
            for (int i = 0; i < 2 && ok; ++i) {
                auto probe = [&](double d) -> std::optional<Eigen::VectorXd> {
                    auto q = newton_project(fam, sp.p.x + d * B.col(i), sp.p.t);
                    if (!q) return std::nullopt;
                    Eigen::VectorXd gx = fam.grad_x(q->x, sp.p.t);
                    if (gx.norm() < kCriticalTol) return std::nullopt;
                    return (gx / gx.norm()).eval();
                };
                auto np = probe(h);
                auto nm = probe(-h);
                if (!np || !nm) {
                    ok = false;
                    break;
                }
                Eigen::VectorXd dN = (*np - *nm) / (2.0 * h);
                for (int j = 0; j < 2; ++j) D(i, j) = dN.dot(B.col(j));
            }
            if (!ok) continue;
            double kappa_fd = D.determinant();
            CHECK(std::abs(kappa_fd - sp.curvature) <=
                  1e-3 * std::max(std::abs(kappa_fd), std::abs(sp.curvature)));
            ++checked;
        }
    }
    CHECK(checked >= 40);
}
