#include <doctest.h>

#include <cmath>

#include "lab/errors.hpp"
#include "lab/poly.hpp"
#include "test_util.hpp"

using namespace lab;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("parse: exponent tuples of a mixed polynomial") {
    Polynomial p = parse_polynomial("x1^2*x2 + x1 - t", 2);
    REQUIRE(p.terms().size() == 3);
    CHECK(p.terms()[0].exps == std::vector<int>{2, 1, 0});
    CHECK(p.terms()[1].exps == std::vector<int>{1, 0, 0});
    CHECK(p.terms()[2].exps == std::vector<int>{0, 0, 1});
    CHECK(p.terms()[2].coef == -1.0);
}

TEST_CASE("parse: cancellation yields the zero polynomial") {
    Polynomial p = parse_polynomial("0*x1 + x1 - x1", 1);
    CHECK(p.is_zero());
    CHECK(p.str() == "0");
}

TEST_CASE("parse: variable index out of range") {
    CHECK_THROWS_AS(parse_polynomial("x3", 2), ParseError);
    CHECK_THROWS_AS(parse_polynomial("x0 + 1", 2), ParseError);
    try {
        parse_polynomial("x1 + x3", 2);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 5);
    }
}

TEST_CASE("parse: syntax errors carry a position") {
    CHECK_THROWS_AS(parse_polynomial("x1 + ", 2), ParseError);
    CHECK_THROWS_AS(parse_polynomial("x1 ^ x2", 2), ParseError);
    CHECK_THROWS_AS(parse_polynomial("(x1 + t", 2), ParseError);
    CHECK_THROWS_AS(parse_polynomial("x1 x2", 2), ParseError);
}

TEST_CASE("eval: spec examples") {
    Polynomial p = parse_polynomial("x1^2*x2 + x1 - t", 2);
    CHECK(p.eval(vec2(2, 1), 3.0) == doctest::Approx(3.0));
    Polynomial zero(2);
    CHECK(zero.eval(vec2(7, -3), 11.0) == 0.0);
    Polynomial sphere = parse_polynomial("x1^2 + x2^2 - t", 2);
    CHECK(sphere.eval(vec2(1, 0), 1.0) == doctest::Approx(0.0));
}

TEST_CASE("grad: formal differentiation") {
    Polynomial p = parse_polynomial("x1^2*x2 + x1 - t", 2);
    CHECK(p.derivative(0) == parse_polynomial("2*x1*x2 + 1", 2));
    CHECK(p.derivative(1) == parse_polynomial("x1^2", 2));
    CHECK(p.derivative(2) == parse_polynomial("0 - 1", 2));

    Polynomial constant = parse_polynomial("4.5", 2);
    for (int v = 0; v <= 2; ++v) CHECK(constant.derivative(v).is_zero());

    Polynomial sphere = parse_polynomial("x1^2 + x2^2 - t", 2);
    CHECK(sphere.derivative(0) == parse_polynomial("2*x1", 2));
    CHECK(sphere.derivative(1) == parse_polynomial("2*x2", 2));
}

TEST_CASE("hessian: exact symmetry and spec examples") {
    Family sphere(parse_polynomial("x1^2 + x2^2 - t", 2));
    Eigen::MatrixXd H = sphere.hessian(vec2(0.3, -0.7), 2.0);
    CHECK(H(0, 0) == 2.0);
    CHECK(H(1, 1) == 2.0);
    CHECK(H(2, 2) == 0.0);
    CHECK(H(0, 1) == 0.0);

    Polynomial xy = parse_polynomial("x1*x2", 2);
    Family fxy(xy);
    Eigen::MatrixXd Hxy = fxy.hessian(vec2(5, 9), 0.0);
    CHECK(Hxy(0, 1) == 1.0);
    CHECK(Hxy(1, 0) == 1.0);
    CHECK(Hxy(0, 0) == 0.0);

    Polynomial lin = parse_polynomial("3*x1 - 2*x2 + t", 2);
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j) CHECK(lin.derivative(i).derivative(j).is_zero());

    // Term-level symmetry of mixed partials.
    RandomStream rng(2024, {1});
    for (int k = 0; k < 20; ++k) {
        Polynomial p = labtest::random_polynomial(rng, 3, 4, 8, 10.0);
        for (int i = 0; i <= 3; ++i)
            for (int j = i + 1; j <= 3; ++j)
                CHECK(p.derivative(i).derivative(j) == p.derivative(j).derivative(i));
    }
}

TEST_CASE("print/parse round-trip on normalized polynomials") {
    RandomStream rng(77, {2});
    for (int k = 0; k < 60; ++k) {
        int nvars = 1 + static_cast<int>(rng.uniform01() * 3);
        if (nvars > 3) nvars = 3;
        Polynomial p = labtest::random_polynomial(rng, nvars, 4, 7, 10.0);
        Polynomial q = parse_polynomial(p.str(), nvars);
        CHECK(q == p);
    }
}

TEST_CASE("grad and hessian agree with central finite differences") {
    RandomStream rng(1234, {3});
    const double h = 1e-5;
    int points = 0;
    while (points < 1000) {
        int nvars = 2 + static_cast<int>(rng.uniform01() * 2);
        if (nvars > 3) nvars = 3;
        Polynomial p = labtest::random_polynomial(rng, nvars, 4, 6, 10.0);
        Family fam(p);
        for (int s = 0; s < 25 && points < 1000; ++s, ++points) {
            Eigen::VectorXd x(nvars);
            for (int i = 0; i < nvars; ++i) x[i] = rng.uniform(-1.5, 1.5);
            double t = rng.uniform(-1.5, 1.5);

            Eigen::VectorXd g = fam.gradient(x, t);
            Eigen::MatrixXd H = fam.hessian(x, t);
            for (int v = 0; v <= nvars; ++v) {
                auto shift = [&](double d) {
                    Eigen::VectorXd xs = x;
                    double ts = t;
                    if (v < nvars)
                        xs[v] += d;
                    else
                        ts += d;
                    return p.eval(xs, ts);
                };
                double fd = (shift(h) - shift(-h)) / (2.0 * h);
                CHECK(g[v] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));

                for (int w = 0; w <= nvars; ++w) {
                    auto gshift = [&](double d) {
                        Eigen::VectorXd xs = x;
                        double ts = t;
                        if (w < nvars)
                            xs[w] += d;
                        else
                            ts += d;
                        return fam.F().derivative(v).eval(xs, ts);
                    };
                    double fd2 = (gshift(h) - gshift(-h)) / (2.0 * h);
                    CHECK(H(v, w) == doctest::Approx(fd2).epsilon(1e-6).scale(1.0));
                }
            }
        }
    }
}

TEST_CASE("linear substitution and line restriction") {
    Polynomial f = parse_polynomial("x1^2 + x2^2 + x3^2", 3);
    Eigen::MatrixXd B(3, 2);
    B << 1, 0, 0, 1, 0, 0;  // (y1, y2) -> (y1, y2, 0)
    Polynomial g = substitute_linear(f, B, 2);
    CHECK(g == parse_polynomial("x1^2 + x2^2", 2));

    Polynomial fb = parse_polynomial("x1 + x1^2*x2", 2);
    Eigen::VectorXd d(2);
    d << 0.5, 2.0;
    std::vector<double> coef = restrict_to_line(fb, d, 0.0);
    REQUIRE(coef.size() == 4);
    CHECK(coef[0] == 0.0);
    CHECK(coef[1] == doctest::Approx(0.5));
    CHECK(coef[2] == 0.0);
    CHECK(coef[3] == doctest::Approx(0.5));  // 0.25 * 2
}
