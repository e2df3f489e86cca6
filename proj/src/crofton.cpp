#include "lab/crofton.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "lab/errors.hpp"
#include "lab/geom.hpp"
#include "lab/parallel.hpp"
#include "lab/rng.hpp"
#include "lab/sample.hpp"

namespace lab {

Hyperplane random_hyperplane(int n, std::uint64_t seed, long long index) {
    if (n < 2) throw DimensionMismatch("random_hyperplane needs n >= 2");
    RandomStream stream = RandomStream(seed, {0x68797065ull}).derive(static_cast<std::uint64_t>(index));
    Eigen::VectorXd u = stream.unit_vector(n);
    for (int i = 0; i < n; ++i) {
        if (std::abs(u[i]) > 1e-12) {
            if (u[i] < 0.0) u = -u;
            break;
        }
    }
    return {u};
}

namespace {

double poly_value(const std::vector<double>& coef, double s) {
    double acc = 0.0;
    for (std::size_t i = coef.size(); i-- > 0;) acc = acc * s + coef[i];
    return acc;
}

double poly_derivative_value(const std::vector<double>& coef, double s) {
    double acc = 0.0;
    for (std::size_t i = coef.size(); i-- > 1;) acc = acc * s + coef[i] * static_cast<double>(i);
    return acc;
}

}  // namespace

std::vector<double> isolated_real_roots(const std::vector<double>& coef_in) {
    std::vector<double> coef = coef_in;
    while (coef.size() > 1 && coef.back() == 0.0) coef.pop_back();
    const int deg = static_cast<int>(coef.size()) - 1;
    if (deg <= 0) return {};

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -coef[i] / coef[deg];

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    std::vector<double> roots;
    for (int i = 0; i < deg; ++i) {
        std::complex<double> z = solver.eigenvalues()[i];
        if (std::abs(z.imag()) > 1e-8 * (1.0 + std::abs(z.real()))) continue;
        double r = z.real();
        for (int it = 0; it < 3; ++it) {
            double d = poly_derivative_value(coef, r);
            if (std::abs(d) < 1e-300) break;
            r -= poly_value(coef, r) / d;
        }
        roots.push_back(r);
    }
    std::sort(roots.begin(), roots.end());

    // Simplicity: reject clustered roots and roots with a degenerate slope.
    for (std::size_t i = 0; i < roots.size(); ++i) {
        double r = roots[i];
        if (i + 1 < roots.size() && roots[i + 1] - r <= 1e-8 * (1.0 + std::abs(r)))
            throw RootIsolationFailure("clustered real roots (tangent section)");
        double dmag = 0.0;
        for (std::size_t k = 1; k < coef.size(); ++k)
            dmag += static_cast<double>(k) * std::abs(coef[k]) * std::pow(std::abs(r), k - 1.0);
        if (std::abs(poly_derivative_value(coef, r)) <= 1e-7 * std::max(1.0, dmag))
            throw RootIsolationFailure("degenerate root slope (tangent section)");
    }
    return roots;
}

namespace {

int euler_section_line(const Polynomial& f, double t, const Hyperplane& H) {
    Eigen::Vector2d d(-H.normal[1], H.normal[0]);  // line direction
    std::vector<double> coef = restrict_to_line(f, d, 0.0);
    coef[0] -= t;

    bool nonconstant = false;
    for (std::size_t i = 1; i < coef.size(); ++i)
        if (coef[i] != 0.0) nonconstant = true;
    if (!nonconstant) {
        double mag = std::abs(coef[0]);
        if (mag <= 1e-12) throw RootIsolationFailure("level meets the whole line");
        // chi of a full line is 1 on whichever side the constant lands.
        return (coef[0] > 0.0) ? 1 : -1;
    }

    std::vector<double> roots = isolated_real_roots(coef);
    int deg = static_cast<int>(coef.size()) - 1;
    double lead = coef[deg];
    if (roots.empty()) {
        // No sign change anywhere: decide by the value at 0 (sign constant).
        double v = poly_value(coef, 0.0);
        if (std::abs(v) <= 1e-300) throw RootIsolationFailure("ambiguous signless section");
        return (v > 0.0) ? 1 : -1;
    }
    // Simple roots alternate signs, so interval j (counted from the
    // rightmost ray) has sign sign_right * (-1)^j.  Each closed ray or
    // segment contributes chi = 1 to its side.
    int k = static_cast<int>(roots.size());
    int sign_right = (lead > 0.0) ? 1 : -1;
    (void)deg;
    int pos = 0, neg = 0;
    for (int j = 0; j <= k; ++j) {
        int sj = ((j % 2) == 0) ? sign_right : -sign_right;
        (sj > 0 ? pos : neg) += 1;
    }
    return pos - neg;
}

int euler_section_plane(const Polynomial& f, double t, const Hyperplane& H, double box_radius) {
    Eigen::MatrixXd B = tangent_basis(H.normal);  // 3 x 2, orthonormal
    Polynomial g = substitute_linear(f, B, 2);

    // Section family G(y, tau) = g(y) - tau, traced at level t.
    Term tau;
    tau.coef = -1.0;
    tau.exps = {0, 0, 1};
    Polynomial G = g + Polynomial(2, {tau});
    Family section(G);

    const double cell = box_radius / 100.0;
    std::vector<Polyline> curves = trace_level_curve(section, t, box_radius, cell);

    int chi = 0;
    for (const Polyline& pl : curves) {
        for (const Eigen::Vector2d& v : pl.vertices) {
            if (section.grad_x(v, t).norm() < 1e-6)
                throw RootIsolationFailure("near-singular section curve");
        }
        if (!pl.closed) chi += 1;
    }
    return chi;
}

}  // namespace

int euler_of_section(const Polynomial& f, double t, const Hyperplane& H, double box_radius) {
    if (f.depends_on_t()) throw DimensionMismatch("euler_of_section input must not depend on t");
    if (f.nvars() == 2) return euler_section_line(f, t, H);
    if (f.nvars() == 3) return euler_section_plane(f, t, H, box_radius);
    throw DimensionMismatch("euler_of_section supports n in {2, 3}");
}

EulerAverages average_euler(const Polynomial& f, const std::vector<double>& tgrid,
                            long long draws, double box_radius, std::uint64_t seed) {
    EulerAverages out;
    out.tgrid = tgrid;
    const std::size_t m = tgrid.size();
    out.mean.assign(m, 0.0);
    out.stderr_of_mean.assign(m, 0.0);

    const int max_attempts = 10;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(draws));
    std::vector<int> row_failures(static_cast<std::size_t>(draws), 0);
    std::vector<char> row_ok(static_cast<std::size_t>(draws), 0);

    parallel_for(draws, [&](long long k) {
        std::vector<double> row(m, 0.0);
        for (int attempt = 0; attempt < max_attempts; ++attempt) {
            Hyperplane H = random_hyperplane(f.nvars(), seed, k * max_attempts + attempt);
            bool good = true;
            for (std::size_t j = 0; j < m && good; ++j) {
                try {
                    row[j] = static_cast<double>(euler_of_section(f, tgrid[j], H, box_radius));
                } catch (const RootIsolationFailure&) {
                    good = false;
                }
            }
            if (good) {
                rows[k] = row;
                row_ok[k] = 1;
                row_failures[k] = attempt;
                return;
            }
        }
        row_failures[k] = max_attempts;
    });

    long long used = 0;
    for (long long k = 0; k < draws; ++k) {
        out.failures += row_failures[k];
        if (!row_ok[k]) continue;
        ++used;
        for (std::size_t j = 0; j < m; ++j) out.mean[j] += rows[k][j];
    }
    out.draws_used = used;
    if (used == 0) return out;
    for (std::size_t j = 0; j < m; ++j) out.mean[j] /= static_cast<double>(used);
    if (used > 1) {
        for (std::size_t j = 0; j < m; ++j) {
            double ss = 0.0;
            for (long long k = 0; k < draws; ++k) {
                if (!row_ok[k]) continue;
                double d = rows[k][j] - out.mean[j];
                ss += d * d;
            }
            out.stderr_of_mean[j] =
                std::sqrt(ss / (static_cast<double>(used) * (static_cast<double>(used) - 1.0)));
        }
    }
    return out;
}

}  // namespace lab
