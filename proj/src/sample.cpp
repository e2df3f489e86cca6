#include "lab/sample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "lab/errors.hpp"
#include "lab/parallel.hpp"
#include "lab/rng.hpp"

namespace lab {

std::optional<Point> newton_project(const Family& fam, const Eigen::VectorXd& x0, double c) {
    Eigen::VectorXd x = x0;
    double v = fam.value(x, c);
    for (int iter = 0; iter < 50; ++iter) {
        double scale = fam.value_scale(x, c);
        if (std::abs(v) <= kSurfaceResidualTol * scale) return Point{x, c};
        Eigen::VectorXd g = fam.grad_x(x, c);
        double g2 = g.squaredNorm();
        if (g2 < kSingularGradientTol * kSingularGradientTol) return std::nullopt;
        Eigen::VectorXd step = -(v / g2) * g;
        double lambda = 1.0;
        bool improved = false;
        for (int back = 0; back < 30; ++back) {
            Eigen::VectorXd trial = x + lambda * step;
            double vt = fam.value(trial, c);
            if (std::abs(vt) < std::abs(v)) {
                x = trial;
                v = vt;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) return std::nullopt;
    }
    if (std::abs(v) <= kSurfaceResidualTol * fam.value_scale(x, c)) return Point{x, c};
    return std::nullopt;
}

double Polyline::length() const {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i) len += (vertices[i + 1] - vertices[i]).norm();
    if (closed && vertices.size() > 2) len += (vertices.front() - vertices.back()).norm();
    return len;
}

namespace {

// Spatial hash marking already-traced territory, so each grid seed starts at
// most one component.
class VisitedMask {
public:
    VisitedMask(double cell) : cell_(cell) {}

    void add(const Eigen::Vector2d& p) {
        grid_[key(p)].push_back(p);
    }
    bool near(const Eigen::Vector2d& p, double radius) const {
        long ki = static_cast<long>(std::floor(p.x() / cell_));
        long kj = static_cast<long>(std::floor(p.y() / cell_));
        for (long i = ki - 1; i <= ki + 1; ++i)
            for (long j = kj - 1; j <= kj + 1; ++j) {
                auto it = grid_.find(i * 1000003L + j);
                if (it == grid_.end()) continue;
                for (const Eigen::Vector2d& q : it->second)
                    if ((q - p).norm() <= radius) return true;
            }
        return false;
    }

private:
    long key(const Eigen::Vector2d& p) const {
        return static_cast<long>(std::floor(p.x() / cell_)) * 1000003L +
               static_cast<long>(std::floor(p.y() / cell_));
    }
    double cell_;
    std::map<long, std::vector<Eigen::Vector2d>> grid_;
};

}  // namespace

// Grid sign-change detection provides seeds; each component is then walked
// by tangent continuation (predictor along the rotated level normal, Newton
// corrector) with a curvature-adaptive step, which keeps the connectivity
// right even through bends far sharper than the grid cell.
std::vector<Polyline> trace_level_curve(const Family& fam, double c, double box_radius,
                                        double cell) {
    if (fam.n() != 2) throw DimensionMismatch("trace_level_curve requires n = 2");
    if (cell <= 0.0 || box_radius <= 0.0)
        throw DimensionMismatch("tracer needs positive box and cell");

    const int m = std::max(2, static_cast<int>(std::ceil(2.0 * box_radius / cell)));
    const double h = 2.0 * box_radius / m;

    auto node = [&](int i, int j) {
        return Eigen::Vector2d(-box_radius + i * h, -box_radius + j * h);
    };

    Eigen::MatrixXd val(m + 1, m + 1);
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
            double v = fam.value(node(i, j), c);
            // Exact zeros are pushed to the positive side so every crossing
            // stays attached to a sign change.
            val(i, j) = (v == 0.0) ? 5e-324 : v;
        }

    // Seeds: Newton-refined linear interpolations of every cut grid edge, in
    // deterministic grid order.
    std::vector<Eigen::Vector2d> seeds;
    auto try_seed = [&](int i1, int j1, int i2, int j2) {
        double v1 = val(i1, j1), v2 = val(i2, j2);
        if ((v1 > 0.0) == (v2 > 0.0)) return;
        double s = std::clamp(v1 / (v1 - v2), 0.0, 1.0);
        Eigen::Vector2d p = node(i1, j1) + s * (node(i2, j2) - node(i1, j1));
        if (auto q = newton_project(fam, p, c)) seeds.push_back(q->x);
    };
    for (int j = 0; j <= m; ++j)
        for (int i = 0; i <= m; ++i) {
            if (i < m) try_seed(i, j, i + 1, j);
            if (j < m) try_seed(i, j, i, j + 1);
        }

    const double max_step = 0.75 * h;
    const double min_step = std::max(1e-7 * box_radius, 1e-5 * h);
    const double max_turn = 0.35;  // radians per step
    auto inside = [&](const Eigen::Vector2d& p) {
        return std::abs(p.x()) <= box_radius && std::abs(p.y()) <= box_radius;
    };
    auto tangent = [&](const Eigen::Vector2d& p) -> std::optional<Eigen::Vector2d> {
        Eigen::VectorXd g = fam.grad_x(p, c);
        double gn = g.norm();
        if (gn < kCriticalTol) return std::nullopt;
        return Eigen::Vector2d(-g[1] / gn, g[0] / gn);  // level normal rotated +90deg
    };

    // Marches from p0 along sign * (rotated normal); returns the vertex list
    // and whether the walk closed onto its own start.  The orientation sign
    // is fixed for the whole walk, so a step is only accepted when the
    // canonical tangent field itself rotates by less than the turn budget:
    // jumping across a hairpin onto the anti-parallel strand shows up as a
    // near-pi tangent rotation and gets rejected.
    auto march = [&](const Eigen::Vector2d& p0, double sign, bool& closed) {
        std::vector<Eigen::Vector2d> verts{p0};
        closed = false;
        auto t0 = tangent(p0);
        if (!t0) return verts;
        const Eigen::Vector2d start_tangent = sign * (*t0);
        Eigen::Vector2d p = p0;
        double step = max_step;
        const int max_vertices = 200000;
        while (static_cast<int>(verts.size()) < max_vertices) {
            auto tp = tangent(p);
            if (!tp) break;  // critical point on the level: dead end
            Eigen::Vector2d T = sign * (*tp);

            bool advanced = false;
            while (step >= min_step) {
                auto q = newton_project(fam, p + step * T, c);
                if (q) {
                    Eigen::Vector2d qv = q->x;
                    Eigen::Vector2d delta = qv - p;
                    double len = delta.norm();
                    auto tq = tangent(qv);
                    double chord_turn = std::atan2(T.x() * delta.y() - T.y() * delta.x(),
                                                   T.dot(delta));
                    double tang_turn = 4.0 * max_turn;
                    if (tq) {
                        Eigen::Vector2d Tq = sign * (*tq);
                        tang_turn = std::atan2(T.x() * Tq.y() - T.y() * Tq.x(), T.dot(Tq));
                        if (T.dot(Tq) < 0.0) tang_turn = 4.0 * max_turn;
                    }
                    if (len > 1e-14 && len <= 1.5 * step && std::abs(chord_turn) <= max_turn &&
                        std::abs(tang_turn) <= max_turn) {
                        // Loop closure: back at the start with aligned tangent.
                        if (verts.size() > 3 && (qv - p0).norm() <= 0.9 * std::max(len, step) &&
                            (sign * (*tq)).dot(start_tangent) > 0.0) {
                            closed = true;
                            return verts;
                        }
                        if (!inside(qv)) {
                            // Shorten onto the box edge rather than stepping out.
                            if (step > 4.0 * min_step) {
                                step *= 0.5;
                                continue;
                            }
                            return verts;
                        }
                        verts.push_back(qv);
                        p = qv;
                        advanced = true;
                        if (std::abs(tang_turn) < 0.1 * max_turn)
                            step = std::min(max_step, step * 1.6);
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!advanced) break;
        }
        return verts;
    };

    std::vector<Polyline> out;
    VisitedMask visited(h);
    for (const Eigen::Vector2d& seed : seeds) {
        if (!inside(seed)) continue;
        if (visited.near(seed, 0.9 * h)) continue;

        bool closed_fwd = false, closed_bwd = false;
        std::vector<Eigen::Vector2d> fwd = march(seed, +1.0, closed_fwd);
        Polyline pl;
        if (closed_fwd) {
            pl.closed = true;
            pl.vertices = std::move(fwd);
        } else {
            std::vector<Eigen::Vector2d> bwd = march(seed, -1.0, closed_bwd);
            pl.vertices.assign(bwd.rbegin(), bwd.rend());
            pl.vertices.pop_back();  // seed would repeat
            pl.vertices.insert(pl.vertices.end(), fwd.begin(), fwd.end());
            pl.closed = closed_bwd;  // rare: the backward walk closed first
        }

        std::vector<Eigen::Vector2d> clean;
        for (const Eigen::Vector2d& v : pl.vertices)
            if (clean.empty() || (v - clean.back()).norm() > 1e-12) clean.push_back(v);
        if (pl.closed && clean.size() > 1 && (clean.front() - clean.back()).norm() <= 1e-12)
            clean.pop_back();
        pl.vertices = std::move(clean);
        if (pl.vertices.size() < 2) continue;

        for (const Eigen::Vector2d& v : pl.vertices) visited.add(v);
        out.push_back(std::move(pl));
    }

    // The forward march follows the +90deg rotation of the level normal, so
    // polylines are already canonically oriented; keep a cheap safety net for
    // the reversed-assembly path.
    for (Polyline& pl : out) {
        double best_len = -1.0;
        double cross = 0.0;
        for (std::size_t i = 0; i + 1 < pl.vertices.size(); ++i) {
            Eigen::Vector2d seg = pl.vertices[i + 1] - pl.vertices[i];
            double len = seg.norm();
            if (len <= best_len) continue;
            Eigen::VectorXd g = fam.grad_x(pl.vertices[i], c);
            if (g.norm() < kCriticalTol) continue;
            best_len = len;
            cross = g[0] * seg.y() - g[1] * seg.x();
        }
        if (cross < 0.0) std::reverse(pl.vertices.begin(), pl.vertices.end());
    }
    return out;
}

double SampleBatch::weight_sum() const {
    double s = 0.0;
    for (const WeightedSample& w : samples) s += w.weight;
    return s;
}

double ball_volume(int n, double radius) {
    return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0) * std::pow(radius, n);
}

SampleBatch thin_shell_samples(const Family& fam, double c, double ball_radius,
                               double shell_half_width, long long count, std::uint64_t seed) {
    if (shell_half_width <= 0.0 || count <= 0)
        throw DimensionMismatch("thin_shell_samples needs positive shell width and count");

    const int n = fam.n();
    const double delta = shell_half_width;
    const long long chunk = 4 * count;
    const int max_chunks = 5;  // 20x retry budget in total

    SampleBatch batch;
    batch.ball_radius = ball_radius;
    batch.shell_half_width = delta;
    batch.ball_volume = ball_volume(n, ball_radius);

    std::vector<std::pair<long long, WeightedSample>> found;
    std::mutex found_mutex;
    RandomStream root(seed, {0x7368656c6cull});

    long long used = 0;
    for (int chunk_idx = 0; chunk_idx < max_chunks; ++chunk_idx) {
        const long long begin = chunk_idx * chunk;
        parallel_for(chunk, [&](long long k) {
            const long long index = begin + k;
            RandomStream stream = root.derive(static_cast<std::uint64_t>(index));
            Eigen::VectorXd x = stream.point_in_ball(n, ball_radius);
            double v = fam.value(x, c);
            Eigen::VectorXd gx = fam.grad_x(x, c);
            double gn = gx.norm();
            if (gn < 1e-10) return;  // measure-zero sliver near critical points
            if (std::abs(v) >= delta * gn) return;
            auto projected = newton_project(fam, x, c);
            if (!projected) return;
            if (projected->x.norm() > ball_radius) return;
            try {
                WeightedSample ws;
                ws.sp = surface_point(fam, *projected);
                std::lock_guard<std::mutex> lock(found_mutex);
                found.emplace_back(index, std::move(ws));
            } catch (const LabError&) {
            }
        });
        used = begin + chunk;
        if (static_cast<long long>(found.size()) >= count) break;
    }

    if (found.empty())
        throw EmptyLevelInBall("no shell acceptance inside the ball after the retry budget");

    std::sort(found.begin(), found.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    batch.proposals_used = used;
    const double w = batch.ball_volume / (2.0 * delta * static_cast<double>(used));
    batch.samples.reserve(found.size());
    for (auto& [idx, ws] : found) {
        ws.weight = w;
        batch.samples.push_back(std::move(ws));
    }
    return batch;
}

}  // namespace lab
