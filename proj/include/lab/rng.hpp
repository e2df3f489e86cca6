#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include <Eigen/Dense>

namespace lab {

// Counter-based pseudorandom stream (splitmix64 output function applied to
// key + counter).  Streams derived from the same seed but different path
// indices are statistically independent, which is what the deterministic
// parallel sampling contract relies on: stream identity depends only on
// (seed, path), never on thread or worker id.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {})
        : key_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {
        for (std::uint64_t p : path) key_ = mix(key_ ^ mix(p + 0xbf58476d1ce4e5b9ull));
    }

    RandomStream derive(std::uint64_t index) const {
        RandomStream s(*this);
        s.key_ = mix(key_ ^ mix(index + 0x94d049bb133111ebull));
        s.counter_ = 0;
        return s;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = key_ + (++counter_) * 0x9e3779b97f4a7c15ull;
        return mix(z);
    }

    // Uniform in [0,1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    Eigen::VectorXd unit_vector(int n) {
        Eigen::VectorXd v(n);
        double norm = 0.0;
        do {
            for (int i = 0; i < n; ++i) v[i] = normal();
            norm = v.norm();
        } while (norm < 1e-8);
        return v / norm;
    }

    // Uniform in the closed ball of radius R centered at the origin.
    Eigen::VectorXd point_in_ball(int n, double radius) {
        Eigen::VectorXd v = unit_vector(n);
        double r = radius * std::pow(uniform01(), 1.0 / n);
        return r * v;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace lab
