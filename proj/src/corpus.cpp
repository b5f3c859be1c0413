#include "maslov/corpus.hpp"

#include <cmath>

namespace maslov::corpus {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

double uniform(std::uint64_t seed, std::uint64_t salt, double lo, double hi) {
    const std::uint64_t bits = splitmix(seed * 0x9E3779B97F4A7C15ULL + salt);
    const double u = (bits >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

std::vector<ConformalSystem> strict_twist_pool() {
    std::vector<ConformalSystem> pool;
    pool.push_back(harmonic_system(1, 0.0));
    pool.push_back(harmonic_system(1, 0.1));
    pool.push_back(free_system(1, 0.0));
    pool.push_back(damped_pendulum_system(0.1));
    pool.push_back(damped_pendulum_system(0.5));
    pool.push_back(discounted_tonelli_system(
        1, {TrigTerm{{1}, -1.0, 0.0}, TrigTerm{{2}, 0.3, 0.1}}, 0.2));
    pool.push_back(harmonic_system(2, 0.1));
    pool.push_back(torus_coupled_system(0.3, 0.1));
    return pool;
}

ConformalSystem system_for_dim(int d, std::uint64_t seed) {
    if (d == 1) {
        switch (splitmix(seed) % 3) {
            case 0: return harmonic_system(1, uniform(seed, 1, 0.0, 0.3));
            case 1: return damped_pendulum_system(uniform(seed, 2, 0.0, 0.3));
            default:
                return discounted_tonelli_system(
                    1, {TrigTerm{{1}, uniform(seed, 3, -1.2, -0.4), 0.0}},
                    uniform(seed, 4, 0.0, 0.2));
        }
    }
    if (d == 2) {
        if (splitmix(seed) % 2 == 0) {
            return torus_coupled_system(uniform(seed, 5, 0.1, 0.8),
                                        uniform(seed, 6, 0.0, 0.2));
        }
        return harmonic_system(2, uniform(seed, 7, 0.0, 0.2));
    }
    // Fiberwise-convex quadratic H = (|p|^2 + q^T R q) / 2 with moderate R.
    Mat S = Mat::Zero(2 * d, 2 * d);
    for (int i = 0; i < d; ++i) {
        S(d + i, d + i) = 1.0;
        S(i, i) = uniform(seed, 100 + static_cast<std::uint64_t>(i), -1.0, 1.0);
        for (int j = 0; j < i; ++j) {
            const double v =
                uniform(seed, 200 + static_cast<std::uint64_t>(i * d + j), -0.4, 0.4);
            S(i, j) = v;
            S(j, i) = v;
        }
    }
    return linear_system(S, uniform(seed, 8, 0.0, 0.2));
}

FlowSample random_flow_sample(int d, std::uint64_t seed, double horizon_max) {
    FlowSample s{system_for_dim(d, seed), Vec(2 * d),
                 random_lagrangian(d, seed * 7919 + 13), 0.0};
    for (int i = 0; i < 2 * d; ++i) {
        s.x0(i) = uniform(seed, 300 + static_cast<std::uint64_t>(i), -2.0, 2.0);
    }
    s.horizon = uniform(seed, 42, 1.0, horizon_max);
    return s;
}

std::vector<AuditSample> random_audit_samples(const ConformalSystem& sys, int n,
                                              std::uint64_t seed0,
                                              double horizon_max) {
    std::vector<AuditSample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(k);
        AuditSample s{Vec(2 * sys.d), random_lagrangian(sys.d, seed * 31 + 7),
                      uniform(seed, 9, 1.0, horizon_max)};
        for (int i = 0; i < 2 * sys.d; ++i) {
            s.x0(i) = uniform(seed, 400 + static_cast<std::uint64_t>(i), -2.0, 2.0);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace maslov::corpus
