#pragma once

// Deterministic sample corpora shared by the self-test suite and the
// acceptance harness: strict-twist builtin pool, random initial data and
// random flow-generated paths.

#include <cstdint>

#include "maslov/flow.hpp"
#include "maslov/twist.hpp"

namespace maslov::corpus {

/// Deterministic uniform double in [lo, hi) derived from (seed, salt).
double uniform(std::uint64_t seed, std::uint64_t salt, double lo, double hi);

/// Pool of strict-twist builtins with d in {1, 2} (fiberwise convex H).
std::vector<ConformalSystem> strict_twist_pool();

/// A conformal system for a given dimension, cycling through builtins
/// (d = 3 uses fiberwise-convex quadratic Hamiltonians).
ConformalSystem system_for_dim(int d, std::uint64_t seed);

struct FlowSample {
    ConformalSystem sys;
    Vec x0;
    LagrangianFrame L0;
    double horizon;
};

/// Random flow sample: system, bounded initial state, random frame and a
/// horizon in [1, horizon_max].
FlowSample random_flow_sample(int d, std::uint64_t seed,
                              double horizon_max = 4.0);

/// Random audit samples (state, frame, horizon) for a fixed system.
std::vector<AuditSample> random_audit_samples(const ConformalSystem& sys, int n,
                                              std::uint64_t seed0,
                                              double horizon_max = 10.0);

}  // namespace maslov::corpus
