#pragma once

// Long-horizon asymptotic Maslov indices, Birkhoff-style measure estimates
// and graph scans for bounded-index points. Rates are computed from the
// angular index (defined for every path, no endpoint transversality needed);
// integer indices are reported at integer-time checkpoints where the
// transported frame is off the singular cycle.

#include <vector>

#include "maslov/flowpath.hpp"

namespace maslov {

struct AsymptoticEstimate {
    double rate = 0.0;              // index per unit time at the last horizon
    std::vector<double> horizons;
    std::vector<double> partials;   // alphaMI(T) / T per horizon
    double cauchy_gap = 0.0;        // max pairwise gap over the last window
    bool converged = false;
};

AsymptoticEstimate asymptotic_index(const ConformalSystem& sys, const Vec& x0,
                                    const LagrangianFrame& L0,
                                    const std::vector<double>& horizons,
                                    double dt, const PathOptions& opts = {});

/// Empirical measure index: alphaMI over [burn_in, T] divided by T - burn_in.
/// Throws NumericalError when the orbit leaves the escape bound (not
/// relatively compact).
double measure_index_estimate(const ConformalSystem& sys, const Vec& x0,
                              const LagrangianFrame& L0, double T,
                              double burn_in, double dt,
                              const PathOptions& opts = {});

/// Default burn-in of T / 10.
double measure_index_estimate(const ConformalSystem& sys, const Vec& x0,
                              const LagrangianFrame& L0, double T, double dt);

/// Initial Lagrangian graph p = c + dU(q), U a trig series. The frame seeded
/// at a point is tangent to the graph.
struct GraphSpec {
    Vec c;                        // constant covector, length d
    std::vector<TrigTerm> modes;  // U(q) = sum c_m cos(m.q) + s_m sin(m.q)
};

Vec graph_covector(const GraphSpec& g, const Vec& q);
LagrangianFrame graph_tangent_frame(const GraphSpec& g, const Vec& q);

struct ScanPoint {
    Vec x0;
    int min_mi = 0;
    int max_mi = 0;
    int checkpoints = 0;  // evaluated integer times
    int skips = 0;        // endpoint on the singular cycle
    bool failed = false;  // integration failure, excluded from the summary
    int bound() const { return std::max(std::abs(min_mi), std::abs(max_mi)); }
};

struct ScanResult {
    GraphSpec graph;
    std::vector<ScanPoint> points;
    int best_index = -1;  // minimizes max |running MI| among evaluated points
    int failures = 0;
    long long bound_violations = 0;  // |alphaMI - MI| >= d events (expect 0)
};

/// Seeds n_points on the graph (uniform base grid for d <= 2, Halton for
/// d >= 3), tracks the running Maslov index at integer times over [0, T] and
/// reports per-point bounds and the best point. Point computations run on
/// `threads` workers (0 = hardware concurrency).
ScanResult graph_scan(const ConformalSystem& sys, const GraphSpec& graph,
                      int n_points, double T, double dt, int threads = 0,
                      const PathOptions& opts = {});

}  // namespace maslov
