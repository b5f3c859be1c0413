#include "maslov/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace maslov {

AsymptoticEstimate asymptotic_index(const ConformalSystem& sys, const Vec& x0,
                                    const LagrangianFrame& L0,
                                    const std::vector<double>& horizons,
                                    double dt, const PathOptions& opts) {
    if (horizons.empty()) throw ConfigError("asymptotic_index: no horizons");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (horizons[i] <= 0 || (i > 0 && horizons[i] <= horizons[i - 1])) {
            throw ConfigError("asymptotic_index: horizons must increase");
        }
    }
    FlowPathOptions fpo;
    fpo.dt = dt;
    fpo.include_times = horizons;
    FlowPath fp(sys, x0, L0, 0.0, horizons.back(), fpo);
    const auto lift = unwrap_arg_delta(fp.path(), opts);
    const double theta0 = lift.front().theta;

    AsymptoticEstimate est;
    est.horizons = horizons;
    for (double T : horizons) {
        const double theta = lift_theta_at(lift, fp.grid_time(fp.grid_index(T)));
        est.partials.push_back((theta - theta0) / (2.0 * kPi) / T);
    }
    est.rate = est.partials.back();
    const std::size_t window = std::min<std::size_t>(3, est.partials.size());
    double lo = est.partials.back(), hi = est.partials.back();
    for (std::size_t i = est.partials.size() - window; i < est.partials.size();
         ++i) {
        lo = std::min(lo, est.partials[i]);
        hi = std::max(hi, est.partials[i]);
    }
    est.cauchy_gap = hi - lo;
    est.converged = est.partials.size() >= 2 && est.cauchy_gap < opts.tols.conv_tol;
    return est;
}

double measure_index_estimate(const ConformalSystem& sys, const Vec& x0,
                              const LagrangianFrame& L0, double T,
                              double burn_in, double dt,
                              const PathOptions& opts) {
    if (!(T > burn_in) || burn_in < 0) {
        throw ConfigError("measure_index_estimate: need 0 <= burn_in < T");
    }
    FlowPathOptions fpo;
    fpo.dt = dt;
    fpo.include_times = {burn_in};
    FlowPath fp(sys, x0, L0, 0.0, T, fpo);
    for (const Vec& x : fp.trajectory().states) {
        if (x.norm() > opts.tols.escape_bound) {
            throw NumericalError(
                "measure_index_estimate: orbit left the escape bound (not "
                "relatively compact)");
        }
    }
    const auto lift = unwrap_arg_delta(fp.path(), opts);
    const double ta = fp.grid_time(fp.grid_index(burn_in));
    return (lift.back().theta - lift_theta_at(lift, ta)) /
           (2.0 * kPi * (T - ta));
}

double measure_index_estimate(const ConformalSystem& sys, const Vec& x0,
                              const LagrangianFrame& L0, double T, double dt) {
    return measure_index_estimate(sys, x0, L0, T, T / 10.0, dt);
}

Vec graph_covector(const GraphSpec& g, const Vec& q) {
    Vec p = g.c;
    for (const auto& term : g.modes) {
        double phase = 0.0;
        for (int i = 0; i < q.size(); ++i) phase += term.mode[i] * q(i);
        const double du =
            -term.cos_coeff * std::sin(phase) + term.sin_coeff * std::cos(phase);
        for (int i = 0; i < q.size(); ++i) p(i) += du * term.mode[i];
    }
    return p;
}

LagrangianFrame graph_tangent_frame(const GraphSpec& g, const Vec& q) {
    const int d = static_cast<int>(q.size());
    Mat H = Mat::Zero(d, d);
    for (const auto& term : g.modes) {
        double phase = 0.0;
        for (int i = 0; i < d; ++i) phase += term.mode[i] * q(i);
        const double d2u =
            -term.cos_coeff * std::cos(phase) - term.sin_coeff * std::sin(phase);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                H(i, j) += d2u * term.mode[i] * term.mode[j];
            }
        }
    }
    return LagrangianFrame::graph(H);
}

namespace {

// Halton low-discrepancy point in [0,1)^d (bases 2, 3, 5, 7, ...).
Vec halton_point(int index, int d) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    Vec out(d);
    for (int i = 0; i < d; ++i) {
        const int base = primes[i % 8];
        double f = 1.0, r = 0.0;
        int n = index + 1;
        while (n > 0) {
            f /= base;
            r += f * (n % base);
            n /= base;
        }
        out(i) = r;
    }
    return out;
}

Vec seed_base_point(const ConformalSystem& sys, int k, int n) {
    const int d = sys.d;
    Vec q(d);
    if (d == 1) {
        q(0) = 2.0 * kPi * k / n;
    } else if (d == 2) {
        // Uniform grid, as square as n allows.
        const int side = std::max(1, static_cast<int>(std::lround(std::sqrt(n))));
        const int i = k % side;
        const int j = k / side;
        q(0) = 2.0 * kPi * i / side;
        q(1) = 2.0 * kPi * j / std::max(1, (n + side - 1) / side);
    } else {
        q = 2.0 * kPi * halton_point(k, d);
    }
    // Non-angular coordinates are centered on [-pi, pi).
    for (int i = 0; i < d; ++i) {
        const bool ang =
            i < static_cast<int>(sys.angular.size()) && sys.angular[i];
        if (!ang) q(i) -= kPi;
    }
    return q;
}

void scan_one_point(const ConformalSystem& sys, const GraphSpec& graph,
                    double T, double dt, const PathOptions& opts,
                    ScanPoint& rec, std::atomic<long long>& bound_violations) {
    const int d = sys.d;
    const Vec q0 = rec.x0.head(d);
    const LagrangianFrame L0 = graph_tangent_frame(graph, q0);
    FlowPathOptions fpo;
    fpo.dt = dt;
    for (int k = 1; k <= static_cast<int>(std::floor(T + 1e-9)); ++k) {
        fpo.include_times.push_back(static_cast<double>(k));
    }
    FlowPath fp(sys, rec.x0, L0, 0.0, T, fpo);
    const auto lift = unwrap_arg_delta(fp.path(), opts);
    const double theta0 = lift.front().theta;
    const double sum0 = angles(L0).sum();

    bool first = true;
    for (double tk : fpo.include_times) {
        const int gi = fp.grid_index(tk);
        const LagrangianFrame frame = fp.frame_at_index(gi);
        if (vertical_intersection_dim(frame, opts.tols.rank_tol) > 0) {
            ++rec.skips;
            continue;
        }
        const double alpha =
            (lift_theta_at(lift, fp.grid_time(gi)) - theta0) / (2.0 * kPi);
        const double boundary = (angles(frame).sum() - sum0) / kPi;
        const double mi_real = alpha - boundary;
        const long long mi = std::llround(mi_real);
        if (std::abs(mi_real - mi) >= opts.tols.residual_tol) {
            rec.failed = true;
            return;
        }
        if (std::abs(alpha - static_cast<double>(mi)) >= d) {
            ++bound_violations;  // |alphaMI - MI| < d must hold
        }
        const int mii = static_cast<int>(mi);
        if (first) {
            rec.min_mi = rec.max_mi = mii;
            first = false;
        } else {
            rec.min_mi = std::min(rec.min_mi, mii);
            rec.max_mi = std::max(rec.max_mi, mii);
        }
        ++rec.checkpoints;
    }
    if (first) rec.failed = true;  // nothing evaluated
}

}  // namespace

ScanResult graph_scan(const ConformalSystem& sys, const GraphSpec& graph,
                      int n_points, double T, double dt, int threads,
                      const PathOptions& opts) {
    if (n_points < 1) throw ConfigError("graph_scan: n_points >= 1");
    if (graph.c.size() != sys.d) {
        throw ConfigError("graph_scan: covector dimension mismatch");
    }
    ScanResult result;
    result.graph = graph;
    result.points.resize(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k) {
        const Vec q = seed_base_point(sys, k, n_points);
        Vec x0(2 * sys.d);
        x0.head(sys.d) = q;
        x0.tail(sys.d) = graph_covector(graph, q);
        result.points[static_cast<std::size_t>(k)].x0 = x0;
    }

    int workers = threads > 0 ? threads
                              : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n_points));

    std::atomic<long long> bound_violations{0};
    std::atomic<int> next{0};
    auto run = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= n_points) return;
            ScanPoint& rec = result.points[static_cast<std::size_t>(k)];
            try {
                scan_one_point(sys, graph, T, dt, opts, rec, bound_violations);
            } catch (const Error&) {
                rec.failed = true;
            }
        }
    };
    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }

    result.bound_violations = bound_violations.load();
    int best = -1;
    for (int k = 0; k < n_points; ++k) {
        const ScanPoint& rec = result.points[static_cast<std::size_t>(k)];
        if (rec.failed) {
            ++result.failures;
            continue;
        }
        if (best < 0 ||
            rec.bound() < result.points[static_cast<std::size_t>(best)].bound()) {
            best = k;
        }
    }
    result.best_index = best;
    return result;
}

}  // namespace maslov
