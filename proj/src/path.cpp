#include "maslov/path.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace maslov {

namespace {

// Principal value in (-pi, pi].
double princ(double x) {
    x = std::fmod(x, 2.0 * kPi);
    if (x <= -kPi) x += 2.0 * kPi;
    if (x > kPi) x -= 2.0 * kPi;
    return x;
}

// Circular distance of a principal angle to the cut at pi (== -pi).
double dist_to_cut(double phi) { return kPi - std::abs(phi); }

}  // namespace

LagrangianPath::LagrangianPath(std::vector<double> times,
                               std::vector<LagrangianFrame> frames)
    : times_(std::move(times)), frames_(std::move(frames)) {
    if (times_.size() != frames_.size() || times_.size() < 2) {
        throw DimensionError("LagrangianPath: need matching times/frames, >= 2");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw DimensionError("LagrangianPath: times must strictly increase");
        }
    }
}

LagrangianPath::LagrangianPath(std::vector<double> times,
                               std::vector<LagrangianFrame> frames,
                               Evaluator refine, double refine_floor)
    : LagrangianPath(std::move(times), std::move(frames)) {
    refine_ = std::move(refine);
    refine_floor_ = refine_floor;
}

std::pair<double, LagrangianFrame> LagrangianPath::eval(double t) const {
    if (!refine_) {
        throw Error("LagrangianPath: path is not refinable");
    }
    return refine_(t);
}

LagrangianPath LagrangianPath::reversed() const {
    std::vector<double> t(times_.size());
    std::vector<LagrangianFrame> f;
    f.reserve(frames_.size());
    const double a = times_.front(), b = times_.back();
    for (std::size_t i = 0; i < times_.size(); ++i) {
        t[i] = a + b - times_[times_.size() - 1 - i];
        f.push_back(frames_[frames_.size() - 1 - i]);
    }
    if (!refine_) return LagrangianPath(std::move(t), std::move(f));
    auto inner = refine_;
    auto rev = [inner, a, b](double tt) {
        auto [ts, frame] = inner(a + b - tt);
        return std::make_pair(a + b - ts, std::move(frame));
    };
    return LagrangianPath(std::move(t), std::move(f), rev, refine_floor_);
}

namespace {

// Can the segment (ta, tb) still be split by the evaluator?
bool splittable(const LagrangianPath& path, double ta, double tb) {
    if (!path.refinable()) return false;
    const double floor =
        std::max(path.refine_floor(),
                 1e-13 * (std::abs(path.t0()) + std::abs(path.t1()) + 1.0));
    return (tb - ta) > 1.5 * floor;
}

// Midpoint evaluation; returns nullopt when the evaluator cannot produce a
// point strictly inside the bracket.
std::optional<std::pair<double, LagrangianFrame>> split(
    const LagrangianPath& path, double ta, double tb) {
    if (!splittable(path, ta, tb)) return std::nullopt;
    auto mid = path.eval(0.5 * (ta + tb));
    if (!(mid.first > ta && mid.first < tb)) return std::nullopt;
    return mid;
}

}  // namespace

std::vector<LiftSample> unwrap_arg_delta(const LagrangianPath& path,
                                         const PathOptions& opts) {
    const double guard = opts.tols.unwrap_guard;
    struct Node {
        double t;
        double arg;  // principal arg of Delta
    };
    std::vector<Node> pending;  // processed back-to-front
    pending.reserve(static_cast<std::size_t>(path.samples()));
    for (int i = path.samples() - 1; i >= 1; --i) {
        pending.push_back({path.time(i), std::arg(delta_fast(path.frame(i)))});
    }
    Node prev{path.time(0), std::arg(delta_fast(path.frame(0)))};

    std::vector<LiftSample> out;
    out.push_back({prev.t, prev.arg});
    double theta = prev.arg;
    int depth_guard = 0;
    while (!pending.empty()) {
        const Node next = pending.back();
        const double step = princ(next.arg - prev.arg);
        if (std::abs(step) >= guard) {
            auto mid = split(path, prev.t, next.t);
            if (mid && ++depth_guard < 1 << 20) {
                pending.push_back(
                    {mid->first, std::arg(delta_fast(mid->second))});
                continue;
            }
            throw AliasingError(
                "unwrap_arg_delta: step |d arg| = " + std::to_string(std::abs(step)) +
                " at t in [" + std::to_string(prev.t) + ", " +
                std::to_string(next.t) + "] exceeds the guard and the path "
                "cannot be refined further");
        }
        theta += step;
        out.push_back({next.t, theta});
        prev = next;
        pending.pop_back();
    }
    return out;
}

double angular_mi(const LagrangianPath& path, const PathOptions& opts) {
    const auto lift = unwrap_arg_delta(path, opts);
    return (lift.back().theta - lift.front().theta) / (2.0 * kPi);
}

namespace {

void require_transverse_endpoints(const LagrangianPath& path,
                                  const Tolerances& tols) {
    if (vertical_intersection_dim(path.frame(0), tols.rank_tol) > 0) {
        throw TransversalityError(
            "maslov index: start frame lies on the singular cycle");
    }
    if (vertical_intersection_dim(path.frame(path.samples() - 1),
                                  tols.rank_tol) > 0) {
        throw TransversalityError(
            "maslov index: end frame lies on the singular cycle");
    }
}

}  // namespace

IndexReport maslov_index_report(const LagrangianPath& path,
                                const PathOptions& opts) {
    require_transverse_endpoints(path, opts.tols);
    IndexReport rep;
    const auto lift = unwrap_arg_delta(path, opts);
    rep.alpha_mi = (lift.back().theta - lift.front().theta) / (2.0 * kPi);
    const AngleSpectrum sa = angles(path.frame(0));
    const AngleSpectrum sb = angles(path.frame(path.samples() - 1));
    rep.boundary_term = (sb.sum() - sa.sum()) / kPi;
    const double mi_real = rep.alpha_mi - rep.boundary_term;
    const long long mi = std::llround(mi_real);
    rep.residual = mi_real - static_cast<double>(mi);
    rep.degenerate_flag =
        sa.near_vertical_count(opts.tols.angle_tol * 1e3) > 0 ||
        sb.near_vertical_count(opts.tols.angle_tol * 1e3) > 0;
    if (std::abs(rep.residual) >= opts.tols.residual_tol) {
        throw NumericalError(
            "maslov_index: residual " + std::to_string(rep.residual) +
            " exceeds tolerance (aliasing or tolerance misconfiguration)");
    }
    rep.mi = static_cast<int>(mi);
    return rep;
}

int maslov_index(const LagrangianPath& path, const PathOptions& opts) {
    return *maslov_index_report(path, opts).mi;
}

namespace {

// Sorted principal args of the souriau spectrum (2 * angles).
std::vector<double> souriau_args(const LagrangianFrame& L) {
    const int d = L.dim();
    std::vector<double> out(static_cast<std::size_t>(d));
    if (d == 1) {
        const CMat W = souriau(L);
        out[0] = std::arg(W(0, 0));
        return out;
    }
    const CMat W = souriau(L);
    Eigen::ComplexEigenSolver<CMat> es(W, false);
    for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = std::arg(es.eigenvalues()(i));
    std::sort(out.begin(), out.end());
    return out;
}

// Match two circularly-ordered d-tuples by the cyclic shift minimizing the
// largest principal step.
struct Matching {
    std::vector<double> steps;
    int shift = 0;
    double cost = 0.0;
};

Matching matched_steps(const std::vector<double>& a,
                       const std::vector<double>& b) {
    const int d = static_cast<int>(a.size());
    Matching best;
    best.cost = 1e300;
    for (int s = 0; s < d; ++s) {
        std::vector<double> steps(static_cast<std::size_t>(d));
        double cost = 0.0;
        for (int j = 0; j < d; ++j) {
            const double diff = princ(b[static_cast<std::size_t>((j + s) % d)] -
                                      a[static_cast<std::size_t>(j)]);
            steps[static_cast<std::size_t>(j)] = diff;
            cost = std::max(cost, std::abs(diff));
        }
        if (cost < best.cost) {
            best.cost = cost;
            best.steps = std::move(steps);
            best.shift = s;
        }
    }
    return best;
}

struct TrackState {
    double t;
    std::vector<double> principal;  // souriau args, aligned with the tracks
    std::vector<double> lifted;     // continuous lifts of 2 theta
};

// Track-aligned tuples stay circularly ordered (each advance applies a cyclic
// rotation of a sorted tuple), so the cyclic matching remains valid.
TrackState advance(const TrackState& prev, double t,
                   const std::vector<double>& principal) {
    const Matching m = matched_steps(prev.principal, principal);
    const int d = static_cast<int>(prev.principal.size());
    TrackState next;
    next.t = t;
    next.lifted.resize(prev.lifted.size());
    next.principal.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        next.lifted[static_cast<std::size_t>(j)] =
            prev.lifted[static_cast<std::size_t>(j)] +
            m.steps[static_cast<std::size_t>(j)];
        next.principal[static_cast<std::size_t>(j)] =
            principal[static_cast<std::size_t>((j + m.shift) % d)];
    }
    return next;
}

double max_abs_step(const TrackState& a, const TrackState& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.lifted.size(); ++j) {
        m = std::max(m, std::abs(b.lifted[j] - a.lifted[j]));
    }
    return m;
}

// Number of levels pi + 2*pi*k crossed by track j between states (signed).
int levels_crossed(double from, double to) {
    auto cell = [](double x) {
        return static_cast<long long>(std::floor((x - kPi) / (2.0 * kPi)));
    };
    return static_cast<int>(cell(to) - cell(from));
}

}  // namespace

IndexReport crossing_mi(const LagrangianPath& path, const PathOptions& opts) {
    require_transverse_endpoints(path, opts.tols);
    if (!path.refinable()) {
        throw Error("crossing_mi: path must be refinable");
    }
    const double track_guard = kPi / 2.0;
    const double horizon = path.t1() - path.t0();
    const double time_tol =
        std::max(opts.tols.time_tol_rel * horizon, path.refine_floor());
    const int d = path.dim();

    IndexReport rep;
    {
        // Angular index and boundary data come from the lift as usual.
        const auto lift = unwrap_arg_delta(path, opts);
        rep.alpha_mi = (lift.back().theta - lift.front().theta) / (2.0 * kPi);
        const AngleSpectrum sa = angles(path.frame(0));
        const AngleSpectrum sb = angles(path.frame(path.samples() - 1));
        rep.boundary_term = (sb.sum() - sa.sum()) / kPi;
    }

    TrackState state;
    state.t = path.time(0);
    state.principal = souriau_args(path.frame(0));
    state.lifted = state.principal;

    struct Node {
        double t;
        std::vector<double> principal;
    };
    std::vector<Node> pending;
    for (int i = path.samples() - 1; i >= 1; --i) {
        pending.push_back({path.time(i), souriau_args(path.frame(i))});
    }

    int total = 0;
    int depth_guard = 0;
    while (!pending.empty()) {
        const Node next_node = pending.back();  // copy: pending may reallocate
        TrackState next = advance(state, next_node.t, next_node.principal);
        if (max_abs_step(state, next) >= track_guard) {
            auto mid = split(path, state.t, next_node.t);
            if (mid && ++depth_guard < (1 << 20)) {
                pending.push_back({mid->first, souriau_args(mid->second)});
                continue;
            }
            throw AliasingError("crossing_mi: spectrum moves faster than the "
                                "tracking guard and the path cannot be refined");
        }

        // Detect and localize level crossings inside [state.t, next.t].
        for (int j = 0; j < d; ++j) {
            const double a0 = state.lifted[static_cast<std::size_t>(j)];
            const double a1 = next.lifted[static_cast<std::size_t>(j)];
            const int crossed = levels_crossed(a0, a1);
            if (crossed == 0) continue;

            // Bisect on this track.
            TrackState lo = state;
            TrackState hi = next;
            while (hi.t - lo.t > time_tol) {
                auto mid = split(path, lo.t, hi.t);
                if (!mid) break;
                TrackState ms = advance(lo, mid->first, souriau_args(mid->second));
                if (levels_crossed(lo.lifted[static_cast<std::size_t>(j)],
                                   ms.lifted[static_cast<std::size_t>(j)]) != 0) {
                    hi = std::move(ms);
                } else {
                    lo = std::move(ms);
                }
            }
            const double t_star = 0.5 * (lo.t + hi.t);
            const double dt_bracket = std::max(hi.t - lo.t, 1e-300);
            const double theta_vel =
                0.5 * std::abs(hi.lifted[static_cast<std::size_t>(j)] -
                               lo.lifted[static_cast<std::size_t>(j)]) /
                dt_bracket;
            // Fall back to the coarse slope when the bracket collapsed.
            const double coarse_vel =
                0.5 * std::abs(a1 - a0) / std::max(next.t - state.t, 1e-300);
            if (std::max(theta_vel, coarse_vel) < opts.tols.vel_tol) {
                throw DegenerateCrossingError(
                    "crossing_mi: tangential crossing at t = " +
                    std::to_string(t_star) +
                    " (angle velocity below vel_tol); perturb the initial frame");
            }
            // Other tracks near the vertical at the crossing instant?
            double min_other = kPi;
            for (int k = 0; k < d; ++k) {
                if (k == j) continue;
                min_other = std::min(
                    min_other,
                    dist_to_cut(princ(hi.principal[static_cast<std::size_t>(k)])));
            }
            if (min_other < 1e-6) {
                rep.degenerate_flag = true;
                throw DegenerateCrossingError(
                    "crossing_mi: simultaneous near-vertical angles at t = " +
                    std::to_string(t_star) + " (crossing through the singular "
                    "locus of the cycle)");
            }
            const int sign = (crossed > 0 ? 1 : -1) * opts.crossing_orientation;
            for (int c = 0; c < std::abs(crossed); ++c) {
                rep.crossings.push_back(Crossing{t_star, sign, min_other});
                total += sign;
            }
        }
        state = std::move(next);
        pending.pop_back();
    }

    std::sort(rep.crossings.begin(), rep.crossings.end(),
              [](const Crossing& a, const Crossing& b) { return a.time < b.time; });
    rep.mi = total;
    rep.residual = rep.alpha_mi - rep.boundary_term - total;
    return rep;
}

LagrangianPath concatenate(const LagrangianPath& a, const LagrangianPath& b) {
    if (std::abs(a.t1() - b.t0()) > 1e-12 * (1.0 + std::abs(a.t1()))) {
        throw DimensionError("concatenate: paths do not share the junction time");
    }
    if (!a.frame(a.samples() - 1).same_subspace(b.frame(0), 1e-7)) {
        throw DimensionError("concatenate: junction frames disagree");
    }
    std::vector<double> times;
    std::vector<LagrangianFrame> frames;
    for (int i = 0; i < a.samples(); ++i) {
        times.push_back(a.time(i));
        frames.push_back(a.frame(i));
    }
    for (int i = 1; i < b.samples(); ++i) {
        times.push_back(b.time(i));
        frames.push_back(b.frame(i));
    }
    if (!a.refinable() || !b.refinable()) {
        return LagrangianPath(std::move(times), std::move(frames));
    }
    const double junction = a.t1();
    auto joint = [pa = a, pb = b, junction](double t) {
        return t <= junction ? pa.eval(t) : pb.eval(t);
    };
    return LagrangianPath(std::move(times), std::move(frames), joint,
                          std::max(a.refine_floor(), b.refine_floor()));
}

LagrangianPath matrix_family_path(std::function<Mat(double)> family,
                                  const LagrangianFrame& L0, double t0, double t1,
                                  int samples) {
    if (samples < 2) throw DimensionError("matrix_family_path: samples >= 2");
    std::vector<double> times(static_cast<std::size_t>(samples));
    std::vector<LagrangianFrame> frames;
    frames.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double t = t0 + (t1 - t0) * i / (samples - 1);
        times[static_cast<std::size_t>(i)] = t;
        frames.push_back(LagrangianFrame::from_columns(family(t) * L0.columns()));
    }
    auto eval = [family, cols = L0.columns()](double t) {
        return std::make_pair(t, LagrangianFrame::from_columns(family(t) * cols));
    };
    return LagrangianPath(std::move(times), std::move(frames), eval, 0.0);
}

LagrangianPath map_path(const LagrangianPath& path,
                        std::function<LagrangianFrame(const LagrangianFrame&)> f) {
    std::vector<double> times;
    std::vector<LagrangianFrame> frames;
    times.reserve(static_cast<std::size_t>(path.samples()));
    for (int i = 0; i < path.samples(); ++i) {
        times.push_back(path.time(i));
        frames.push_back(f(path.frame(i)));
    }
    if (!path.refinable()) {
        return LagrangianPath(std::move(times), std::move(frames));
    }
    auto eval = [p = path, f](double t) {
        auto [ts, frame] = p.eval(t);
        return std::make_pair(ts, f(frame));
    };
    return LagrangianPath(std::move(times), std::move(frames), eval,
                          path.refine_floor());
}

}  // namespace maslov
