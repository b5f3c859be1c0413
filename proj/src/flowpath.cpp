#include "maslov/flowpath.hpp"

#include <algorithm>
#include <cmath>

namespace maslov {

FlowPath::FlowPath(const ConformalSystem& sys, const Vec& x0,
                   const LagrangianFrame& L0, double t0, double t1,
                   FlowPathOptions opts)
    : traj_(std::make_shared<TangentTrajectory>(
          tangent_flow(sys, x0, t0, t1, opts.dt))),
      L0_(L0),
      t0_(t0) {
    const int n = traj_->steps();
    h_ = (n > 0) ? (t1 - t0) / n : opts.dt;
    stride_ = opts.stride > 0 ? opts.stride
                              : std::clamp(n / 4096, 1, 64);
    for (double t : opts.include_times) {
        const int i = grid_index(t);
        if (i >= 0 && i <= n) forced_.push_back(i);
    }
    std::sort(forced_.begin(), forced_.end());
    forced_.erase(std::unique(forced_.begin(), forced_.end()), forced_.end());
}

int FlowPath::grid_index(double t) const {
    const int n = traj_->steps();
    const int i = static_cast<int>(std::llround((t - t0_) / h_));
    return std::clamp(i, 0, n);
}

LagrangianFrame FlowPath::frame_at_index(int i) const {
    return transport_frame(traj_->tangents[static_cast<std::size_t>(i)], L0_);
}

LagrangianPath FlowPath::make_path(int ia, int ib) const {
    std::vector<int> idx;
    idx.push_back(ia);
    for (int i = ia + stride_ - ia % stride_; i < ib; i += stride_) {
        if (i > ia) idx.push_back(i);
    }
    for (int i : forced_) {
        if (i > ia && i < ib) idx.push_back(i);
    }
    idx.push_back(ib);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

    std::vector<double> times;
    std::vector<LagrangianFrame> frames;
    times.reserve(idx.size());
    frames.reserve(idx.size());
    for (int i : idx) {
        times.push_back(grid_time(i));
        frames.push_back(frame_at_index(i));
    }
    auto eval = [traj = traj_, L0 = L0_, t0 = t0_, h = h_, ia, ib](double t) {
        int i = static_cast<int>(std::llround((t - t0) / h));
        i = std::clamp(i, ia, ib);
        return std::make_pair(traj->times[static_cast<std::size_t>(i)],
                              transport_frame(
                                  traj->tangents[static_cast<std::size_t>(i)],
                                  L0));
    };
    return LagrangianPath(std::move(times), std::move(frames), eval, h_);
}

LagrangianPath FlowPath::path() const { return make_path(0, traj_->steps()); }

LagrangianPath FlowPath::subpath(double ta, double tb) const {
    const int ia = grid_index(ta);
    const int ib = grid_index(tb);
    if (ib <= ia) throw DimensionError("FlowPath::subpath: empty range");
    return make_path(ia, ib);
}

LagrangianPath flow_path(const ConformalSystem& sys, const Vec& x0,
                         const LagrangianFrame& L0, double t0, double t1,
                         const FlowPathOptions& opts) {
    return FlowPath(sys, x0, L0, t0, t1, opts).path();
}

double lift_theta_at(const std::vector<LiftSample>& lift, double t) {
    auto it = std::lower_bound(
        lift.begin(), lift.end(), t,
        [](const LiftSample& s, double tt) { return s.t < tt; });
    const double span = lift.back().t - lift.front().t;
    const double tol = 1e-9 * (1.0 + std::abs(span));
    if (it != lift.end() && std::abs(it->t - t) <= tol) return it->theta;
    if (it != lift.begin() && std::abs(std::prev(it)->t - t) <= tol) {
        return std::prev(it)->theta;
    }
    throw Error("lift_theta_at: time was not sampled in the lift");
}

}  // namespace maslov
