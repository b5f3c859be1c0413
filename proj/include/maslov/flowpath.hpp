#pragma once

// Bridge between the integrator and the index machinery: a flow-generated
// Lagrangian path backed by dense integrator-grid storage. Refinement snaps
// to the grid, so the grid step is the refinement floor.

#include <memory>
#include <vector>

#include "maslov/flow.hpp"
#include "maslov/path.hpp"

namespace maslov {

struct FlowPathOptions {
    double dt = 1e-3;
    int stride = 0;                     // coarse sampling stride; 0 = auto
    std::vector<double> include_times;  // forced coarse samples (grid-snapped)
};

class FlowPath {
public:
    FlowPath(const ConformalSystem& sys, const Vec& x0, const LagrangianFrame& L0,
             double t0, double t1, FlowPathOptions opts = {});

    const TangentTrajectory& trajectory() const { return *traj_; }
    const LagrangianFrame& initial_frame() const { return L0_; }
    double grid_step() const { return h_; }

    /// Nearest grid index for a time.
    int grid_index(double t) const;
    double grid_time(int i) const { return traj_->times[static_cast<std::size_t>(i)]; }
    /// Transported frame at a grid index / snapped time.
    LagrangianFrame frame_at_index(int i) const;
    LagrangianFrame frame_at(double t) const { return frame_at_index(grid_index(t)); }

    /// The whole path as a refinable LagrangianPath (shares storage).
    LagrangianPath path() const;
    /// Grid-snapped subpath (shares storage, no re-integration).
    LagrangianPath subpath(double ta, double tb) const;

private:
    LagrangianPath make_path(int ia, int ib) const;

    std::shared_ptr<const TangentTrajectory> traj_;
    LagrangianFrame L0_;
    double t0_, h_;
    int stride_;
    std::vector<int> forced_;
};

/// One-shot variant of FlowPath(...).path().
LagrangianPath flow_path(const ConformalSystem& sys, const Vec& x0,
                         const LagrangianFrame& L0, double t0, double t1,
                         const FlowPathOptions& opts = {});

/// Lift lookup: value of theta at a sample time recorded in the lift
/// (binary search; throws if t was not sampled).
double lift_theta_at(const std::vector<LiftSample>& lift, double t);

}  // namespace maslov
