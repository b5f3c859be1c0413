#pragma once

// Maslov indices of sampled Lagrangian paths.
//
// The angular index is the winding of Delta = (-1)^d det^2 along the path,
// computed by phase unwrapping with a per-step guard. The integer index MI
// follows from the exact identity
//     alphaMI = (1/pi) sum_j (theta_j(b) - theta_j(a)) + MI
// with branch-reduced endpoint angles, so MI is recovered by rounding.
// An independent implementation counts cooriented crossings of the vertical
// by tracking the eigenvalue angles of the souriau map through -1: a crossing
// counts +1 when the lifted angle increases through the cut at pi/2 (mod pi)
// and -1 when it decreases; the harmonic oscillator crosses negatively.

#include <functional>
#include <optional>
#include <vector>

#include "maslov/angles.hpp"
#include "maslov/linalg.hpp"
#include "maslov/types.hpp"

namespace maslov {

/// A time-stamped Lagrangian path, optionally refinable at intermediate
/// times. Refinement evaluators may snap the requested time to an internal
/// grid; the evaluated time is reported back.
class LagrangianPath {
public:
    /// Evaluator: t -> (actually evaluated time, frame).
    using Evaluator = std::function<std::pair<double, LagrangianFrame>(double)>;

    /// Static path from explicit samples (non-refinable).
    LagrangianPath(std::vector<double> times, std::vector<LagrangianFrame> frames);
    /// Refinable path; samples are the preferred coarse grid.
    LagrangianPath(std::vector<double> times, std::vector<LagrangianFrame> frames,
                   Evaluator refine, double refine_floor);

    int samples() const { return static_cast<int>(times_.size()); }
    double time(int i) const { return times_[static_cast<std::size_t>(i)]; }
    const LagrangianFrame& frame(int i) const {
        return frames_[static_cast<std::size_t>(i)];
    }
    double t0() const { return times_.front(); }
    double t1() const { return times_.back(); }
    int dim() const { return frames_.front().dim(); }

    bool refinable() const { return static_cast<bool>(refine_); }
    /// Smallest time separation the evaluator can resolve.
    double refine_floor() const { return refine_floor_; }
    std::pair<double, LagrangianFrame> eval(double t) const;

    /// Path traversed backwards.
    LagrangianPath reversed() const;

private:
    std::vector<double> times_;
    std::vector<LagrangianFrame> frames_;
    Evaluator refine_;
    double refine_floor_ = 0.0;
};

struct PathOptions {
    Tolerances tols{};
    /// Global coorientation constant; the library convention is +1 and the
    /// self-test flips it to verify the invariant suite notices.
    int crossing_orientation = +1;
};

/// One point of the continuous lift of arg Delta.
struct LiftSample {
    double t;
    double theta;  // unwrapped
};

/// Continuous lift of arg Delta along the path; inserts refinement points
/// whenever a step exceeds the unwrap guard. Throws AliasingError when the
/// guard is unreachable.
std::vector<LiftSample> unwrap_arg_delta(const LagrangianPath& path,
                                         const PathOptions& opts = {});

/// Angular Maslov index (theta(b) - theta(a)) / 2 pi.
double angular_mi(const LagrangianPath& path, const PathOptions& opts = {});

/// One detected crossing of the singular cycle.
struct Crossing {
    double time;
    int sign;                  // +1 or -1
    double min_angle_distance; // closest other angle to the vertical (rad)
};

/// Full result of an index computation.
struct IndexReport {
    double alpha_mi = 0.0;
    std::optional<int> mi;
    double boundary_term = 0.0;  // (1/pi) sum_j (theta_j(b) - theta_j(a))
    double residual = 0.0;       // alpha_mi - boundary_term - mi
    std::vector<Crossing> crossings;
    bool aliasing_flag = false;
    bool degenerate_flag = false;  // simultaneous near-vertical angles seen
};

/// Integer Maslov index via the rounding identity. Requires transverse
/// endpoints; throws TransversalityError otherwise and NumericalError when
/// the residual exceeds residual_tol.
IndexReport maslov_index_report(const LagrangianPath& path,
                                const PathOptions& opts = {});
int maslov_index(const LagrangianPath& path, const PathOptions& opts = {});

/// Independent crossing-counting implementation (coorientation signs by
/// eigenvalue-angle tracking with bisection). Requires transverse endpoints
/// and a refinable path. Throws DegenerateCrossingError on tangential or
/// multi-dimensional crossings.
IndexReport crossing_mi(const LagrangianPath& path, const PathOptions& opts = {});

/// Concatenation (shared junction sample).
LagrangianPath concatenate(const LagrangianPath& a, const LagrangianPath& b);

/// Path of frames L(t) = Phi(t) . L0 for a matrix family Phi (refinable,
/// continuous in t). Used for closed-form linear paths.
LagrangianPath matrix_family_path(std::function<Mat(double)> family,
                                  const LagrangianFrame& L0, double t0, double t1,
                                  int samples);

/// Transported path: apply a fixed linear map pointwise (e.g. a vertical
/// translation differential or a symplectic reduction).
LagrangianPath map_path(const LagrangianPath& path,
                        std::function<LagrangianFrame(const LagrangianFrame&)> f);

}  // namespace maslov
