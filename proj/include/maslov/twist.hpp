#pragma once

// Numerical twist certificates and the index consequences of the twist
// condition. The sign convention is anchored by the derivative identity
// d/dt (b_t d_t^{-1}) |_{t0} = d2H/dp2 and by the requirement that strict
// twist forces non-positive Maslov indices.

#include <map>
#include <vector>

#include "maslov/flow.hpp"
#include "maslov/path.hpp"

namespace maslov {

enum class TwistVerdict { strict_twist, semi_twist, fail };

const char* to_string(TwistVerdict v);

struct TwistWitness {
    double t;
    Vec x;
    double min_eig;
};

struct TwistCertificate {
    TwistVerdict verdict = TwistVerdict::fail;
    double min_eig = 0.0;
    double margin = 0.0;  // scale-aware zero band actually used
    long long evaluated = 0;
    std::vector<TwistWitness> witnesses;  // points attaining min_eig
};

/// Axis-aligned box in (q, p) together with evaluation times.
struct TwistRegion {
    Vec lo, hi;                         // length 2d
    std::vector<double> times = {0.0};  // t samples (autonomous: just 0)
};

struct TwistGrid {
    std::vector<int> points_per_dim;  // length 2d
};

/// Samples d2H/dp2 over the grid and reports the smallest eigenvalue with a
/// strict / semi / fail verdict at the scale-aware margin.
TwistCertificate twist_certificate(const ConformalSystem& sys,
                                   const TwistRegion& region,
                                   const TwistGrid& grid,
                                   const Tolerances& tols = default_tols());

/// Height of the evolved vertical over the vertical in the horizontal chart:
/// the symmetric form with matrix b_t d_t^{-1} from the tangent flow started
/// at (t0, x0). Throws NumericalError when d_t is singular (the evolved
/// vertical has crossed the horizontal). t may be below t0.
SymmetricForm evolved_vertical_height(const ConformalSystem& sys, const Vec& x0,
                                      double t0, double t, double dt,
                                      const Tolerances& tols = default_tols());

struct AuditSample {
    Vec x0;
    LagrangianFrame L0;
    double horizon;
};

struct AuditReport {
    int total = 0;
    int skipped = 0;  // endpoint on the singular cycle
    std::vector<int> violations;  // sample indices with MI > 0
    std::map<int, long long> histogram;
    std::string certificate;  // caller-supplied twist certificate note
};

/// Computes the Maslov index of every sample with transverse endpoints and
/// collects violations of MI <= 0 (expected empty on strict-twist systems).
AuditReport nonpositivity_audit(const ConformalSystem& sys,
                                const std::vector<AuditSample>& samples,
                                double dt, const PathOptions& opts = {});

}  // namespace maslov
