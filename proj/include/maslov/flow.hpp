#pragma once

// Conformally symplectic vector fields
//     qdot = dH/dp,   pdot = -dH/dq - a(t) p,
// their fixed-step RK4 flows and the coupled variational (tangent) flow.
// With this dissipative convention (a > 0 damps) the differential satisfies
// M^T J M = exp(-int a) J.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "maslov/linalg.hpp"
#include "maslov/types.hpp"

namespace maslov {

/// Time-dependent Hamiltonian H(t, q, p) with first and second partials.
class Hamiltonian {
public:
    virtual ~Hamiltonian() = default;
    virtual double value(double t, const Vec& q, const Vec& p) const = 0;
    virtual void gradient(double t, const Vec& q, const Vec& p, Vec& Hq,
                          Vec& Hp) const = 0;
    /// Hqq(i,j) = d2H/dqi dqj, Hqp(i,j) = d2H/dqi dpj, Hpp likewise.
    virtual void hessian(double t, const Vec& q, const Vec& p, Mat& Hqq,
                         Mat& Hqp, Mat& Hpp) const = 0;
};

/// Central-difference partials for a user-supplied scalar H, step
/// h_fd * (1 + |x|) per coordinate. Mixed second partials are evaluated for
/// both orders and compared; asymmetry beyond the fd-consistency bound
/// throws NumericalError.
class FiniteDiffHamiltonian : public Hamiltonian {
public:
    using Fn = std::function<double(double, const Vec&, const Vec&)>;
    FiniteDiffHamiltonian(Fn f, double h_fd = default_tols().h_fd)
        : f_(std::move(f)), h_fd_(h_fd) {}

    double value(double t, const Vec& q, const Vec& p) const override;
    void gradient(double t, const Vec& q, const Vec& p, Vec& Hq,
                  Vec& Hp) const override;
    void hessian(double t, const Vec& q, const Vec& p, Mat& Hqq, Mat& Hqp,
                 Mat& Hpp) const override;

private:
    Fn f_;
    double h_fd_;
};

/// A conformal system: Hamiltonian, conformal (dissipation) rate a(t),
/// dimension and per-coordinate base topology.
struct ConformalSystem {
    int d = 1;
    std::shared_ptr<const Hamiltonian> H;
    std::function<double(double)> rate;  // a(t)
    std::vector<bool> angular;           // q_i lives on a 2*pi circle
    std::string name;

    double rate_at(double t) const { return rate ? rate(t) : 0.0; }
};

// Builtin systems.
ConformalSystem harmonic_system(int d = 1, double a = 0.0);
ConformalSystem free_system(int d = 1, double a = 0.0);
ConformalSystem damped_pendulum_system(double a);
/// H = |p|^2/2 + V(q), V a trig series sum_m c_m cos(m.q) + s_m sin(m.q).
struct TrigTerm {
    std::vector<int> mode;  // integer mode vector m
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};
ConformalSystem discounted_tonelli_system(int d, std::vector<TrigTerm> potential,
                                          double a);
ConformalSystem linear_system(const Mat& S, double a = 0.0);
ConformalSystem torus_coupled_system(double eps, double a = 0.0);

/// (qdot, pdot) of the conformal vector field at (t, x), x = (q, p).
Vec vector_field(const ConformalSystem& sys, double t, const Vec& x);

/// Jacobian DX(t, x) in the (q, p) block splitting.
Mat vector_field_jacobian(const ConformalSystem& sys, double t, const Vec& x);

/// dH/dp . dH/dp Hessian block: the twist matrix d_p X_q = d2H/dp2.
Mat twist_block(const ConformalSystem& sys, double t, const Vec& x);

/// Base trajectory with the running integral of the rate; fixed-step RK4,
/// the step is (t1 - t0)/ceil((t1 - t0)/dt) so t1 is hit exactly.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<double> rate_integral;  // int_{t0}^{t} a ds

    int steps() const { return static_cast<int>(times.size()) - 1; }
    /// Conformal factor of the differential over [t0, t]: exp(-int a).
    double conformal_factor(int i) const;
};

/// Trajectory together with the variational flow M(t), M(t0) = I, integrated
/// as one coupled RK4 system with the base. Conformality is monitored while
/// integrating (never enforced by projection): conformal_warning is raised
/// when the running defect exceeds conformal_tol.
struct TangentTrajectory : Trajectory {
    std::vector<Mat> tangents;
    double max_checked_defect = 0.0;
    bool conformal_warning = false;

    /// || M^T J M - exp(-int a) J ||_F at sample i.
    double conformal_defect(int i) const;
};

Trajectory flow(const ConformalSystem& sys, const Vec& x0, double t0, double t1,
                double dt);
TangentTrajectory tangent_flow(const ConformalSystem& sys, const Vec& x0,
                               double t0, double t1, double dt);

/// Push a frame by a tangent matrix and re-canonicalize (same subspace).
/// Throws NumericalError on isotropy drift (integrator breakdown).
LagrangianFrame transport_frame(const Mat& M, const LagrangianFrame& L);

/// Angle coordinates reduced mod 2*pi (output only; integration is unreduced).
Vec reduced_state(const ConformalSystem& sys, const Vec& x);

}  // namespace maslov
