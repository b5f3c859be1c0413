#include "maslov/flow.hpp"

#include <cmath>

namespace maslov {

double FiniteDiffHamiltonian::value(double t, const Vec& q, const Vec& p) const {
    return f_(t, q, p);
}

namespace {

double coord_step(double h_fd, const Vec& q, const Vec& p) {
    return h_fd * (1.0 + std::sqrt(q.squaredNorm() + p.squaredNorm()));
}

}  // namespace

void FiniteDiffHamiltonian::gradient(double t, const Vec& q, const Vec& p,
                                     Vec& Hq, Vec& Hp) const {
    const int d = static_cast<int>(q.size());
    const double h = coord_step(h_fd_, q, p);
    Hq.resize(d);
    Hp.resize(d);
    Vec qe = q, pe = p;
    for (int i = 0; i < d; ++i) {
        qe(i) = q(i) + h;
        const double fp = f_(t, qe, p);
        qe(i) = q(i) - h;
        const double fm = f_(t, qe, p);
        qe(i) = q(i);
        Hq(i) = (fp - fm) / (2.0 * h);

        pe(i) = p(i) + h;
        const double gp = f_(t, q, pe);
        pe(i) = p(i) - h;
        const double gm = f_(t, q, pe);
        pe(i) = p(i);
        Hp(i) = (gp - gm) / (2.0 * h);
    }
}

void FiniteDiffHamiltonian::hessian(double t, const Vec& q, const Vec& p,
                                    Mat& Hqq, Mat& Hqp, Mat& Hpp) const {
    const int d = static_cast<int>(q.size());
    const double h = coord_step(h_fd_, q, p);
    Hqq.resize(d, d);
    Hqp.resize(d, d);
    Hpp.resize(d, d);

    // x index 0..2d-1 spans (q, p).
    auto eval = [&](int i, double si, int j, double sj) {
        Vec qe = q, pe = p;
        auto bump = [&](int k, double s) {
            if (k < d) {
                qe(k) += s * h;
            } else {
                pe(k - d) += s * h;
            }
        };
        bump(i, si);
        bump(j, sj);
        return f_(t, qe, pe);
    };
    const double f0 = f_(t, q, p);
    auto pure_second = [&](int i) {
        return (eval(i, 1, i, 0) - 2.0 * f0 + eval(i, -1, i, 0)) / (h * h);
    };

    Mat full(2 * d, 2 * d);
    double worst = 0.0;
    for (int i = 0; i < 2 * d; ++i) full(i, i) = pure_second(i);
    for (int i = 0; i < 2 * d; ++i) {
        for (int j = 0; j < i; ++j) {
            const double stencil = (eval(i, 1, j, 1) - eval(i, 1, j, -1) -
                                    eval(i, -1, j, 1) + eval(i, -1, j, -1)) /
                                   (4.0 * h * h);
            // Independent route through the diagonal second difference; the
            // two agree to fd truncation order on a consistent C^2 function.
            const double diag =
                (eval(i, 1, j, 1) - 2.0 * f0 + eval(i, -1, j, -1)) / (h * h);
            const double via_diag = 0.5 * (diag - full(i, i) - full(j, j));
            worst = std::max(worst, std::abs(stencil - via_diag));
            full(i, j) = stencil;
            full(j, i) = stencil;
        }
    }
    const double scale = std::max(1.0, full.cwiseAbs().maxCoeff());
    if (worst > 1e-3 * scale) {
        throw NumericalError(
            "finite-difference Hessian inconsistent beyond fd tolerance: " +
            std::to_string(worst));
    }
    Hqq = full.topLeftCorner(d, d);
    Hqp = full.topRightCorner(d, d);
    Hpp = full.bottomRightCorner(d, d);
}

namespace {

class QuadraticIsotropicH : public Hamiltonian {
public:
    QuadraticIsotropicH(double cq, double cp) : cq_(cq), cp_(cp) {}
    double value(double, const Vec& q, const Vec& p) const override {
        return 0.5 * (cq_ * q.squaredNorm() + cp_ * p.squaredNorm());
    }
    void gradient(double, const Vec& q, const Vec& p, Vec& Hq,
                  Vec& Hp) const override {
        Hq = cq_ * q;
        Hp = cp_ * p;
    }
    void hessian(double, const Vec& q, const Vec&, Mat& Hqq, Mat& Hqp,
                 Mat& Hpp) const override {
        const int d = static_cast<int>(q.size());
        Hqq = cq_ * Mat::Identity(d, d);
        Hqp = Mat::Zero(d, d);
        Hpp = cp_ * Mat::Identity(d, d);
    }

private:
    double cq_, cp_;
};

class TrigPotentialH : public Hamiltonian {
public:
    explicit TrigPotentialH(std::vector<TrigTerm> terms)
        : terms_(std::move(terms)) {}
    double value(double, const Vec& q, const Vec& p) const override {
        double v = 0.5 * p.squaredNorm();
        for (const auto& term : terms_) {
            const double phase = dot_mode(term, q);
            v += term.cos_coeff * std::cos(phase) + term.sin_coeff * std::sin(phase);
        }
        return v;
    }
    void gradient(double, const Vec& q, const Vec& p, Vec& Hq,
                  Vec& Hp) const override {
        Hq = Vec::Zero(q.size());
        for (const auto& term : terms_) {
            const double phase = dot_mode(term, q);
            const double dv =
                -term.cos_coeff * std::sin(phase) + term.sin_coeff * std::cos(phase);
            for (int i = 0; i < q.size(); ++i) Hq(i) += dv * term.mode[i];
        }
        Hp = p;
    }
    void hessian(double, const Vec& q, const Vec&, Mat& Hqq, Mat& Hqp,
                 Mat& Hpp) const override {
        const int d = static_cast<int>(q.size());
        Hqq = Mat::Zero(d, d);
        for (const auto& term : terms_) {
            const double phase = dot_mode(term, q);
            const double d2v =
                -term.cos_coeff * std::cos(phase) - term.sin_coeff * std::sin(phase);
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) {
                    Hqq(i, j) += d2v * term.mode[i] * term.mode[j];
                }
            }
        }
        Hqp = Mat::Zero(d, d);
        Hpp = Mat::Identity(d, d);
    }

private:
    static double dot_mode(const TrigTerm& term, const Vec& q) {
        double s = 0.0;
        for (int i = 0; i < q.size(); ++i) s += term.mode[i] * q(i);
        return s;
    }
    std::vector<TrigTerm> terms_;
};

class QuadraticFormH : public Hamiltonian {
public:
    explicit QuadraticFormH(Mat S) : S_(0.5 * (S + S.transpose())) {}
    double value(double, const Vec& q, const Vec& p) const override {
        Vec x(q.size() + p.size());
        x << q, p;
        return 0.5 * x.dot(S_ * x);
    }
    void gradient(double, const Vec& q, const Vec& p, Vec& Hq,
                  Vec& Hp) const override {
        const int d = static_cast<int>(q.size());
        Vec x(2 * d);
        x << q, p;
        Vec g = S_ * x;
        Hq = g.head(d);
        Hp = g.tail(d);
    }
    void hessian(double, const Vec& q, const Vec&, Mat& Hqq, Mat& Hqp,
                 Mat& Hpp) const override {
        const int d = static_cast<int>(q.size());
        Hqq = S_.topLeftCorner(d, d);
        Hqp = S_.topRightCorner(d, d);
        Hpp = S_.bottomRightCorner(d, d);
    }

private:
    Mat S_;
};

std::function<double(double)> constant_rate(double a) {
    if (a == 0.0) return nullptr;
    return [a](double) { return a; };
}

}  // namespace

ConformalSystem harmonic_system(int d, double a) {
    return ConformalSystem{d, std::make_shared<QuadraticIsotropicH>(1.0, 1.0),
                           constant_rate(a), std::vector<bool>(d, false),
                           "harmonic"};
}

ConformalSystem free_system(int d, double a) {
    return ConformalSystem{d, std::make_shared<QuadraticIsotropicH>(0.0, 1.0),
                           constant_rate(a), std::vector<bool>(d, false),
                           "free"};
}

ConformalSystem damped_pendulum_system(double a) {
    // H = p^2/2 - cos q on T*S^1.
    std::vector<TrigTerm> terms{TrigTerm{{1}, -1.0, 0.0}};
    return ConformalSystem{1, std::make_shared<TrigPotentialH>(std::move(terms)),
                           constant_rate(a), {true}, "damped_pendulum"};
}

ConformalSystem discounted_tonelli_system(int d, std::vector<TrigTerm> potential,
                                          double a) {
    for (const auto& t : potential) {
        if (static_cast<int>(t.mode.size()) != d) {
            throw ConfigError("discounted_tonelli: mode vector length != d");
        }
    }
    return ConformalSystem{d, std::make_shared<TrigPotentialH>(std::move(potential)),
                           constant_rate(a), std::vector<bool>(d, true),
                           "discounted_tonelli"};
}

ConformalSystem linear_system(const Mat& S, double a) {
    if (S.rows() != S.cols() || S.rows() % 2 != 0) {
        throw ConfigError("linear: S must be symmetric 2d x 2d");
    }
    const int d = static_cast<int>(S.rows()) / 2;
    return ConformalSystem{d, std::make_shared<QuadraticFormH>(S),
                           constant_rate(a), std::vector<bool>(d, false),
                           "linear"};
}

ConformalSystem torus_coupled_system(double eps, double a) {
    // H = |p|^2/2 - cos q1 - eps cos(q1 - q2) on T*T^2.
    std::vector<TrigTerm> terms{TrigTerm{{1, 0}, -1.0, 0.0},
                                TrigTerm{{1, -1}, -eps, 0.0}};
    ConformalSystem sys{2, std::make_shared<TrigPotentialH>(std::move(terms)),
                        constant_rate(a), {true, true}, "torus_coupled"};
    return sys;
}

Vec vector_field(const ConformalSystem& sys, double t, const Vec& x) {
    const int d = sys.d;
    if (x.size() != 2 * d) {
        throw DimensionError("vector_field: state size mismatch");
    }
    Vec Hq, Hp;
    sys.H->gradient(t, x.head(d), x.tail(d), Hq, Hp);
    Vec out(2 * d);
    out.head(d) = Hp;
    out.tail(d) = -Hq - sys.rate_at(t) * x.tail(d);
    if (!out.allFinite()) {
        throw NumericalError("vector_field: evaluation failed at t = " +
                             std::to_string(t));
    }
    return out;
}

Mat vector_field_jacobian(const ConformalSystem& sys, double t, const Vec& x) {
    const int d = sys.d;
    Mat Hqq, Hqp, Hpp;
    sys.H->hessian(t, x.head(d), x.tail(d), Hqq, Hqp, Hpp);
    Mat DX(2 * d, 2 * d);
    DX.topLeftCorner(d, d) = Hqp.transpose();      // d_q (dH/dp)
    DX.topRightCorner(d, d) = Hpp;                 // d_p (dH/dp)
    DX.bottomLeftCorner(d, d) = -Hqq;              // d_q (-dH/dq - a p)
    DX.bottomRightCorner(d, d) =
        -Hqp - sys.rate_at(t) * Mat::Identity(d, d);
    return DX;
}

Mat twist_block(const ConformalSystem& sys, double t, const Vec& x) {
    const int d = sys.d;
    Mat Hqq, Hqp, Hpp;
    sys.H->hessian(t, x.head(d), x.tail(d), Hqq, Hqp, Hpp);
    return Hpp;
}

double Trajectory::conformal_factor(int i) const {
    return std::exp(-rate_integral[static_cast<std::size_t>(i)]);
}

double TangentTrajectory::conformal_defect(int i) const {
    const Mat& M = tangents[static_cast<std::size_t>(i)];
    const int d = static_cast<int>(M.rows()) / 2;
    // gram(i, j) = omega(M e_i, M e_j); the target is the gram of the
    // identity scaled by the conformal factor.
    Mat gram = M.topRows(d).transpose() * M.bottomRows(d) -
               M.bottomRows(d).transpose() * M.topRows(d);
    Mat target = Mat::Zero(2 * d, 2 * d);
    target.topRightCorner(d, d) = Mat::Identity(d, d);
    target.bottomLeftCorner(d, d) = -Mat::Identity(d, d);
    return (gram - conformal_factor(i) * target).norm();
}

namespace {

// Preallocated buffers so the inner loop stays allocation-free.
struct StepWork {
    Vec x, k1, k2, k3, k4, tmp, Hq, Hp;
    Mat M, m1, m2, m3, m4, mtmp, DX, Hqq, Hqp, Hpp;

    void init(int d, bool with_tangent) {
        x.resize(2 * d);
        for (Vec* v : {&k1, &k2, &k3, &k4, &tmp}) v->resize(2 * d);
        Hq.resize(d);
        Hp.resize(d);
        if (with_tangent) {
            for (Mat* m : {&M, &m1, &m2, &m3, &m4, &mtmp, &DX}) {
                m->resize(2 * d, 2 * d);
            }
            for (Mat* m : {&Hqq, &Hqp, &Hpp}) m->resize(d, d);
        }
    }
};

void field_into(const ConformalSystem& sys, double t, const Vec& x, StepWork& w,
                Vec& out) {
    const int d = sys.d;
    sys.H->gradient(t, x.head(d), x.tail(d), w.Hq, w.Hp);
    out.head(d) = w.Hp;
    out.tail(d) = -w.Hq - sys.rate_at(t) * x.tail(d);
}

void jacobian_into(const ConformalSystem& sys, double t, const Vec& x,
                   StepWork& w) {
    const int d = sys.d;
    sys.H->hessian(t, x.head(d), x.tail(d), w.Hqq, w.Hqp, w.Hpp);
    w.DX.topLeftCorner(d, d) = w.Hqp.transpose();
    w.DX.topRightCorner(d, d) = w.Hpp;
    w.DX.bottomLeftCorner(d, d) = -w.Hqq;
    w.DX.bottomRightCorner(d, d) = -w.Hqp;
    w.DX.bottomRightCorner(d, d).diagonal().array() -= sys.rate_at(t);
}

template <bool WithTangent>
void rk4_step(const ConformalSystem& sys, double t, double h, StepWork& w,
              double& rate_int) {
    field_into(sys, t, w.x, w, w.k1);
    if constexpr (WithTangent) {
        jacobian_into(sys, t, w.x, w);
        w.m1.noalias() = w.DX * w.M;
    }

    w.tmp = w.x + 0.5 * h * w.k1;
    field_into(sys, t + 0.5 * h, w.tmp, w, w.k2);
    if constexpr (WithTangent) {
        jacobian_into(sys, t + 0.5 * h, w.tmp, w);
        w.mtmp = w.M + 0.5 * h * w.m1;
        w.m2.noalias() = w.DX * w.mtmp;
    }

    w.tmp = w.x + 0.5 * h * w.k2;
    field_into(sys, t + 0.5 * h, w.tmp, w, w.k3);
    if constexpr (WithTangent) {
        jacobian_into(sys, t + 0.5 * h, w.tmp, w);
        w.mtmp = w.M + 0.5 * h * w.m2;
        w.m3.noalias() = w.DX * w.mtmp;
    }

    w.tmp = w.x + h * w.k3;
    field_into(sys, t + h, w.tmp, w, w.k4);
    if constexpr (WithTangent) {
        jacobian_into(sys, t + h, w.tmp, w);
        w.mtmp = w.M + h * w.m3;
        w.m4.noalias() = w.DX * w.mtmp;
    }

    w.x += (h / 6.0) * (w.k1 + 2.0 * (w.k2 + w.k3) + w.k4);
    if constexpr (WithTangent) {
        w.M += (h / 6.0) * (w.m1 + 2.0 * (w.m2 + w.m3) + w.m4);
    }
    // Same RK4 quadrature for the rate integral.
    const double a1 = sys.rate_at(t);
    const double a2 = sys.rate_at(t + 0.5 * h);
    const double a4 = sys.rate_at(t + h);
    rate_int += (h / 6.0) * (a1 + 4.0 * a2 + a4);
}

// Steps for a fixed-step run over [t0, t1]; t1 < t0 integrates backwards.
int step_count(double t0, double t1, double dt) {
    if (dt <= 0.0) throw ConfigError("flow: dt must be positive");
    if (t1 == t0) return 0;
    return std::max(
        1, static_cast<int>(std::ceil(std::abs(t1 - t0) / dt - 1e-9)));
}

template <bool WithTangent, class Traj>
void integrate(const ConformalSystem& sys, const Vec& x0, double t0, double t1,
               double dt, Traj& out) {
    if (x0.size() != 2 * sys.d) {
        throw DimensionError("flow: initial state size mismatch");
    }
    const int n = step_count(t0, t1, dt);
    const double h = (n == 0) ? 0.0 : (t1 - t0) / n;
    StepWork w;
    w.init(sys.d, WithTangent);
    w.x = x0;
    if constexpr (WithTangent) w.M = Mat::Identity(2 * sys.d, 2 * sys.d);
    double rate_int = 0.0;

    out.times.reserve(n + 1);
    out.states.reserve(n + 1);
    out.rate_integral.reserve(n + 1);
    out.times.push_back(t0);
    out.states.push_back(w.x);
    out.rate_integral.push_back(0.0);
    if constexpr (WithTangent) {
        out.tangents.reserve(n + 1);
        out.tangents.push_back(w.M);
    }

    for (int i = 0; i < n; ++i) {
        const double t = t0 + i * h;
        rk4_step<WithTangent>(sys, t, h, w, rate_int);
        if (!w.x.allFinite()) {
            throw NumericalError("flow: non-finite state at t = " +
                                 std::to_string(t + h));
        }
        if constexpr (WithTangent) {
            if (!w.M.allFinite()) {
                throw NumericalError("tangent_flow: non-finite tangent at t = " +
                                     std::to_string(t + h));
            }
        }
        out.times.push_back(t0 + (i + 1) * h);
        out.states.push_back(w.x);
        out.rate_integral.push_back(rate_int);
        if constexpr (WithTangent) {
            out.tangents.push_back(w.M);
            if (i % 128 == 127 || i == n - 1) {
                out.max_checked_defect =
                    std::max(out.max_checked_defect,
                             out.conformal_defect(static_cast<int>(
                                 out.tangents.size() - 1)));
            }
        }
    }
    if constexpr (WithTangent) {
        out.conformal_warning =
            out.max_checked_defect > default_tols().conformal_tol;
    }
}

}  // namespace

Trajectory flow(const ConformalSystem& sys, const Vec& x0, double t0, double t1,
                double dt) {
    Trajectory out;
    integrate<false>(sys, x0, t0, t1, dt, out);
    return out;
}

TangentTrajectory tangent_flow(const ConformalSystem& sys, const Vec& x0,
                               double t0, double t1, double dt) {
    TangentTrajectory out;
    integrate<true>(sys, x0, t0, t1, dt, out);
    return out;
}

LagrangianFrame transport_frame(const Mat& M, const LagrangianFrame& L) {
    try {
        return LagrangianFrame::from_columns(M * L.columns());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("transport_frame: isotropy drift (") +
                             e.what() + ")");
    }
}

Vec reduced_state(const ConformalSystem& sys, const Vec& x) {
    Vec out = x;
    for (int i = 0; i < sys.d; ++i) {
        if (i < static_cast<int>(sys.angular.size()) && sys.angular[i]) {
            out(i) = std::fmod(out(i), 2.0 * kPi);
            if (out(i) < 0) out(i) += 2.0 * kPi;
        }
    }
    return out;
}

}  // namespace maslov
