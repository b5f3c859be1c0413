#include <doctest.h>

#include <cmath>

#include "maslov/corpus.hpp"
#include "maslov/twist.hpp"

using namespace maslov;

namespace {

TwistRegion box(int d, double r) {
    TwistRegion region;
    region.lo = Vec::Constant(2 * d, -r);
    region.hi = Vec::Constant(2 * d, r);
    return region;
}

}  // namespace

TEST_CASE("twist certificates for the canonical examples") {
    TwistGrid grid{{7, 7}};
    // H = p^2/2 + V(q): d2H/dp2 = 1 everywhere.
    const TwistCertificate convex =
        twist_certificate(damped_pendulum_system(0.1), box(1, 3.0), grid);
    CHECK(convex.verdict == TwistVerdict::strict_twist);
    CHECK(convex.min_eig == doctest::Approx(1.0));

    // H = -p^2/2 fails.
    Mat S = Mat::Zero(2, 2);
    S(1, 1) = -1.0;
    const TwistCertificate neg =
        twist_certificate(linear_system(S, 0.0), box(1, 1.0), grid);
    CHECK(neg.verdict == TwistVerdict::fail);

    // H = p^4/4 on a region containing p = 0: min eig 3 p^2 = 0.
    ConformalSystem quartic;
    quartic.d = 1;
    quartic.H = std::make_shared<FiniteDiffHamiltonian>(
        [](double, const Vec&, const Vec& p) {
            return 0.25 * std::pow(p(0), 4);
        });
    quartic.angular = {false};
    quartic.name = "quartic";
    const TwistCertificate semi =
        twist_certificate(quartic, box(1, 1.0), grid);
    CHECK(semi.verdict == TwistVerdict::semi_twist);
    CHECK(std::abs(semi.min_eig) < 1e-6);
}

TEST_CASE("evolved vertical height closed forms") {
    // Free motion from t0 = 0: matrix t I.
    const SymmetricForm f =
        evolved_vertical_height(free_system(1), Vec::Zero(2), 0.0, 1.3, 1e-3);
    CHECK(f.matrix(0, 0) == doctest::Approx(1.3).epsilon(1e-10));

    // t = t0 gives the zero form.
    const SymmetricForm z =
        evolved_vertical_height(free_system(2), Vec::Zero(4), 0.5, 0.5, 1e-3);
    CHECK(z.matrix.cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.nullity == 2);

    // Harmonic: b_t d_t^{-1} = tan(t) I; d_t singular at t = pi/2.
    const SymmetricForm h =
        evolved_vertical_height(harmonic_system(1), Vec::Zero(2), 0.0, 0.4, 1e-3);
    CHECK(h.matrix(0, 0) == doctest::Approx(std::tan(0.4)).epsilon(1e-8));
    CHECK_THROWS_AS(evolved_vertical_height(harmonic_system(1), Vec::Zero(2), 0.0,
                                            kPi / 2, 1e-4),
                    NumericalError);
}

TEST_CASE("height derivative at t0 is the twist block") {
    Vec x0(2);
    x0 << 0.6, -0.4;
    const ConformalSystem sys = damped_pendulum_system(0.1);
    const double h = 1e-3;
    const Mat fwd = evolved_vertical_height(sys, x0, 0.0, h, h / 64).matrix;
    const Mat bwd = evolved_vertical_height(sys, x0, 0.0, -h, h / 64).matrix;
    const Mat deriv = (fwd - bwd) / (2.0 * h);
    CHECK((deriv - twist_block(sys, 0.0, x0)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("height sign law under strict twist") {
    // Positive definite just above t0, negative definite just below.
    Vec x0(2);
    x0 << 0.2, 0.9;
    const ConformalSystem sys = damped_pendulum_system(0.2);
    for (double w : {1e-4, 1e-3, 1e-2}) {
        const SymmetricForm fwd = evolved_vertical_height(sys, x0, 0.0, w, w / 64);
        CHECK(fwd.index == 0);
        CHECK(fwd.nullity == 0);
        const SymmetricForm bwd = evolved_vertical_height(sys, x0, 0.0, -w, w / 64);
        CHECK(bwd.index == 1);
        CHECK(bwd.nullity == 0);
    }
}

TEST_CASE("nonpositivity audit on strict-twist systems") {
    // Harmonic oscillator over one period: every line picks up index -2.
    const ConformalSystem harm = harmonic_system(1);
    std::vector<AuditSample> lines;
    for (int k = 0; k < 100; ++k) {
        lines.push_back(AuditSample{Vec::Zero(2), random_lagrangian(1, 3000 + k),
                                    2.0 * kPi});
    }
    AuditReport rep = nonpositivity_audit(harm, lines, 1e-3);
    CHECK(rep.violations.empty());
    CHECK(rep.histogram.size() == 1);
    CHECK(rep.histogram.begin()->first == -2);

    // Free motion with horizontal frames stays at zero.
    std::vector<AuditSample> flats;
    for (int k = 0; k < 10; ++k) {
        Vec x0(2);
        x0 << 0.1 * k, 0.3;
        flats.push_back(AuditSample{x0, LagrangianFrame::horizontal(1), 5.0});
    }
    AuditReport flat_rep = nonpositivity_audit(free_system(1), flats, 1e-3);
    CHECK(flat_rep.violations.empty());
    CHECK(flat_rep.histogram.at(0) == 10);

    // Random samples over the damped pendulum: all indices <= 0.
    const ConformalSystem pend = damped_pendulum_system(0.1);
    AuditReport pend_rep = nonpositivity_audit(
        pend, corpus::random_audit_samples(pend, 100, 77, 10.0), 1e-3);
    CHECK(pend_rep.violations.empty());
}
