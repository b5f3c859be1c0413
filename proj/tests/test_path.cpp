#include <doctest.h>

#include <cmath>

#include "maslov/corpus.hpp"
#include "maslov/flowpath.hpp"
#include "maslov/path.hpp"

using namespace maslov;

namespace {

// Closed-form clockwise rotation family of the harmonic oscillator.
Mat harmonic_rotation(double t) {
    Mat M(2, 2);
    M << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    return M;
}

LagrangianPath harmonic_path(double theta0, double t0, double t1, int samples) {
    Mat cols(2, 1);
    cols << std::cos(theta0), std::sin(theta0);
    return matrix_family_path([](double t) { return harmonic_rotation(t); },
                              LagrangianFrame::from_columns(cols), t0, t1,
                              samples);
}

}  // namespace

TEST_CASE("constant paths have zero angular index") {
    const LagrangianFrame L = random_lagrangian(2, 3);
    std::vector<double> t{0.0, 0.5, 1.0};
    std::vector<LagrangianFrame> f{L, L, L};
    const LagrangianPath path(t, f);
    CHECK(angular_mi(path) == doctest::Approx(0.0));
    if (vertical_intersection_dim(L) == 0) {
        CHECK(maslov_index(path) == 0);
    }
}

TEST_CASE("harmonic half period winds by minus one") {
    // The line rotates clockwise by pi, so Delta = e^{2 i phi} winds by -2 pi.
    const LagrangianPath path = harmonic_path(0.0, 0.0, kPi, 64);
    CHECK(angular_mi(path) == doctest::Approx(-1.0).epsilon(1e-9));
    // Reversal is antisymmetric.
    CHECK(angular_mi(path.reversed()) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("harmonic full period: MI = -2 by both implementations") {
    for (double theta0 : {0.0, 0.3, -0.7, 1.2}) {
        const LagrangianPath path = harmonic_path(theta0, 0.0, 2.0 * kPi, 128);
        const IndexReport rep = maslov_index_report(path);
        CHECK(rep.mi.has_value());
        CHECK(*rep.mi == -2);
        CHECK(rep.alpha_mi == doctest::Approx(-2.0).epsilon(1e-9));
        CHECK(std::abs(rep.residual) < 1e-9);

        const IndexReport cross = crossing_mi(path);
        CHECK(*cross.mi == -2);
        REQUIRE(cross.crossings.size() == 2);
        CHECK(cross.crossings[0].sign == -1);
        CHECK(cross.crossings[1].sign == -1);
    }
}

TEST_CASE("harmonic crossing times match the rotation oracle") {
    // Line at angle theta0 = 0 crosses the vertical when t = pi/2 + k pi.
    const LagrangianPath path = harmonic_path(0.0, 0.0, 2.0 * kPi, 256);
    const IndexReport rep = crossing_mi(path);
    REQUIRE(rep.crossings.size() == 2);
    CHECK(rep.crossings[0].time == doctest::Approx(kPi / 2).epsilon(1e-8));
    CHECK(rep.crossings[1].time == doctest::Approx(3 * kPi / 2).epsilon(1e-8));
}

TEST_CASE("paths transverse to the cycle have zero index") {
    // Free motion keeps a horizontal-graph frame away from the vertical.
    const LagrangianPath path = flow_path(
        free_system(1), (Vec(2) << 0.0, 1.0).finished(),
        LagrangianFrame::horizontal(1), 0.0, 100.0, FlowPathOptions{1e-2, 0, {}});
    CHECK(maslov_index(path) == 0);
    const IndexReport rep = crossing_mi(path);
    CHECK(*rep.mi == 0);
    CHECK(rep.crossings.empty());
}

TEST_CASE("endpoints on the singular cycle are rejected") {
    const LagrangianPath path = harmonic_path(kPi / 2, 0.0, 1.0, 32);
    CHECK_THROWS_AS(maslov_index(path), TransversalityError);
}

TEST_CASE("aliasing is detected on non-refinable undersampled paths") {
    // One full turn sampled at four points: each step moves arg Delta by
    // 4 pi / 3, beyond the unwrap guard, and nothing can be refined.
    std::vector<double> times;
    std::vector<LagrangianFrame> frames;
    for (int i = 0; i < 4; ++i) {
        const double t = 2.0 * kPi * i / 3;
        Mat cols(2, 1);
        cols << std::cos(0.2 + t), std::sin(0.2 + t);
        times.push_back(t);
        frames.push_back(LagrangianFrame::from_columns(cols));
    }
    const LagrangianPath path(times, frames);
    CHECK_THROWS_AS(angular_mi(path), AliasingError);
}

TEST_CASE("concatenation is additive") {
    const LagrangianPath p1 = harmonic_path(0.1, 0.0, 2.0, 64);
    const LagrangianPath p2 = harmonic_path(0.1, 2.0, 5.0, 64);
    // p2 starts where p1 ends only if its initial frame matches; rebuild it
    // from the rotated line.
    Mat cols(2, 1);
    cols << std::cos(0.1), std::sin(0.1);
    const LagrangianFrame L0 = LagrangianFrame::from_columns(cols);
    auto family = [](double t) { return harmonic_rotation(t); };
    const LagrangianPath whole = matrix_family_path(family, L0, 0.0, 5.0, 128);
    const LagrangianPath joined =
        concatenate(matrix_family_path(family, L0, 0.0, 2.0, 64),
                    matrix_family_path(family, L0, 2.0, 5.0, 64));
    CHECK(angular_mi(joined) == doctest::Approx(angular_mi(whole)).epsilon(1e-10));
    CHECK(maslov_index(joined) == maslov_index(whole));
    CHECK(maslov_index(joined) ==
          maslov_index(matrix_family_path(family, L0, 0.0, 2.0, 64)) +
              maslov_index(matrix_family_path(family, L0, 2.0, 5.0, 64)));
}

TEST_CASE("closed loops have integer angular index") {
    for (int k = 0; k < 8; ++k) {
        const int d = 1 + k % 3;
        const Mat J = standard_J(d);
        auto family = [J](double t) { return expm_fixed(t * J); };
        const LagrangianFrame L0 = random_lagrangian(d, 70 + k);
        const LagrangianPath loop = matrix_family_path(family, L0, 0.0, kPi, 96);
        const double alpha = angular_mi(loop);
        CHECK(std::abs(alpha - std::llround(alpha)) < 1e-9);
        // exp(pi J) = -Id fixes every subspace: the loop is closed and each
        // angle advances by pi, so the winding equals d.
        CHECK(std::llround(alpha) == d);
    }
}

TEST_CASE("identity and crossing implementations agree on flow paths") {
    int tested = 0;
    for (int k = 0; k < 30; ++k) {
        const int d = 1 + k % 3;
        const auto sample = corpus::random_flow_sample(d, 900 + k, 4.0);
        try {
            const LagrangianPath path =
                flow_path(sample.sys, sample.x0, sample.L0, 0.0, sample.horizon,
                          FlowPathOptions{1e-3, 0, {}});
            const IndexReport a = maslov_index_report(path);
            const IndexReport b = crossing_mi(path);
            CHECK(*a.mi == *b.mi);
            CHECK(std::abs(a.alpha_mi - b.alpha_mi) < 1e-12);
            ++tested;
        } catch (const TransversalityError&) {
        } catch (const DegenerateCrossingError&) {
        }
    }
    CHECK(tested >= 15);
}

TEST_CASE("simultaneous crossings: crossing_mi refuses, the identity does not") {
    // Isotropic rotation in d = 2 from the horizontal pushes both angles
    // through pi/2 at the same instant (a crossing through the singular
    // locus of the cycle, not its regular part).
    const int d = 2;
    const Mat J = standard_J(d);
    auto family = [J](double t) { return expm_fixed(-t * J); };  // clockwise
    const LagrangianPath path = matrix_family_path(
        family, LagrangianFrame::horizontal(d), 0.0, 2.0 * kPi, 256);
    CHECK_THROWS_AS(crossing_mi(path), DegenerateCrossingError);
    // The rounding identity is insensitive: each plane contributes -2.
    const IndexReport rep = maslov_index_report(path);
    CHECK(*rep.mi == -4);
    CHECK(rep.alpha_mi == doctest::Approx(-4.0).epsilon(1e-9));
}

TEST_CASE("residual tolerance misconfiguration is reported") {
    PathOptions strict;
    strict.tols.residual_tol = 1e-18;  // below round-off: must trip
    const LagrangianPath path = harmonic_path(0.3, 0.0, 2.0 * kPi, 128);
    CHECK_THROWS_AS(maslov_index(path, strict), NumericalError);
}

TEST_CASE("concatenation rejects mismatched junctions") {
    const LagrangianPath p1 = harmonic_path(0.1, 0.0, 1.0, 32);
    const LagrangianPath p2 = harmonic_path(0.9, 1.0, 2.0, 32);
    CHECK_THROWS_AS(concatenate(p1, p2), DimensionError);
    const LagrangianPath p3 = harmonic_path(0.1, 2.0, 3.0, 32);
    CHECK_THROWS_AS(concatenate(p1, p3), DimensionError);
}

TEST_CASE("crossing signs flip with the orientation hook") {
    PathOptions flipped;
    flipped.crossing_orientation = -1;
    const LagrangianPath path = harmonic_path(0.0, 0.0, 2.0 * kPi, 128);
    const IndexReport rep = crossing_mi(path, flipped);
    CHECK(*rep.mi == 2);  // deliberately wrong, used by the selftest mutation
}

TEST_CASE("vertical translations preserve the index") {
    const auto sample = corpus::random_flow_sample(1, 4242, 4.0);
    const LagrangianPath path = flow_path(sample.sys, sample.x0, sample.L0, 0.0,
                                          sample.horizon,
                                          FlowPathOptions{1e-3, 0, {}});
    Mat T = Mat::Identity(2, 2);
    T(1, 0) = 0.9;  // dp += 0.9 dq
    const LagrangianPath moved = map_path(path, [&T](const LagrangianFrame& L) {
        return LagrangianFrame::from_columns(T * L.columns());
    });
    try {
        CHECK(maslov_index(path) == maslov_index(moved));
    } catch (const TransversalityError&) {
        // the fixed sample is transverse; if not, the test is vacuous
    }
}
