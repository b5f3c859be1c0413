#include "maslov/selftest.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "maslov/angles.hpp"
#include "maslov/corpus.hpp"
#include "maslov/io.hpp"
#include "maslov/scan.hpp"
#include "maslov/twist.hpp"

namespace maslov {

namespace {

using corpus::uniform;

struct Ctx {
    SelftestOptions opts;
    PathOptions path_opts;
    int scale(int full, int quick) const { return opts.quick ? quick : full; }
};

using CheckFn = std::function<bool(const Ctx&, std::string&)>;

// ---- sympl-linalg ---------------------------------------------------------

bool check_isotropy_random(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(1000, 100);
    double worst = 0.0;
    for (int seed = 0; seed < n; ++seed) {
        const int d = 1 + seed % 4;
        const LagrangianFrame L = random_lagrangian(d, static_cast<std::uint64_t>(seed));
        Mat gram = L.q_block().transpose() * L.p_block() -
                   L.p_block().transpose() * L.q_block();
        worst = std::max(worst, gram.cwiseAbs().maxCoeff());
    }
    detail = "max isotropy defect " + format_double(worst);
    return worst <= default_tols().iso_tol;
}

bool check_height_cocycle(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(60, 12);
    double worst = 0.0;
    int tested = 0;
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 3;
        const LagrangianFrame V = LagrangianFrame::vertical(d);
        try {
            const LagrangianFrame L1 = random_lagrangian(d, 3 * static_cast<std::uint64_t>(k));
            const LagrangianFrame L2 = random_lagrangian(d, 3 * static_cast<std::uint64_t>(k) + 1);
            const LagrangianFrame L3 = random_lagrangian(d, 3 * static_cast<std::uint64_t>(k) + 2);
            const Mat q13 = height(V, L1, L3).matrix;
            const Mat q12 = height(V, L1, L2).matrix;
            const Mat q23 = height(V, L2, L3).matrix;
            worst = std::max(worst, (q13 - q12 - q23).cwiseAbs().maxCoeff());
            ++tested;
        } catch (const TransversalityError&) {
            continue;  // random frame met the vertical; skip
        }
    }
    detail = std::to_string(tested) + " triples, max cocycle defect " +
             format_double(worst);
    return tested > n / 2 && worst < 1e-9;
}

bool check_height_duality(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(60, 12);
    int tested = 0;
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 3;
        try {
            const LagrangianFrame V = random_lagrangian(d, 5 * static_cast<std::uint64_t>(k));
            const LagrangianFrame K = random_lagrangian(d, 5 * static_cast<std::uint64_t>(k) + 1);
            const LagrangianFrame L = random_lagrangian(d, 5 * static_cast<std::uint64_t>(k) + 2);
            const SymmetricForm qv = height(V, K, L);
            const SymmetricForm qk = height(K, V, L);
            if (qv.nullity > 0 || qk.nullity > 0) continue;
            if (qv.index != d - qk.index) {
                detail = "duality failed at sample " + std::to_string(k);
                return false;
            }
            ++tested;
        } catch (const TransversalityError&) {
            continue;
        }
    }
    detail = std::to_string(tested) + " transverse triples";
    return tested > n / 3;
}

bool check_signature_invariance(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(40, 10);
    int tested = 0;
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 3;
        try {
            const LagrangianFrame V = random_lagrangian(d, 7 * static_cast<std::uint64_t>(k));
            const LagrangianFrame K = random_lagrangian(d, 7 * static_cast<std::uint64_t>(k) + 1);
            const LagrangianFrame L = random_lagrangian(d, 7 * static_cast<std::uint64_t>(k) + 2);
            const Mat Phi = random_symplectic(d, 7 * static_cast<std::uint64_t>(k) + 3);
            const SymmetricForm before = height(V, K, L);
            const SymmetricForm after = height(
                LagrangianFrame::from_columns(Phi * V.columns()),
                LagrangianFrame::from_columns(Phi * K.columns()),
                LagrangianFrame::from_columns(Phi * L.columns()));
            if (before.index != after.index || before.nullity != after.nullity) {
                detail = "signature changed under a symplectic map, sample " +
                         std::to_string(k);
                return false;
            }
            ++tested;
        } catch (const TransversalityError&) {
            continue;
        }
    }
    detail = std::to_string(tested) + " conjugated triples";
    return tested > n / 3;
}

// Random coisotropic subspace: random symplectic image of a standard one.
CoisotropicData random_coisotropic(int d, int k, std::uint64_t seed) {
    Mat W(2 * d, k);
    W.setZero();
    const int s = k - d;  // q-directions kept
    for (int i = 0; i < s; ++i) W(i, i) = 1.0;
    for (int i = 0; i < d; ++i) W(d + i, s + i) = 1.0;
    return make_coisotropic(random_symplectic(d, seed) * W);
}

bool check_reduction_lagrangian(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(100, 20);
    int tested = 0;
    for (int k = 0; k < n; ++k) {
        const int d = 2 + k % 2;  // d in {2, 3}
        const int kk = d + 1 + k % (d - 1);
        try {
            const CoisotropicData W =
                random_coisotropic(d, kk, 11 * static_cast<std::uint64_t>(k));
            const LagrangianFrame L = random_lagrangian(d, 11 * static_cast<std::uint64_t>(k) + 5);
            const LagrangianFrame red = linear_reduce(W, L);
            if (red.dim() != W.reduced_dim()) {
                detail = "reduced dimension mismatch";
                return false;
            }
            if (!is_lagrangian(red.columns())) {
                detail = "reduced frame not Lagrangian";
                return false;
            }
            ++tested;
        } catch (const TransversalityError&) {
            continue;
        } catch (const NumericalError&) {
            continue;  // near-degenerate intersection; skip
        }
    }
    detail = std::to_string(tested) + " random (W, L) reductions";
    return tested > n / 2;
}

// ---- unitary-angles -------------------------------------------------------

bool check_frame_independence(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(30, 8);
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 4;
        const LagrangianFrame L = random_lagrangian(d, 13 * static_cast<std::uint64_t>(k));
        const Complex base = delta(L).value;
        const AngleSpectrum spec_base = angles(L);
        for (int r = 0; r < 10; ++r) {
            // Arbitrary invertible recombination of the columns.
            Mat R(d, d);
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) {
                    R(i, j) = uniform(static_cast<std::uint64_t>(k * 10 + r),
                                      static_cast<std::uint64_t>(i * d + j), -0.4, 0.4);
                }
            }
            R += 2.0 * Mat::Identity(d, d);  // diagonally dominant, invertible
            LagrangianFrame re = LagrangianFrame::from_columns(L.columns() * R);
            worst = std::max(worst, std::abs(delta(re).value - base));
            const AngleSpectrum spec_re = angles(re);
            for (int i = 0; i < d; ++i) {
                worst = std::max(worst, std::abs(spec_re.angles[static_cast<std::size_t>(i)] -
                                                 spec_base.angles[static_cast<std::size_t>(i)]));
            }
        }
    }
    detail = "max deviation " + format_double(worst);
    return worst < 1e-9;
}

bool check_delta_consistency(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(1000, 120);
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 4;
        // delta() cross-checks det^2 against the angle-sum route at 1e-9.
        (void)delta(random_lagrangian(d, 17 * static_cast<std::uint64_t>(k)));
    }
    detail = std::to_string(n) + " frames, both routes agree";
    return true;
}

bool check_vertical_count(const Ctx&, std::string& detail) {
    for (int d = 1; d <= 3; ++d) {
        for (int k = 0; k <= d; ++k) {
            Mat F = Mat::Zero(2 * d, d);
            for (int i = 0; i < k; ++i) F(d + i, i) = 1.0;          // e_p
            for (int i = k; i < d; ++i) F(i, i) = 1.0;              // e_q
            const LagrangianFrame L = LagrangianFrame::from_columns(F);
            if (vertical_intersection_dim(L) != k ||
                angles(L).near_vertical_count() != k) {
                detail = "mismatch at d=" + std::to_string(d) +
                         " k=" + std::to_string(k);
                return false;
            }
        }
    }
    detail = "intersection dims 0..d match the pi/2 angle count (d <= 3)";
    return true;
}

// ---- maslov-path ----------------------------------------------------------

bool check_loop_integrality(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(20, 6);
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 3;
        const Mat Phi = random_symplectic(d, 19 * static_cast<std::uint64_t>(k));
        const Mat Phi_inv = Phi.inverse();
        const Mat J = standard_J(d);
        auto family = [Phi, Phi_inv, J](double t) {
            return Mat(Phi * expm_fixed(t * J) * Phi_inv);
        };
        const LagrangianFrame L0 = random_lagrangian(d, 19 * static_cast<std::uint64_t>(k) + 1);
        LagrangianPath loop = matrix_family_path(family, L0, 0.0, kPi, 64);
        const double alpha = angular_mi(loop, ctx.path_opts);
        worst = std::max(worst, std::abs(alpha - std::llround(alpha)));
    }
    detail = "max distance of loop alphaMI to an integer: " + format_double(worst);
    return worst < ctx.path_opts.tols.residual_tol;
}

bool check_concatenation(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(30, 8);
    int tested = 0;
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 3;
        const auto sample = corpus::random_flow_sample(d, 23 * static_cast<std::uint64_t>(k) + 2, 3.0);
        FlowPath fp(sample.sys, sample.x0, sample.L0, 0.0, 2.0,
                    FlowPathOptions{1e-3, 0, {1.0}});
        try {
            LagrangianPath whole = fp.path();
            LagrangianPath p1 = fp.subpath(0.0, 1.0);
            LagrangianPath p2 = fp.subpath(1.0, 2.0);
            const double a_whole = angular_mi(whole, ctx.path_opts);
            const double a_sum = angular_mi(p1, ctx.path_opts) +
                                 angular_mi(p2, ctx.path_opts);
            if (std::abs(a_whole - a_sum) > 1e-9) {
                detail = "alphaMI not additive at sample " + std::to_string(k);
                return false;
            }
            const int mi_whole = maslov_index(whole, ctx.path_opts);
            const int mi_sum = maslov_index(p1, ctx.path_opts) +
                               maslov_index(p2, ctx.path_opts);
            if (mi_whole != mi_sum) {
                detail = "MI not additive at sample " + std::to_string(k);
                return false;
            }
            ++tested;
        } catch (const TransversalityError&) {
            continue;  // junction or endpoint on the cycle
        }
    }
    detail = std::to_string(tested) + " concatenations";
    return tested > n / 3;
}

bool check_vertical_translation(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(25, 8);
    int tested = 0;
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 3;
        const auto sample = corpus::random_flow_sample(d, 29 * static_cast<std::uint64_t>(k) + 1, 3.0);
        Mat B(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j <= i; ++j) {
                const double v = uniform(static_cast<std::uint64_t>(k), 1000 + static_cast<std::uint64_t>(i * d + j), -1.5, 1.5);
                B(i, j) = v;
                B(j, i) = v;
            }
        }
        Mat T = Mat::Identity(2 * d, 2 * d);
        T.bottomLeftCorner(d, d) = B;
        try {
            LagrangianPath path = flow_path(sample.sys, sample.x0, sample.L0,
                                            0.0, sample.horizon,
                                            FlowPathOptions{1e-3, 0, {}});
            LagrangianPath moved = map_path(path, [T](const LagrangianFrame& L) {
                return LagrangianFrame::from_columns(T * L.columns());
            });
            if (maslov_index(path, ctx.path_opts) !=
                maslov_index(moved, ctx.path_opts)) {
                detail = "vertical translation changed MI at sample " +
                         std::to_string(k);
                return false;
            }
            ++tested;
        } catch (const TransversalityError&) {
            continue;
        }
    }
    detail = std::to_string(tested) + " translated paths";
    return tested > n / 3;
}

bool check_reduction_invariance(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(40, 10);
    const int d = 3;
    // Standard coisotropic W with W_perp inside the vertical inside W.
    Mat Wc = Mat::Zero(2 * d, 5);
    Wc(0, 0) = 1.0;  // e_q1
    Wc(1, 1) = 1.0;  // e_q2
    for (int i = 0; i < d; ++i) Wc(d + i, 2 + i) = 1.0;
    const CoisotropicData W = make_coisotropic(Wc);

    int tested = 0;
    for (int k = 0; k < n; ++k) {
        const Mat X = standard_J(d) * [&] {
            Mat S(2 * d, 2 * d);
            for (int i = 0; i < 2 * d; ++i) {
                for (int j = 0; j <= i; ++j) {
                    const double v = uniform(static_cast<std::uint64_t>(k), 2000 + static_cast<std::uint64_t>(i * 2 * d + j), -0.8, 0.8);
                    S(i, j) = v;
                    S(j, i) = v;
                }
            }
            return S;
        }();
        auto family = [X](double t) { return expm_fixed(t * X); };
        const LagrangianFrame L0 = random_lagrangian(d, 31 * static_cast<std::uint64_t>(k) + 3);
        LagrangianPath path = matrix_family_path(family, L0, 0.0, 2.0, 160);

        // The path must stay transverse to W_perp throughout.
        bool avoids = true;
        for (int i = 0; i < path.samples() && avoids; ++i) {
            if (max_principal_cosine(path.frame(i).columns(), W.Wperp) >
                1.0 - 1e-4) {
                avoids = false;
            }
        }
        if (!avoids) continue;
        try {
            LagrangianPath reduced = map_path(path, [&W](const LagrangianFrame& L) {
                return linear_reduce(W, L);
            });
            if (maslov_index(path, ctx.path_opts) !=
                maslov_index(reduced, ctx.path_opts)) {
                detail = "MI changed under reduction at sample " + std::to_string(k);
                return false;
            }
            ++tested;
        } catch (const Error&) {
            continue;  // endpoint on a cycle or reduction degenerate
        }
    }
    detail = std::to_string(tested) + " reduced paths agree";
    return tested > n / 4;
}

bool check_crossing_agreement(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(60, 12);
    int tested = 0;
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 3;
        const auto sample = corpus::random_flow_sample(d, 37 * static_cast<std::uint64_t>(k), 4.0);
        try {
            LagrangianPath path =
                flow_path(sample.sys, sample.x0, sample.L0, 0.0, sample.horizon,
                          FlowPathOptions{1e-3, 0, {}});
            const int by_identity = maslov_index(path, ctx.path_opts);
            const IndexReport by_crossings = crossing_mi(path, ctx.path_opts);
            if (*by_crossings.mi != by_identity) {
                detail = "crossing count " + std::to_string(*by_crossings.mi) +
                         " != identity MI " + std::to_string(by_identity) +
                         " at sample " + std::to_string(k);
                return false;
            }
            ++tested;
        } catch (const TransversalityError&) {
            continue;
        } catch (const DegenerateCrossingError&) {
            continue;
        }
    }
    detail = std::to_string(tested) + " paths, both implementations agree";
    return tested > n / 2;
}

// ---- conformal-flow -------------------------------------------------------

bool check_conformality(const Ctx& ctx, std::string& detail) {
    std::vector<ConformalSystem> systems;
    for (double a : {0.0, 0.1, 0.5}) {
        systems.push_back(harmonic_system(1, a));
        systems.push_back(free_system(1, a));
        systems.push_back(damped_pendulum_system(a));
        systems.push_back(discounted_tonelli_system(
            1, {TrigTerm{{1}, -1.0, 0.0}, TrigTerm{{2}, 0.3, 0.0}}, a));
        Mat S = Mat::Zero(2, 2);
        S(0, 0) = 0.7;
        S(1, 1) = 1.0;
        systems.push_back(linear_system(S, a));
        systems.push_back(torus_coupled_system(0.4, a));
    }
    const double T = ctx.opts.quick ? 3.0 : 10.0;
    double worst = 0.0;
    for (const auto& sys : systems) {
        Vec x0 = Vec::Zero(2 * sys.d);
        x0(0) = 0.7;
        x0(sys.d) = 0.4;
        TangentTrajectory traj = tangent_flow(sys, x0, 0.0, T, 1e-3);
        for (int i = 0; i <= traj.steps(); i += 20) {
            worst = std::max(worst, traj.conformal_defect(i));
        }
        worst = std::max(worst, traj.conformal_defect(traj.steps()));
    }
    detail = "max conformal defect " + format_double(worst) + " over " +
             std::to_string(systems.size()) + " systems";
    return worst < default_tols().conformal_tol;
}

bool check_lagrangian_transport(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(20, 6);
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 3;
        const auto sample = corpus::random_flow_sample(d, 41 * static_cast<std::uint64_t>(k), 5.0);
        TangentTrajectory traj =
            tangent_flow(sample.sys, sample.x0, 0.0, sample.horizon, 1e-3);
        for (int i = 0; i <= traj.steps(); i += 100) {
            // from_columns validates isotropy; a throw fails the check.
            (void)transport_frame(traj.tangents[static_cast<std::size_t>(i)],
                                  sample.L0);
        }
    }
    detail = std::to_string(n) + " trajectories stay Lagrangian";
    return true;
}

bool check_rk4_order(const Ctx&, std::string& detail) {
    const ConformalSystem sys = harmonic_system(1, 0.0);
    Vec x0(2);
    x0 << 1.0, 0.0;
    auto terminal_error = [&](double dt) {
        Trajectory traj = flow(sys, x0, 0.0, 2.0 * kPi, dt);
        return (traj.states.back() - x0).norm();
    };
    const double e1 = terminal_error(2e-2);
    const double e2 = terminal_error(1e-2);
    const double ratio = e1 / e2;
    detail = "error ratio under dt halving: " + format_double(ratio);
    return ratio > 12.0 && ratio < 20.0;
}

bool check_dissipation(const Ctx&, std::string& detail) {
    const ConformalSystem sys = damped_pendulum_system(0.1);
    Vec x0(2);
    x0 << 0.1, 0.0;
    Trajectory traj = flow(sys, x0, 0.0, 10.0, 1e-3);
    auto energy = [&](const Vec& x) {
        return 0.5 * x(1) * x(1) - std::cos(x(0));
    };
    // d/dt H = -a p^2: compare the energy drop with the quadrature.
    double quad = 0.0;
    double prev_e = energy(traj.states.front());
    bool monotone = true;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        const double p_prev = traj.states[i - 1](1);
        const double p_cur = traj.states[i](1);
        const double h = traj.times[i] - traj.times[i - 1];
        quad += -0.1 * 0.5 * (p_prev * p_prev + p_cur * p_cur) * h;
        const double e = energy(traj.states[i]);
        if (e > prev_e + 1e-12) monotone = false;
        prev_e = e;
    }
    const double drop = energy(traj.states.back()) - energy(traj.states.front());
    detail = "energy drop " + format_double(drop) + ", quadrature " +
             format_double(quad);
    return monotone && std::abs(drop - quad) < 1e-6 * (1.0 + std::abs(drop));
}

// ---- twist-analysis -------------------------------------------------------

bool check_twist_certificates(const Ctx&, std::string& detail) {
    auto box = [](int d, double r) {
        TwistRegion region;
        region.lo = Vec::Constant(2 * d, -r);
        region.hi = Vec::Constant(2 * d, r);
        return region;
    };
    TwistGrid grid{{5, 5}};

    const TwistCertificate convex =
        twist_certificate(damped_pendulum_system(0.1), box(1, 3.0), grid);
    const TwistCertificate flipped = twist_certificate(
        linear_system((Mat(2, 2) << 0.0, 0.0, 0.0, -1.0).finished(), 0.0),
        box(1, 1.0), grid);
    // H = p^4 / 4 via a user Hamiltonian; min eig 3 p^2 = 0 at p = 0.
    ConformalSystem quartic;
    quartic.d = 1;
    quartic.H = std::make_shared<FiniteDiffHamiltonian>(
        [](double, const Vec&, const Vec& p) {
            return 0.25 * p(0) * p(0) * p(0) * p(0);
        });
    quartic.angular = {false};
    quartic.name = "quartic";
    const TwistCertificate semi = twist_certificate(quartic, box(1, 1.0), grid);

    detail = std::string("p^2/2+V: ") + to_string(convex.verdict) +
             ", -p^2/2: " + to_string(flipped.verdict) +
             ", p^4/4: " + to_string(semi.verdict);
    return convex.verdict == TwistVerdict::strict_twist &&
           flipped.verdict == TwistVerdict::fail &&
           semi.verdict == TwistVerdict::semi_twist;
}

bool check_twist_sign_law(const Ctx& ctx, std::string& detail) {
    const auto pool = corpus::strict_twist_pool();
    const int per_sys = ctx.scale(4, 2);
    double worst_derivative = 0.0;
    for (std::size_t si = 0; si < pool.size(); ++si) {
        const ConformalSystem& sys = pool[si];
        for (int k = 0; k < per_sys; ++k) {
            Vec x0(2 * sys.d);
            for (int i = 0; i < 2 * sys.d; ++i) {
                x0(i) = uniform(static_cast<std::uint64_t>(si * 100 + static_cast<std::size_t>(k)), static_cast<std::uint64_t>(i), -1.5, 1.5);
            }
            const double t0 = 0.0;
            for (double w : {1e-4, 1e-3, 1e-2}) {
                const SymmetricForm fwd =
                    evolved_vertical_height(sys, x0, t0, t0 + w, w / 64.0);
                const SymmetricForm bwd =
                    evolved_vertical_height(sys, x0, t0, t0 - w, w / 64.0);
                if (fwd.index != 0 || fwd.nullity != 0) {
                    detail = "forward height not positive definite (" + sys.name + ")";
                    return false;
                }
                if (bwd.index != sys.d || bwd.nullity != 0) {
                    detail = "backward height not negative definite (" + sys.name + ")";
                    return false;
                }
            }
            // d/dt (b d^{-1}) at t0 equals the twist block.
            const double h = 1e-3;
            const Mat fwd =
                evolved_vertical_height(sys, x0, t0, t0 + h, h / 64.0).matrix;
            const Mat bwd =
                evolved_vertical_height(sys, x0, t0, t0 - h, h / 64.0).matrix;
            const Mat deriv = (fwd - bwd) / (2.0 * h);
            const Mat expected = twist_block(sys, t0, x0);
            worst_derivative = std::max(
                worst_derivative, (deriv - expected).cwiseAbs().maxCoeff());
        }
    }
    detail = "max |d/dt height - d2H/dp2| = " + format_double(worst_derivative);
    return worst_derivative < 1e-4;
}

bool check_nonpositivity(const Ctx& ctx, std::string& detail) {
    const auto pool = corpus::strict_twist_pool();
    const int total = ctx.scale(1000, 80);
    const int per_sys = static_cast<int>(
        (static_cast<std::size_t>(total) + pool.size() - 1) / pool.size());
    long long violations = 0;
    long long skipped = 0;
    long long tested = 0;
    for (std::size_t si = 0; si < pool.size(); ++si) {
        const auto samples = corpus::random_audit_samples(
            pool[si], per_sys, 1000 + 37 * static_cast<std::uint64_t>(si), 10.0);
        AuditReport rep =
            nonpositivity_audit(pool[si], samples, 1e-3, ctx.path_opts);
        violations += static_cast<long long>(rep.violations.size());
        skipped += rep.skipped;
        tested += rep.total - rep.skipped;
    }
    detail = std::to_string(tested) + " samples, " + std::to_string(skipped) +
             " skipped, " + std::to_string(violations) + " violations";
    return violations == 0 && tested > total / 2;
}

// ---- asymptotic-scan ------------------------------------------------------

bool check_subspace_independence(const Ctx& ctx, std::string& detail) {
    const int n = ctx.scale(25, 8);
    double worst_pair = 0.0;
    double worst_alpha_mi = 0.0;
    int tested = 0;
    for (int k = 0; k < n; ++k) {
        const int d = 1 + k % 3;
        const auto sample = corpus::random_flow_sample(d, 43 * static_cast<std::uint64_t>(k), 8.0);
        const LagrangianFrame L2 = random_lagrangian(d, 43 * static_cast<std::uint64_t>(k) + 7);
        FlowPath fp1(sample.sys, sample.x0, sample.L0, 0.0, sample.horizon,
                     FlowPathOptions{1e-3, 0, {}});
        FlowPath fp2(sample.sys, sample.x0, L2, 0.0, sample.horizon,
                     FlowPathOptions{1e-3, 0, {}});
        const double a1 = angular_mi(fp1.path(), ctx.path_opts);
        const double a2 = angular_mi(fp2.path(), ctx.path_opts);
        worst_pair = std::max(worst_pair, std::abs(a1 - a2) / (8.0 * d));
        try {
            const IndexReport rep = maslov_index_report(fp1.path(), ctx.path_opts);
            worst_alpha_mi = std::max(
                worst_alpha_mi, std::abs(rep.alpha_mi - *rep.mi) / d);
            ++tested;
        } catch (const TransversalityError&) {
        }
    }
    detail = "max |alphaMI gap| / 8d = " + format_double(worst_pair) +
             ", max |alphaMI - MI| / d = " + format_double(worst_alpha_mi);
    return worst_pair < 1.0 && worst_alpha_mi < 1.0 && tested > 0;
}

bool check_scan_bounds(const Ctx& ctx, std::string& detail) {
    GraphSpec graph;
    graph.c = Vec::Zero(1);
    const ScanResult res =
        graph_scan(damped_pendulum_system(0.1), graph, ctx.scale(50, 12),
                   ctx.opts.quick ? 10.0 : 20.0, 1e-3, ctx.opts.threads,
                   ctx.path_opts);
    detail = std::to_string(res.points.size()) + " points, " +
             std::to_string(res.failures) + " failures, " +
             std::to_string(res.bound_violations) + " bound violations";
    return res.bound_violations == 0 && res.failures == 0 &&
           res.best_index >= 0;
}

bool check_asymptotic_rates(const Ctx& ctx, std::string& detail) {
    const double a = 0.1;
    const ConformalSystem sys = damped_pendulum_system(a);
    PathOptions opts = ctx.path_opts;

    // The saddle (pi, 0) is only a fixed point up to the rounding of pi, and
    // the defect grows like e^{lambda_u t}; stay well below the escape time
    // and seed the unstable eigendirection (the direction every frame
    // converges to), both read off the linearization.
    const double lambda_u = 0.5 * (-a + std::sqrt(a * a + 4.0));
    Vec saddle(2);
    saddle << kPi, 0.0;
    Mat unstable(2, 1);
    unstable << 1.0, lambda_u;
    const AsymptoticEstimate at_saddle = asymptotic_index(
        sys, saddle, LagrangianFrame::from_columns(unstable),
        {10.0, 20.0, 30.0}, 1e-3, opts);

    Vec sink(2);
    sink << 0.0, 0.0;
    const AsymptoticEstimate at_sink = asymptotic_index(
        sys, sink, LagrangianFrame::horizontal(1), {50.0, 100.0, 200.0}, 1e-3,
        opts);
    const double expected = -std::sqrt(4.0 - a * a) / (2.0 * kPi);

    detail = "saddle rate " + format_double(at_saddle.rate) + ", sink rate " +
             format_double(at_sink.rate) + " (oracle " + format_double(expected) +
             ")";
    return std::abs(at_saddle.rate) < 1e-3 &&
           std::abs(at_sink.rate - expected) < 1e-2 && at_sink.converged;
}

// ---- cli-io ---------------------------------------------------------------

Json harmonic_index_config(const std::string& out_path) {
    Json cfg;
    cfg["system"]["builtin"] = "harmonic";
    cfg["system"]["params"]["d"] = 1;
    cfg["initial"]["state"] = {1.0, 0.0};
    cfg["initial"]["frame"] = "horizontal";
    cfg["time"]["t0"] = 0.0;
    cfg["time"]["t1"] = 2.0 * kPi;
    cfg["time"]["dt"] = 1e-3;
    cfg["output"]["path"] = out_path;
    cfg["output"]["stride"] = 10;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool check_csv_stability(const Ctx&, std::string& detail) {
    namespace fs = std::filesystem;
    const std::string base =
        (fs::temp_directory_path() / "maslov_selftest_idx").string();
    cmd_index(harmonic_index_config(base + "1.csv"));
    cmd_index(harmonic_index_config(base + "2.csv"));
    const std::string a = slurp(base + "1.csv");
    const std::string b = slurp(base + "2.csv");
    detail = std::to_string(a.size()) + " bytes per run";
    return !a.empty() && a == b;
}

bool check_json_roundtrip(const Ctx&, std::string& detail) {
    namespace fs = std::filesystem;
    const std::string path =
        (fs::temp_directory_path() / "maslov_selftest_asym.json").string();
    Json cfg;
    cfg["system"]["builtin"] = "damped_pendulum";
    cfg["system"]["params"]["rate"] = 0.1;
    cfg["initial"]["state"] = {0.0, 0.0};
    cfg["initial"]["frame"] = "horizontal";
    cfg["time"]["dt"] = 1e-3;
    cfg["asymptotic"]["horizons"] = {5.0, 10.0};
    cfg["output"]["path"] = path;
    cmd_asymptotic(cfg);
    const std::string text = slurp(path);
    const Json parsed = Json::parse(text);
    const std::string re_emitted = parsed.dump(2) + "\n";
    detail = std::to_string(text.size()) + " bytes round-tripped";
    return !text.empty() && text == re_emitted;
}

}  // namespace

std::vector<CheckResult> run_selftest(const SelftestOptions& opts) {
    Ctx ctx;
    ctx.opts = opts;
    ctx.path_opts.crossing_orientation = opts.crossing_orientation;

    const std::vector<std::pair<const char*, CheckFn>> checks = {
        {"linalg.isotropy-random-frames", check_isotropy_random},
        {"linalg.height-cocycle", check_height_cocycle},
        {"linalg.height-duality", check_height_duality},
        {"linalg.signature-symplectic-invariance", check_signature_invariance},
        {"linalg.reduction-lagrangian", check_reduction_lagrangian},
        {"angles.frame-independence", check_frame_independence},
        {"angles.delta-consistency", check_delta_consistency},
        {"angles.vertical-intersection-count", check_vertical_count},
        {"path.loop-integrality", check_loop_integrality},
        {"path.concatenation-additivity", check_concatenation},
        {"path.vertical-translation-invariance", check_vertical_translation},
        {"path.reduction-invariance", check_reduction_invariance},
        {"path.crossing-agreement", check_crossing_agreement},
        {"flow.conformality", check_conformality},
        {"flow.lagrangian-transport", check_lagrangian_transport},
        {"flow.rk4-order", check_rk4_order},
        {"flow.dissipation", check_dissipation},
        {"twist.certificates", check_twist_certificates},
        {"twist.sign-law", check_twist_sign_law},
        {"twist.nonpositivity-audit", check_nonpositivity},
        {"scan.subspace-independence", check_subspace_independence},
        {"scan.alpha-mi-bound", check_scan_bounds},
        {"scan.asymptotic-rates", check_asymptotic_rates},
        {"io.csv-byte-stability", check_csv_stability},
        {"io.json-roundtrip", check_json_roundtrip},
    };

    std::vector<CheckResult> results;
    results.reserve(checks.size());
    for (const auto& [name, fn] : checks) {
        CheckResult r;
        r.name = name;
        const auto start = std::chrono::steady_clock::now();
        try {
            r.pass = fn(ctx, r.detail);
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        results.push_back(std::move(r));
    }
    return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results) {
        if (!r.pass) return false;
    }
    return true;
}

}  // namespace maslov
