// Acceptance harness: runs every acceptance criterion at its stated
// tolerance and prints one pass/fail line per criterion. Exit code 0 iff all
// pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "maslov/angles.hpp"
#include "maslov/corpus.hpp"
#include "maslov/io.hpp"
#include "maslov/scan.hpp"
#include "maslov/twist.hpp"

using namespace maslov;

namespace {

using corpus::uniform;

struct Criterion {
    std::string name;
    double time_limit;  // seconds; 0 = no limit
    std::function<bool(std::string&)> fn;
};

// 1. Harmonic-oscillator index over one period.
bool harmonic_index(std::string& detail) {
    FlowPath fp(harmonic_system(1), (Vec(2) << 1.0, 0.0).finished(),
                LagrangianFrame::horizontal(1), 0.0, 2.0 * kPi,
                FlowPathOptions{1e-3, 0, {}});
    const IndexReport rep = maslov_index_report(fp.path());
    detail = "MI = " + std::to_string(*rep.mi) +
             ", alphaMI = " + format_double(rep.alpha_mi);
    return *rep.mi == -2 && std::abs(rep.alpha_mi + 2.0) < 1e-6;
}

// 2. Transverse-path nullity: free motion, horizontal frame, horizon 100.
bool transverse_nullity(std::string& detail) {
    std::vector<double> checkpoints;
    for (int k = 1; k <= 100; ++k) checkpoints.push_back(k);
    FlowPathOptions fpo{1e-3, 0, checkpoints};
    FlowPath fp(free_system(1), (Vec(2) << 0.0, 1.0).finished(),
                LagrangianFrame::horizontal(1), 0.0, 100.0, fpo);
    const auto lift = unwrap_arg_delta(fp.path());
    const double theta0 = lift.front().theta;
    const double sum0 = angles(fp.initial_frame()).sum();
    int nonzero = 0;
    for (double tk : checkpoints) {
        const int gi = fp.grid_index(tk);
        const LagrangianFrame frame = fp.frame_at_index(gi);
        if (vertical_intersection_dim(frame) > 0) {
            ++nonzero;
            continue;
        }
        const double alpha =
            (lift_theta_at(lift, fp.grid_time(gi)) - theta0) / (2.0 * kPi);
        const double boundary = (angles(frame).sum() - sum0) / kPi;
        if (std::llround(alpha - boundary) != 0) ++nonzero;
    }
    detail = "100 checkpoints, " + std::to_string(nonzero) + " nonzero";
    return nonzero == 0;
}

// 3. alphaMI-MI identity and crossing agreement over 500 random flow paths.
bool identity_and_crossings(std::string& detail) {
    int done = 0, attempts = 0;
    double worst_residual = 0.0;
    while (done < 500 && attempts < 1200) {
        const int d = 1 + attempts % 3;
        const auto sample = corpus::random_flow_sample(
            d, 50000 + static_cast<std::uint64_t>(attempts), 4.0);
        ++attempts;
        try {
            const LagrangianPath path =
                flow_path(sample.sys, sample.x0, sample.L0, 0.0, sample.horizon,
                          FlowPathOptions{1e-3, 0, {}});
            const IndexReport rep = maslov_index_report(path);
            worst_residual = std::max(worst_residual, std::abs(rep.residual));
            if (std::abs(rep.residual) >= 1e-3) {
                detail = "residual " + format_double(rep.residual);
                return false;
            }
            const IndexReport cross = crossing_mi(path);
            if (*cross.mi != *rep.mi) {
                detail = "crossing " + std::to_string(*cross.mi) +
                         " != identity " + std::to_string(*rep.mi);
                return false;
            }
            ++done;
        } catch (const TransversalityError&) {
        } catch (const DegenerateCrossingError&) {
        }
    }
    detail = std::to_string(done) + " paths, max residual " +
             format_double(worst_residual);
    return done == 500;
}

// Shared corpus for criteria 4 and 6.
struct AuditedSample {
    int d;
    double alpha1, alpha2;  // two frames at the same base point
    std::vector<double> alpha_at;  // alphaMI at integer checkpoints (frame 1)
    std::vector<int> mi_at;        // MI at the same checkpoints
};

std::vector<AuditedSample> run_audit_corpus(int target) {
    const auto pool = corpus::strict_twist_pool();
    std::vector<AuditedSample> out;
    int attempts = 0;
    while (static_cast<int>(out.size()) < target && attempts < 3 * target) {
        const ConformalSystem& sys = pool[static_cast<std::size_t>(attempts) % pool.size()];
        const std::uint64_t seed = 90000 + static_cast<std::uint64_t>(attempts);
        ++attempts;
        Vec x0(2 * sys.d);
        for (int i = 0; i < 2 * sys.d; ++i) {
            x0(i) = uniform(seed, 500 + static_cast<std::uint64_t>(i), -2.0, 2.0);
        }
        const double horizon = std::floor(uniform(seed, 77, 1.0, 10.0)) + 0.5;
        const LagrangianFrame L1 = random_lagrangian(sys.d, seed * 3 + 1);
        const LagrangianFrame L2 = random_lagrangian(sys.d, seed * 3 + 2);

        FlowPathOptions fpo;
        fpo.dt = 1e-3;
        for (int k = 1; k <= static_cast<int>(horizon); ++k) {
            fpo.include_times.push_back(k);
        }
        try {
            FlowPath fp1(sys, x0, L1, 0.0, horizon, fpo);
            FlowPath fp2(sys, x0, L2, 0.0, horizon, fpo);
            AuditedSample rec;
            rec.d = sys.d;
            const auto lift1 = unwrap_arg_delta(fp1.path());
            const auto lift2 = unwrap_arg_delta(fp2.path());
            rec.alpha1 =
                (lift1.back().theta - lift1.front().theta) / (2.0 * kPi);
            rec.alpha2 =
                (lift2.back().theta - lift2.front().theta) / (2.0 * kPi);
            if (vertical_intersection_dim(L1) > 0) continue;
            const double sum0 = angles(L1).sum();
            for (double tk : fpo.include_times) {
                const int gi = fp1.grid_index(tk);
                const LagrangianFrame frame = fp1.frame_at_index(gi);
                if (vertical_intersection_dim(frame) > 0) continue;
                const double alpha =
                    (lift_theta_at(lift1, fp1.grid_time(gi)) -
                     lift1.front().theta) /
                    (2.0 * kPi);
                const double boundary = (angles(frame).sum() - sum0) / kPi;
                const double mi_real = alpha - boundary;
                const long long mi = std::llround(mi_real);
                if (std::abs(mi_real - mi) >= 1e-3) continue;
                rec.alpha_at.push_back(alpha);
                rec.mi_at.push_back(static_cast<int>(mi));
            }
            out.push_back(std::move(rec));
        } catch (const Error&) {
        }
    }
    return out;
}

std::vector<AuditedSample> g_corpus;  // filled by criterion 4, reused by 6

// 4. Twist non-positivity over 1000 samples.
bool twist_nonpositivity(std::string& detail) {
    g_corpus = run_audit_corpus(1000);
    long long violations = 0;
    long long checked = 0;
    for (const auto& rec : g_corpus) {
        for (int mi : rec.mi_at) {
            ++checked;
            if (mi > 0) ++violations;
        }
    }
    detail = std::to_string(g_corpus.size()) + " samples, " +
             std::to_string(checked) + " checkpoints, " +
             std::to_string(violations) + " violations";
    return g_corpus.size() == 1000 && violations == 0;
}

// 6. The 8d and d bounds over the same corpus.
bool index_bounds(std::string& detail) {
    if (g_corpus.empty()) g_corpus = run_audit_corpus(1000);
    long long violations = 0;
    double worst_pair = 0.0, worst_mi = 0.0;
    for (const auto& rec : g_corpus) {
        const double pair_gap = std::abs(rec.alpha1 - rec.alpha2);
        worst_pair = std::max(worst_pair, pair_gap / (8.0 * rec.d));
        if (pair_gap >= 8.0 * rec.d) ++violations;
        for (std::size_t i = 0; i < rec.mi_at.size(); ++i) {
            const double gap = std::abs(rec.alpha_at[i] - rec.mi_at[i]);
            worst_mi = std::max(worst_mi, gap / rec.d);
            if (gap >= rec.d) ++violations;
        }
    }
    detail = "max |alpha gap|/8d = " + format_double(worst_pair) +
             ", max |alpha - MI|/d = " + format_double(worst_mi) + ", " +
             std::to_string(violations) + " violations";
    return violations == 0;
}

// 5. Damped-pendulum asymptotic rates.
bool pendulum_saddle_rate(std::string& detail) {
    const double a = 0.1;
    const double lambda_u = 0.5 * (-a + std::sqrt(a * a + 4.0));
    Mat unstable(2, 1);
    unstable << 1.0, lambda_u;
    const AsymptoticEstimate est = asymptotic_index(
        damped_pendulum_system(a), (Vec(2) << kPi, 0.0).finished(),
        LagrangianFrame::from_columns(unstable), {10.0, 20.0, 30.0}, 1e-3);
    detail = "rate = " + format_double(est.rate);
    return std::abs(est.rate) < 1e-3;
}

bool pendulum_sink_rate(std::string& detail) {
    const double a = 0.1;
    const AsymptoticEstimate est = asymptotic_index(
        damped_pendulum_system(a), Vec::Zero(2), LagrangianFrame::horizontal(1),
        {50.0, 100.0, 200.0}, 1e-3);
    const double oracle = -std::sqrt(4.0 - a * a) / (2.0 * kPi);
    detail = "rate = " + format_double(est.rate) + ", oracle " +
             format_double(oracle);
    return std::abs(est.rate - oracle) < 1e-2;
}

// 7. Conformality of every builtin at the three rates.
bool conformality(std::string& detail) {
    double worst = 0.0;
    int systems = 0;
    for (double a : {0.0, 0.1, 0.5}) {
        std::vector<ConformalSystem> pool{
            harmonic_system(1, a),
            free_system(1, a),
            damped_pendulum_system(a),
            discounted_tonelli_system(
                1, {TrigTerm{{1}, -1.0, 0.0}, TrigTerm{{2}, 0.25, 0.0}}, a),
            torus_coupled_system(0.5, a),
        };
        Mat S = Mat::Zero(2, 2);
        S(0, 0) = 0.8;
        S(1, 1) = 1.0;
        pool.push_back(linear_system(S, a));
        for (const auto& sys : pool) {
            Vec x0 = Vec::Zero(2 * sys.d);
            x0(0) = 0.6;
            x0(sys.d) = 0.3;
            TangentTrajectory traj = tangent_flow(sys, x0, 0.0, 10.0, 1e-3);
            worst = std::max(worst, traj.conformal_defect(traj.steps()));
            ++systems;
        }
    }
    detail = std::to_string(systems) + " runs, max defect " +
             format_double(worst);
    return worst < 1e-6;
}

// 8. Reduction invariance for 200 random linear symplectic paths in d = 3.
bool reduction_invariance(std::string& detail) {
    const int d = 3;
    int done = 0, attempts = 0;
    while (done < 200 && attempts < 800) {
        const std::uint64_t seed = 70000 + static_cast<std::uint64_t>(attempts);
        ++attempts;
        // Admissible coisotropic: s of the q-directions plus the vertical,
        // pushed by a vertical-preserving symplectic map.
        const int s = 1 + static_cast<int>(attempts) % 2;
        Mat Wc = Mat::Zero(2 * d, d + s);
        for (int i = 0; i < s; ++i) Wc(i, i) = 1.0;
        for (int i = 0; i < d; ++i) Wc(d + i, s + i) = 1.0;
        Mat A = Mat::Identity(d, d);
        Mat B(d, d);
        for (int i = 0; i < d; ++i) {
            A(i, i) = 1.0 + 0.4 * uniform(seed, 600 + static_cast<std::uint64_t>(i), -1.0, 1.0);
            for (int j = 0; j <= i; ++j) {
                const double v = uniform(seed, 640 + static_cast<std::uint64_t>(i * d + j), -0.6, 0.6);
                B(i, j) = v;
                B(j, i) = v;
            }
        }
        Mat T = Mat::Zero(2 * d, 2 * d);  // vertical-preserving symplectic
        T.topLeftCorner(d, d) = A;
        T.bottomLeftCorner(d, d) = B * A;
        T.bottomRightCorner(d, d) = A.transpose().inverse();
        const CoisotropicData W = make_coisotropic(T * Wc);

        Mat Sym(2 * d, 2 * d);
        for (int i = 0; i < 2 * d; ++i) {
            for (int j = 0; j <= i; ++j) {
                const double v = uniform(seed, 700 + static_cast<std::uint64_t>(i * 2 * d + j), -0.8, 0.8);
                Sym(i, j) = v;
                Sym(j, i) = v;
            }
        }
        const Mat X = standard_J(d) * Sym;
        auto family = [X](double t) { return expm_fixed(t * X); };
        const LagrangianFrame L0 = random_lagrangian(d, seed * 5 + 2);
        const LagrangianPath path = matrix_family_path(family, L0, 0.0, 2.0, 160);

        // Admissibility: the path must stay transverse to W_perp throughout
        // (principal-angle test against the whole W_perp, not its basis).
        bool avoids = true;
        for (int i = 0; i < path.samples() && avoids; ++i) {
            if (max_principal_cosine(path.frame(i).columns(), W.Wperp) >
                1.0 - 1e-4) {
                avoids = false;
            }
        }
        if (!avoids) continue;
        try {
            const LagrangianPath reduced =
                map_path(path, [&W](const LagrangianFrame& L) {
                    return linear_reduce(W, L);
                });
            if (maslov_index(path) != maslov_index(reduced)) {
                detail = "MI changed under reduction (attempt " +
                         std::to_string(attempts) + ")";
                return false;
            }
            ++done;
        } catch (const Error&) {
        }
    }
    detail = std::to_string(done) + " paths agree";
    return done == 200;
}

// 9. Bounded-index point evidence on the damped-pendulum zero section.
bool bounded_index_scan(std::string& detail) {
    GraphSpec graph;
    graph.c = Vec::Zero(1);
    const ScanResult res = graph_scan(damped_pendulum_system(0.1), graph, 1000,
                                      100.0, 1e-3, thread_budget());
    if (res.best_index < 0) {
        detail = "no evaluable points";
        return false;
    }
    const ScanPoint& best =
        res.points[static_cast<std::size_t>(res.best_index)];
    detail = "best point q0 = " + format_double(best.x0(0)) +
             ", bound " + std::to_string(best.bound()) + ", " +
             std::to_string(res.failures) + " failures";
    return best.bound() <= 3 && res.bound_violations == 0;
}

// 10. Height cocycle and the evolved-height derivative law.
bool height_laws(std::string& detail) {
    double worst_cocycle = 0.0;
    int triples = 0;
    for (int k = 0; k < 60; ++k) {
        const int d = 1 + k % 3;
        const LagrangianFrame V = LagrangianFrame::vertical(d);
        try {
            const auto L1 = random_lagrangian(d, 600 + 3 * k);
            const auto L2 = random_lagrangian(d, 600 + 3 * k + 1);
            const auto L3 = random_lagrangian(d, 600 + 3 * k + 2);
            const Mat defect = height(V, L1, L3).matrix -
                               height(V, L1, L2).matrix -
                               height(V, L2, L3).matrix;
            worst_cocycle = std::max(worst_cocycle, defect.cwiseAbs().maxCoeff());
            ++triples;
        } catch (const TransversalityError&) {
        }
    }
    double worst_deriv = 0.0;
    for (const auto& sys : corpus::strict_twist_pool()) {
        Vec x0(2 * sys.d);
        for (int i = 0; i < 2 * sys.d; ++i) {
            x0(i) = uniform(static_cast<std::uint64_t>(sys.d), 800 + static_cast<std::uint64_t>(i), -1.0, 1.0);
        }
        const double h = 1e-3;
        const Mat fwd = evolved_vertical_height(sys, x0, 0.0, h, h / 64).matrix;
        const Mat bwd = evolved_vertical_height(sys, x0, 0.0, -h, h / 64).matrix;
        const Mat deriv = (fwd - bwd) / (2.0 * h);
        worst_deriv = std::max(
            worst_deriv,
            (deriv - twist_block(sys, 0.0, x0)).cwiseAbs().maxCoeff());
    }
    detail = std::to_string(triples) + " triples, max cocycle defect " +
             format_double(worst_cocycle) + "; max derivative defect " +
             format_double(worst_deriv);
    return triples >= 30 && worst_cocycle < 1e-9 && worst_deriv < 1e-4;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"harmonic-oscillator index (MI = -2, alphaMI = -2 +- 1e-6)", 1.0,
         harmonic_index},
        {"transverse-path nullity (free motion, MI = 0 throughout)", 1.0,
         transverse_nullity},
        {"alphaMI-MI identity + crossing agreement (500 paths)", 60.0,
         identity_and_crossings},
        {"twist non-positivity (1000 samples, MI <= 0)", 120.0,
         twist_nonpositivity},
        {"damped-pendulum saddle rate (0 +- 1e-3)", 10.0, pendulum_saddle_rate},
        {"damped-pendulum sink rate (-0.31791 +- 1e-2)", 10.0,
         pendulum_sink_rate},
        {"subspace 8d bound and |alphaMI - MI| < d (audit corpus)", 60.0,
         index_bounds},
        {"conformality of all builtins (defect < 1e-6 at T = 10)", 60.0,
         conformality},
        {"reduction invariance (200 linear paths, d = 3)", 30.0,
         reduction_invariance},
        {"bounded-index point evidence (scan n = 1000, T = 100, C <= 3)", 300.0,
         bounded_index_scan},
        {"height cocycle (1e-9) and derivative law (1e-4)", 30.0, height_laws},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto& c = criteria[i];
        std::string detail;
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        const bool in_budget = c.time_limit <= 0.0 || secs < c.time_limit;
        if (!in_budget) {
            detail += " [over time budget " + std::to_string(c.time_limit) + "s]";
        }
        const bool pass = ok && in_budget;
        std::printf("[%2zu/%zu] %s  (%.2fs)  %s -- %s\n", i + 1, criteria.size(),
                    pass ? "PASS" : "FAIL", secs, c.name.c_str(), detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    if (failures == 0) {
        std::printf("acceptance: all %zu criteria pass\n", criteria.size());
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", failures);
    return 1;
}
