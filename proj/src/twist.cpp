#include "maslov/twist.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "maslov/flowpath.hpp"

namespace maslov {

const char* to_string(TwistVerdict v) {
    switch (v) {
        case TwistVerdict::strict_twist: return "strict-twist";
        case TwistVerdict::semi_twist: return "semi-twist";
        case TwistVerdict::fail: return "fail";
    }
    return "?";
}

TwistCertificate twist_certificate(const ConformalSystem& sys,
                                   const TwistRegion& region,
                                   const TwistGrid& grid,
                                   const Tolerances& tols) {
    const int n = 2 * sys.d;
    if (region.lo.size() != n || region.hi.size() != n ||
        static_cast<int>(grid.points_per_dim.size()) != n) {
        throw DimensionError("twist_certificate: region/grid must span (q, p)");
    }
    if (!region.lo.allFinite() || !region.hi.allFinite()) {
        throw ConfigError("twist_certificate: region must be bounded");
    }
    for (int i = 0; i < n; ++i) {
        if (grid.points_per_dim[static_cast<std::size_t>(i)] < 1 ||
            region.hi(i) < region.lo(i)) {
            throw ConfigError("twist_certificate: malformed grid");
        }
    }

    long long total = 1;
    for (int c : grid.points_per_dim) total *= c;

    TwistCertificate cert;
    cert.min_eig = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;

    Vec x(n);
    std::vector<std::pair<double, Vec>> minima;  // (eig, (t, x)) candidates
    std::vector<double> min_ts;
    for (double t : region.times) {
        for (long long flat = 0; flat < total; ++flat) {
            long long rem = flat;
            for (int i = 0; i < n; ++i) {
                const int c = grid.points_per_dim[static_cast<std::size_t>(i)];
                const int k = static_cast<int>(rem % c);
                rem /= c;
                x(i) = (c == 1) ? 0.5 * (region.lo(i) + region.hi(i))
                                : region.lo(i) +
                                      (region.hi(i) - region.lo(i)) * k / (c - 1);
            }
            Mat B = twist_block(sys, t, x);
            Eigen::SelfAdjointEigenSolver<Mat> es(B, Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues().minCoeff();
            max_abs = std::max(max_abs, B.cwiseAbs().maxCoeff());
            ++cert.evaluated;
            if (lo < cert.min_eig - 1e-15) {
                cert.min_eig = lo;
                minima.clear();
            }
            if (lo <= cert.min_eig + 1e-15 && minima.size() < 8) {
                minima.emplace_back(lo, x);
                min_ts.push_back(t);
            }
        }
    }
    cert.margin = tols.twist_margin_rel * (1.0 + max_abs);
    if (cert.min_eig > cert.margin) {
        cert.verdict = TwistVerdict::strict_twist;
    } else if (cert.min_eig >= -cert.margin) {
        cert.verdict = TwistVerdict::semi_twist;
    } else {
        cert.verdict = TwistVerdict::fail;
    }
    for (std::size_t i = 0; i < minima.size(); ++i) {
        cert.witnesses.push_back(
            TwistWitness{min_ts[i], minima[i].second, minima[i].first});
    }
    return cert;
}

SymmetricForm evolved_vertical_height(const ConformalSystem& sys, const Vec& x0,
                                      double t0, double t, double dt,
                                      const Tolerances& tols) {
    const int d = sys.d;
    if (t == t0) {
        return make_symmetric_form(Mat::Zero(d, d), tols);
    }
    TangentTrajectory traj = tangent_flow(sys, x0, t0, t, dt);
    const Mat& M = traj.tangents.back();
    Mat b = M.topRightCorner(d, d);
    Mat dd = M.bottomRightCorner(d, d);
    Eigen::JacobiSVD<Mat> svd(dd);
    if (svd.singularValues().minCoeff() <= tols.rank_tol) {
        throw NumericalError(
            "evolved_vertical_height: d_t is singular (the evolved vertical "
            "crossed the horizontal); not regularizing");
    }
    Mat Q = b * dd.inverse();
    return make_symmetric_form(0.5 * (Q + Q.transpose()), tols);
}

AuditReport nonpositivity_audit(const ConformalSystem& sys,
                                const std::vector<AuditSample>& samples,
                                double dt, const PathOptions& opts) {
    AuditReport rep;
    rep.total = static_cast<int>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const AuditSample& s = samples[i];
        FlowPath fp(sys, s.x0, s.L0, 0.0, s.horizon, FlowPathOptions{dt, 0, {}});
        const LagrangianFrame end = fp.frame_at_index(fp.trajectory().steps());
        if (vertical_intersection_dim(s.L0, opts.tols.rank_tol) > 0 ||
            vertical_intersection_dim(end, opts.tols.rank_tol) > 0) {
            ++rep.skipped;
            continue;
        }
        const int mi = maslov_index(fp.path(), opts);
        ++rep.histogram[mi];
        if (mi > 0) rep.violations.push_back(static_cast<int>(i));
    }
    return rep;
}

}  // namespace maslov
