#include "maslov/angles.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace maslov {

double AngleSpectrum::sum() const {
    double s = 0.0;
    for (double a : angles) s += a;
    return s;
}

int AngleSpectrum::near_vertical_count(double tol) const {
    int n = 0;
    for (double a : angles) {
        if (kPi / 2.0 - std::abs(a) <= tol) ++n;
    }
    return n;
}

CMat unitary_frame(const LagrangianFrame& L) {
    const int d = L.dim();
    CMat Z = L.q_block().cast<Complex>() +
             Complex(0, 1) * L.p_block().cast<Complex>();
    // Unitarity is a consequence of orthonormality + isotropy; verify.
    const double defect = (Z.adjoint() * Z - CMat::Identity(d, d)).norm();
    if (defect > 1e-10) {
        throw NumericalError("unitary_frame: unitarity defect " +
                             std::to_string(defect));
    }
    return Z;
}

CMat souriau(const LagrangianFrame& L) {
    CMat Z = unitary_frame(L);
    return Z * Z.transpose();
}

namespace {

// Half-argument of a unit-modulus eigenvalue, branch (-pi/2, pi/2].
double half_angle(const Complex& ev) {
    if (std::abs(ev + 1.0) < 1e-12) return kPi / 2.0;
    return 0.5 * std::arg(ev);  // std::arg in (-pi, pi]
}

}  // namespace

AngleSpectrum angles(const LagrangianFrame& L) {
    CMat W = souriau(L);
    Eigen::ComplexEigenSolver<CMat> es(W, /*computeEigenvectors=*/false);
    AngleSpectrum out;
    out.angles.reserve(L.dim());
    for (int i = 0; i < L.dim(); ++i) {
        const Complex ev = es.eigenvalues()(i);
        if (std::abs(std::abs(ev) - 1.0) > 1e-8) {
            throw NumericalError("angles: souriau eigenvalue off the unit circle");
        }
        out.angles.push_back(half_angle(ev));
    }
    std::sort(out.angles.begin(), out.angles.end());
    return out;
}

Complex delta_fast(const LagrangianFrame& L) {
    CMat Z = unitary_frame(L);
    const Complex det = Z.determinant();
    const double sign = (L.dim() % 2 == 0) ? 1.0 : -1.0;
    Complex v = sign * det * det;
    return v / std::abs(v);
}

DeltaValue delta(const LagrangianFrame& L) {
    const Complex v = delta_fast(L);
    // Cross-check against the angle-sum route.
    const AngleSpectrum sp = angles(L);
    const Complex via_angles =
        std::exp(Complex(0, 2.0 * sp.sum() + L.dim() * kPi));
    if (std::abs(v - via_angles) > 1e-9) {
        throw NumericalError("delta: det^2 and angle-sum routes disagree by " +
                             std::to_string(std::abs(v - via_angles)));
    }
    return DeltaValue{v, std::arg(v)};
}

}  // namespace maslov
