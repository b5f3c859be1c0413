#pragma once

// Unitary description of Lagrangian subspaces under the identification
// z = q + i p (so J e_q = e_p, the vertical is i R^d and the reference
// Lagrangian for all angles is the horizontal H = J V = R^d).

#include <vector>

#include "maslov/linalg.hpp"
#include "maslov/types.hpp"

namespace maslov {

/// The d angles of a Lagrangian relative to the horizontal, each in
/// (-pi/2, pi/2], sorted ascending.
struct AngleSpectrum {
    std::vector<double> angles;

    int dim() const { return static_cast<int>(angles.size()); }
    double sum() const;
    /// Count of angles within tol of pi/2 (mod pi): equals dim(L cap V).
    int near_vertical_count(double tol = default_tols().angle_tol) const;
};

/// Value of the determinant-squared map on the Lagrangian Grassmannian,
/// |value| = 1.
struct DeltaValue {
    Complex value;
    double arg;  // principal argument in (-pi, pi]
};

/// Unitary d x d matrix Z = A_q + i A_p for the stored orthonormal frame A;
/// the real span of Z's columns is L.
CMat unitary_frame(const LagrangianFrame& L);

/// Souriau map W = Z Z^T: complex symmetric unitary, independent of the
/// frame representative; eigenvalues e^{2 i theta_j}.
CMat souriau(const LagrangianFrame& L);

/// Angle spectrum of L: half-arguments of the eigenvalues of souriau(L),
/// branch (-pi/2, pi/2], eigenvalues within 1e-12 of -1 mapping to pi/2.
AngleSpectrum angles(const LagrangianFrame& L);

/// Delta(L) = (-1)^d det(Z)^2, cross-checked against the angle-sum formula
/// exp(2 i sum theta_j) exp(i d pi) to 1e-9. Throws NumericalError when the
/// two routes disagree.
DeltaValue delta(const LagrangianFrame& L);

/// Same value without the cross-check; used in sampling loops.
Complex delta_fast(const LagrangianFrame& L);

}  // namespace maslov
