#pragma once

// Symplectic linear algebra with one fixed convention:
//   omega(u, v) = u^T J v,  J = [[0, -I], [I, 0]]  in (q, p) block coordinates,
// i.e. omega = sum dq_i ^ dp_i = -d(p dq). The vertical V = span(e_p) is the
// reference Lagrangian of every index computation.

#include <cstdint>
#include <vector>

#include "maslov/types.hpp"

namespace maslov {

/// Standard symplectic matrix J (2d x 2d).
Mat standard_J(int d);

/// omega(u, v) = u^T J v for vectors in R^{2d}.
double omega(const Vec& u, const Vec& v);

/// A Lagrangian subspace of (R^{2d}, omega), stored as an orthonormal 2d x d
/// frame (thin QR with positive diagonal). The subspace is the datum; the
/// frame is just a canonical representative.
class LagrangianFrame {
public:
    /// Validates rank and isotropy, then canonicalizes.
    /// Throws DimensionError / NumericalError.
    static LagrangianFrame from_columns(const Mat& columns,
                                        const Tolerances& tols = default_tols());

    /// span(e_{q1}, ..., e_{qd}).
    static LagrangianFrame horizontal(int d);
    /// span(e_{p1}, ..., e_{pd}).
    static LagrangianFrame vertical(int d);
    /// Graph {p = S q} for symmetric S (d x d).
    static LagrangianFrame graph(const Mat& S);

    int dim() const { return d_; }
    const Mat& columns() const { return columns_; }
    /// Top (q) block of the orthonormal frame.
    Mat q_block() const { return columns_.topRows(d_); }
    /// Bottom (p) block.
    Mat p_block() const { return columns_.bottomRows(d_); }

    /// Subspace equality within tol (principal angles).
    bool same_subspace(const LagrangianFrame& other, double tol = 1e-9) const;

private:
    LagrangianFrame(int d, Mat columns) : d_(d), columns_(std::move(columns)) {}
    int d_;
    Mat columns_;  // orthonormal, 2d x d
};

/// A real quadratic form together with its inertia at tolerance sig_tol.
struct SymmetricForm {
    Mat matrix;    // symmetric n x n
    int index;     // eigenvalues < -sig_tol
    int nullity;   // eigenvalues in [-sig_tol, sig_tol]

    int dim() const { return static_cast<int>(matrix.rows()); }
    int positive_count() const { return dim() - index - nullity; }
};

/// Build a SymmetricForm from a matrix, computing the inertia.
/// Throws NumericalError if S is not symmetric to round-off.
SymmetricForm make_symmetric_form(const Mat& S,
                                  const Tolerances& tols = default_tols());

/// (index, nullity) of a symmetric matrix; see SymmetricForm.
std::pair<int, int> signature(const Mat& S,
                              const Tolerances& tols = default_tols());

/// True iff F spans a Lagrangian subspace: rank d and max|F^T J F| <= tol.
/// Throws DimensionError when rows != 2 * cols.
bool is_lagrangian(const Mat& F, double tol);
bool is_lagrangian(const Mat& F);  // default iso tolerance, relative

/// dim(span L cap V) where V is the standard vertical: the number of
/// singular values of the q block below tol.
int vertical_intersection_dim(const LagrangianFrame& L,
                              double tol = default_tols().rank_tol);

/// dim(span L cap span ref) for an arbitrary Lagrangian reference.
int intersection_dim(const LagrangianFrame& L, const LagrangianFrame& ref,
                     double tol = default_tols().rank_tol);

/// Largest principal-angle cosine between two subspaces given by orthonormal
/// frames; a value of 1 signals a nontrivial intersection.
double max_principal_cosine(const Mat& A, const Mat& B);

/// Height of L2 above L1 with respect to Vref: the quadratic form
///   v in E/Vref  ->  omega((P|_L1)^{-1} v, (P|_L2)^{-1} v),
/// expressed in the orthogonal-complement basis of Vref. Its kernel has the
/// dimension of L1 cap L2. Throws TransversalityError naming the offending
/// frame when L1 or L2 meets Vref.
SymmetricForm height(const LagrangianFrame& Vref, const LagrangianFrame& L1,
                     const LagrangianFrame& L2,
                     const Tolerances& tols = default_tols());

/// A coisotropic subspace W (d <= dim W <= 2d; the whole space is the
/// degenerate case) together with its omega-orthogonal W_perp (inside W).
struct CoisotropicData {
    int d;      // half-dimension of the ambient space
    Mat W;      // 2d x k orthonormal frame
    Mat Wperp;  // 2d x (2d - k) orthonormal frame

    int k() const { return static_cast<int>(W.cols()); }
    /// Half-dimension of the reduced space W / W_perp.
    int reduced_dim() const { return k() - d; }
};

/// Builds CoisotropicData from a spanning set of W, computing W_perp and
/// checking coisotropy (W_perp inside W). Throws NumericalError otherwise.
CoisotropicData make_coisotropic(const Mat& W_columns,
                                 const Tolerances& tols = default_tols());

/// Linear symplectic reduction: the frame of Pi_{W_perp}(L cap W) in a fixed
/// symplectic basis of W / W_perp. When the standard vertical V satisfies
/// W_perp inside V inside W, the basis is chosen so that the image of V is
/// the standard vertical of the reduced space. Throws TransversalityError if
/// L meets W_perp nontrivially.
LagrangianFrame linear_reduce(const CoisotropicData& W, const LagrangianFrame& L,
                              const Tolerances& tols = default_tols());

/// Reduced image of the standard vertical (requires W_perp inside V inside W).
LagrangianFrame reduce_vertical(const CoisotropicData& W,
                                const Tolerances& tols = default_tols());

/// Deterministic pseudo-random Lagrangian frame: a random symplectic matrix
/// (exponential of a random Hamiltonian matrix, scaling-and-squaring at fixed
/// order) applied to the horizontal.
LagrangianFrame random_lagrangian(int d, std::uint64_t seed);

/// Random symplectic matrix used by random_lagrangian; exposed for tests.
Mat random_symplectic(int d, std::uint64_t seed, double scale = 1.0);

/// exp(A) by scaling-and-squaring with a fixed-order Taylor kernel.
Mat expm_fixed(const Mat& A);

}  // namespace maslov
