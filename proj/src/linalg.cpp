#include "maslov/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <random>

namespace maslov {

const Tolerances& default_tols() {
    static const Tolerances tols{};
    return tols;
}

Mat standard_J(int d) {
    Mat J = Mat::Zero(2 * d, 2 * d);
    J.topRightCorner(d, d) = -Mat::Identity(d, d);
    J.bottomLeftCorner(d, d) = Mat::Identity(d, d);
    return J;
}

double omega(const Vec& u, const Vec& v) {
    // omega = dq ^ dp: omega(u, v) = u_q . v_p - u_p . v_q.
    const int d = static_cast<int>(u.size()) / 2;
    return u.head(d).dot(v.tail(d)) - u.tail(d).dot(v.head(d));
}

namespace {

// omega(U, V) entrywise for column sets: U^T J' V with the dq^dp sign.
Mat omega_gram(const Mat& U, const Mat& V) {
    const int d = static_cast<int>(U.rows()) / 2;
    return U.topRows(d).transpose() * V.bottomRows(d) -
           U.bottomRows(d).transpose() * V.topRows(d);
}

// Thin QR with R diagonal made nonnegative (deterministic canonical frame).
Mat orthonormalize(const Mat& A) {
    Eigen::HouseholderQR<Mat> qr(A);
    Mat Q = qr.householderQ() * Mat::Identity(A.rows(), A.cols());
    Mat R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
    for (int j = 0; j < A.cols(); ++j) {
        if (R(j, j) < 0) Q.col(j) = -Q.col(j);
    }
    return Q;
}

double smallest_singular_value(const Mat& A) {
    if (A.rows() == 0 || A.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(A);
    return svd.singularValues().minCoeff();
}

// Orthonormal basis of the null space of A (columns), at relative tol.
Mat null_space(const Mat& A, double rel_tol) {
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = rel_tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return svd.matrixV().rightCols(A.cols() - rank);
}

}  // namespace

LagrangianFrame LagrangianFrame::from_columns(const Mat& columns,
                                              const Tolerances& tols) {
    if (columns.cols() < 1 || columns.rows() != 2 * columns.cols()) {
        throw DimensionError("LagrangianFrame: expected a 2d x d matrix, got " +
                             std::to_string(columns.rows()) + " x " +
                             std::to_string(columns.cols()));
    }
    const int d = static_cast<int>(columns.cols());
    const double scale = std::max(1.0, columns.norm());
    if (!columns.allFinite()) {
        throw NumericalError("LagrangianFrame: non-finite entries");
    }
    if (smallest_singular_value(columns) <= tols.rank_tol * scale) {
        throw NumericalError("LagrangianFrame: columns are rank deficient");
    }
    Mat Q = orthonormalize(columns);
    const double iso = omega_gram(Q, Q).cwiseAbs().maxCoeff();
    if (iso > tols.iso_tol) {
        throw NumericalError("LagrangianFrame: isotropy defect " +
                             std::to_string(iso) + " exceeds tolerance");
    }
    return LagrangianFrame(d, std::move(Q));
}

LagrangianFrame LagrangianFrame::horizontal(int d) {
    Mat F = Mat::Zero(2 * d, d);
    F.topRows(d) = Mat::Identity(d, d);
    return LagrangianFrame(d, std::move(F));
}

LagrangianFrame LagrangianFrame::vertical(int d) {
    Mat F = Mat::Zero(2 * d, d);
    F.bottomRows(d) = Mat::Identity(d, d);
    return LagrangianFrame(d, std::move(F));
}

LagrangianFrame LagrangianFrame::graph(const Mat& S) {
    const int d = static_cast<int>(S.rows());
    Mat F(2 * d, d);
    F.topRows(d) = Mat::Identity(d, d);
    F.bottomRows(d) = 0.5 * (S + S.transpose());
    return from_columns(F);
}

bool LagrangianFrame::same_subspace(const LagrangianFrame& other,
                                    double tol) const {
    if (d_ != other.d_) return false;
    // Frames orthonormal: subspaces agree iff all singular values of the
    // overlap matrix are 1.
    Eigen::JacobiSVD<Mat> svd(columns_.transpose() * other.columns_);
    return (svd.singularValues().array() > 1.0 - tol).all();
}

SymmetricForm make_symmetric_form(const Mat& S, const Tolerances& tols) {
    const double scale = std::max(1.0, S.norm());
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw NumericalError("make_symmetric_form: matrix is not symmetric");
    }
    Mat sym = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    const double band = tols.sig_tol_rel * std::max(1.0, sym.norm());
    int index = 0, nullity = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double ev = es.eigenvalues()(i);
        if (ev < -band) {
            ++index;
        } else if (ev <= band) {
            ++nullity;
        }
    }
    return SymmetricForm{std::move(sym), index, nullity};
}

std::pair<int, int> signature(const Mat& S, const Tolerances& tols) {
    SymmetricForm f = make_symmetric_form(S, tols);
    return {f.index, f.nullity};
}

bool is_lagrangian(const Mat& F, double tol) {
    if (F.cols() < 1 || F.rows() != 2 * F.cols()) {
        throw DimensionError("is_lagrangian: expected a 2d x d matrix");
    }
    const double scale = std::max(1.0, F.norm());
    if (smallest_singular_value(F) <= default_tols().rank_tol * scale) {
        return false;
    }
    // Evaluate isotropy on the orthonormalized frame so the test does not
    // depend on the conditioning of the representative.
    Mat Q = orthonormalize(F);
    return omega_gram(Q, Q).cwiseAbs().maxCoeff() <= tol;
}

bool is_lagrangian(const Mat& F) {
    return is_lagrangian(F, default_tols().iso_tol);
}

int vertical_intersection_dim(const LagrangianFrame& L, double tol) {
    Eigen::JacobiSVD<Mat> svd(L.q_block());
    int dim = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) < tol) ++dim;
    }
    return dim;
}

double max_principal_cosine(const Mat& A, const Mat& B) {
    if (A.cols() == 0 || B.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(A.transpose() * B);
    return svd.singularValues().maxCoeff();
}

int intersection_dim(const LagrangianFrame& L, const LagrangianFrame& ref,
                     double tol) {
    // ker of the projection of L onto the orthogonal complement of ref.
    Mat C = null_space(ref.columns().transpose(), 1e-12);  // complement of ref
    Eigen::JacobiSVD<Mat> svd(C.transpose() * L.columns());
    int dim = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) < tol) ++dim;
    }
    return dim;
}

SymmetricForm height(const LagrangianFrame& Vref, const LagrangianFrame& L1,
                     const LagrangianFrame& L2, const Tolerances& tols) {
    const int d = Vref.dim();
    if (L1.dim() != d || L2.dim() != d) {
        throw DimensionError("height: frame dimensions disagree");
    }
    if (intersection_dim(L1, Vref, tols.rank_tol) > 0) {
        throw TransversalityError("height: L1 is not transverse to Vref");
    }
    if (intersection_dim(L2, Vref, tols.rank_tol) > 0) {
        throw TransversalityError("height: L2 is not transverse to Vref");
    }
    // Basis of E/Vref: the g-orthogonal complement of Vref. For the standard
    // vertical this is the horizontal, so the d = 1 height of a graph
    // {p = s q} above the horizontal is (s).
    Mat C = null_space(Vref.columns().transpose(), 1e-12);  // 2d x d

    // Lift of each complement basis vector into span(Li) along Vref:
    // solve [Li | Vref] [x; y] = c  and take wi = Li x.
    Mat A(2 * d, 2 * d);
    auto lift = [&](const LagrangianFrame& L) {
        A.leftCols(d) = L.columns();
        A.rightCols(d) = Vref.columns();
        Mat coeff = A.partialPivLu().solve(C);
        return Mat(L.columns() * coeff.topRows(d));
    };
    Mat W1 = lift(L1);
    Mat W2 = lift(L2);
    Mat Q = omega_gram(W1, W2);
    return make_symmetric_form(0.5 * (Q + Q.transpose()), tols);
}

CoisotropicData make_coisotropic(const Mat& W_columns, const Tolerances& tols) {
    if (W_columns.rows() % 2 != 0) {
        throw DimensionError("make_coisotropic: ambient dimension must be even");
    }
    const int d = static_cast<int>(W_columns.rows()) / 2;
    Mat W = orthonormalize(W_columns);
    const int k = static_cast<int>(W.cols());
    // k = 2d is the degenerate whole-space case; reduction is the identity.
    if (k < d || k > 2 * d) {
        throw DimensionError("make_coisotropic: need d <= dim W <= 2d");
    }
    // W_perp = { v : omega(v, w) = 0 for all w in W }: with JW holding the
    // omega-duals of W's columns, that is the null space of JW^T.
    Mat JW(2 * d, k);
    JW.topRows(d) = -W.bottomRows(d);
    JW.bottomRows(d) = W.topRows(d);
    Mat Wperp = null_space(JW.transpose(), 1e-12);
    // Coisotropy: W_perp must lie inside W.
    if (Wperp.cols() > 0) {
        Mat resid = Wperp - W * (W.transpose() * Wperp);
        if (resid.cwiseAbs().maxCoeff() > tols.iso_tol * 10) {
            throw NumericalError("make_coisotropic: subspace is not coisotropic");
        }
    }
    return CoisotropicData{d, std::move(W), std::move(Wperp)};
}

namespace {

// Symplectic basis (e_i, f_i) of W/W_perp computed by Gram-Schmidt with
// omega on a complement of W_perp inside W. Returns 2d x 2m matrix
// [e_1..e_m f_1..f_m] of representatives with omega(e_i, f_j) = delta_ij.
Mat symplectic_basis_of_reduction(const CoisotropicData& W) {
    const int m = W.reduced_dim();
    // g-orthogonal complement of W_perp inside W; rank must be 2m.
    Eigen::JacobiSVD<Mat> svd(W.W - W.Wperp * (W.Wperp.transpose() * W.W),
                              Eigen::ComputeThinU);
    Mat basis(2 * W.d, 2 * m);
    int got = 0;
    for (int i = 0; i < svd.singularValues().size() && got < 2 * m; ++i) {
        if (svd.singularValues()(i) > 1e-10) {
            basis.col(got++) = svd.matrixU().col(i);
        }
    }
    if (got != 2 * m) {
        throw NumericalError("linear_reduce: complement extraction failed");
    }

    std::vector<Vec> pool;
    for (int i = 0; i < 2 * m; ++i) pool.push_back(basis.col(i));
    Mat out(2 * W.d, 2 * m);
    for (int pair = 0; pair < m; ++pair) {
        Vec e = pool.front();
        pool.erase(pool.begin());
        e.normalize();
        // Partner with the largest |omega(e, .)|.
        int best = -1;
        double best_val = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const double w = std::abs(omega(e, pool[i]));
            if (w > best_val) {
                best_val = w;
                best = static_cast<int>(i);
            }
        }
        if (best < 0 || best_val < 1e-12) {
            throw NumericalError("linear_reduce: symplectic Gram-Schmidt broke down");
        }
        Vec f = pool[best] / omega(e, pool[best]);
        pool.erase(pool.begin() + best);
        for (auto& v : pool) {
            v = v - omega(v, f) * e + omega(v, e) * f;
        }
        out.col(pair) = e;
        out.col(m + pair) = f;
    }
    return out;
}

// Coordinates of [u] in the symplectic basis: alpha_j = omega(u, f_j),
// beta_j = -omega(u, e_j), giving [u] = sum alpha_j e_j + beta_j f_j.
Vec reduced_coordinates(const Mat& basis, const Vec& u) {
    const int m = static_cast<int>(basis.cols()) / 2;
    Vec x(2 * m);
    for (int j = 0; j < m; ++j) {
        x(j) = omega(u, basis.col(m + j));
        x(m + j) = -omega(u, basis.col(j));
    }
    return x;
}

struct ReductionBasis {
    Mat basis;   // representatives in the ambient space
    CMat align;  // unitary correction mapping image(V) to the reduced vertical
    bool aligned;
};

CMat unitary_of_real(const Mat& R) {
    const int m = static_cast<int>(R.rows()) / 2;
    return R.topRows(m).cast<Complex>() +
           Complex(0, 1) * R.bottomRows(m).cast<Complex>();
}

Mat real_of_unitary(const CMat& U) {
    const int m = static_cast<int>(U.rows());
    Mat R(2 * m, U.cols());
    R.topRows(m) = U.real();
    R.bottomRows(m) = U.imag();
    return R;
}

// The fixed reduction basis for W, with the vertical alignment applied when
// the standard vertical satisfies W_perp c V c W.
ReductionBasis reduction_basis(const CoisotropicData& W, const Tolerances& tols) {
    ReductionBasis rb{symplectic_basis_of_reduction(W), CMat(), false};
    const int d = W.d;
    const int m = W.reduced_dim();
    // Does the vertical contain W_perp and sit inside W?
    Mat V = LagrangianFrame::vertical(d).columns();
    const bool wperp_in_V =
        (W.Wperp - V * (V.transpose() * W.Wperp)).cwiseAbs().maxCoeff() < 1e-10;
    const bool V_in_W =
        (V - W.W * (W.W.transpose() * V)).cwiseAbs().maxCoeff() < 1e-10;
    if (!wperp_in_V || !V_in_W) return rb;

    // Reduced image of V: Pi(V) spans a Lagrangian of dimension m.
    Mat img(2 * m, d);
    for (int j = 0; j < d; ++j) {
        img.col(j) = reduced_coordinates(rb.basis, V.col(j));
    }
    Eigen::JacobiSVD<Mat> svd(img, Eigen::ComputeThinU);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) > 1e-10) ++rank;
    }
    if (rank != m) return rb;
    Mat Vred_frame = svd.matrixU().leftCols(m);
    if (!is_lagrangian(Vred_frame, tols.iso_tol)) return rb;
    // Unitary U with U(Vred) = i R^m: U = i Z^* for a unitary frame Z of Vred.
    CMat Z = unitary_of_real(orthonormalize(Vred_frame));
    rb.align = Complex(0, 1) * Z.adjoint();
    rb.aligned = true;
    return rb;
}

LagrangianFrame reduce_with_basis(const ReductionBasis& rb,
                                  const CoisotropicData& W,
                                  const LagrangianFrame& L,
                                  const Tolerances& tols) {
    const int d = W.d;
    const int m = W.reduced_dim();
    if (L.dim() != d) {
        throw DimensionError("linear_reduce: frame dimension mismatch");
    }
    // Transversality to W_perp.
    Mat AB(2 * d, d + W.Wperp.cols());
    AB.leftCols(d) = L.columns();
    AB.rightCols(W.Wperp.cols()) = -W.Wperp;
    if (null_space(AB, 1e-10).cols() > 0) {
        throw TransversalityError("linear_reduce: L meets W_perp nontrivially");
    }
    // L cap W via the null space of [L | -W].
    Mat LW(2 * d, d + W.W.cols());
    LW.leftCols(d) = L.columns();
    LW.rightCols(W.W.cols()) = -W.W;
    Mat ns = null_space(LW, 1e-10);
    if (ns.cols() != m) {
        throw NumericalError("linear_reduce: dim(L cap W) = " +
                             std::to_string(ns.cols()) + ", expected " +
                             std::to_string(m));
    }
    Mat inter = L.columns() * ns.topRows(d);  // basis of L cap W
    Mat red(2 * m, m);
    for (int j = 0; j < m; ++j) {
        red.col(j) = reduced_coordinates(rb.basis, inter.col(j));
    }
    if (rb.aligned) {
        red = real_of_unitary(rb.align * unitary_of_real(orthonormalize(red)));
    }
    return LagrangianFrame::from_columns(red, tols);
}

}  // namespace

LagrangianFrame linear_reduce(const CoisotropicData& W, const LagrangianFrame& L,
                              const Tolerances& tols) {
    if (W.k() == 2 * W.d) {
        return LagrangianFrame::from_columns(L.columns(), tols);  // identity
    }
    return reduce_with_basis(reduction_basis(W, tols), W, L, tols);
}

LagrangianFrame reduce_vertical(const CoisotropicData& W, const Tolerances& tols) {
    return linear_reduce(W, LagrangianFrame::vertical(W.d), tols);
}

namespace {

// Deterministic standard normals: mt19937_64 bits through Box-Muller.
class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) : gen_(seed) {}
    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

private:
    double uniform() {
        return (gen_() >> 11) * 0x1.0p-53;  // [0, 1)
    }
    std::mt19937_64 gen_;
    bool have_ = false;
    double spare_ = 0.0;
};

}  // namespace

Mat expm_fixed(const Mat& A) {
    const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    double s = norm;
    while (s > 0.5) {
        s *= 0.5;
        ++squarings;
    }
    Mat X = A / std::pow(2.0, squarings);
    Mat term = Mat::Identity(A.rows(), A.cols());
    Mat sum = term;
    for (int k = 1; k <= 12; ++k) {
        term = term * X / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

Mat random_symplectic(int d, std::uint64_t seed, double scale) {
    NormalSource rng(seed * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL);
    Mat S(2 * d, 2 * d);
    for (int i = 0; i < 2 * d; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double v = rng() * scale / std::sqrt(2.0 * d);
            S(i, j) = v;
            S(j, i) = v;
        }
    }
    // J S is Hamiltonian for symmetric S, so its exponential is symplectic.
    return expm_fixed(standard_J(d) * S);
}

LagrangianFrame random_lagrangian(int d, std::uint64_t seed) {
    // Scale 2 spreads the frames over the whole Grassmannian, reaching both
    // neighbourhoods of the singular cycle and frames far from it.
    Mat Sp = random_symplectic(d, seed, 2.0);
    return LagrangianFrame::from_columns(
        Sp * LagrangianFrame::horizontal(d).columns());
}

}  // namespace maslov
