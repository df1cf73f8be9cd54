#include "twoplayer/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace twoplayer {

const char* to_string(AreFailure f) {
    switch (f) {
        case AreFailure::singular_weight: return "D^T D singular";
        case AreFailure::not_stabilizable: return "(A, B) not stabilizable";
        case AreFailure::axis_rank: return "imaginary-axis rank condition fails";
        case AreFailure::numerical: return "numerical failure";
    }
    return "unknown";
}

namespace {

void require_square(const Mat& A, const char* what) {
    if (A.rows() != A.cols()) {
        std::ostringstream os;
        os << what << ": expected square matrix, got " << A.rows() << "x" << A.cols();
        throw DimensionError(os.str());
    }
}

double fro(const Mat& M) { return M.size() == 0 ? 0.0 : M.norm(); }

// LAPACK zlartg: [cs sn; -conj(sn) cs] [f; g] = [r; 0].
void givens(cdouble f, cdouble g, double& cs, cdouble& sn) {
    const double af = std::abs(f), ag = std::abs(g);
    if (ag == 0.0) {
        cs = 1.0;
        sn = 0.0;
    } else if (af == 0.0) {
        cs = 0.0;
        sn = std::conj(g) / ag;
    } else {
        const double nrm = std::hypot(af, ag);
        cs = af / nrm;
        sn = (f / af) * std::conj(g) / nrm;
    }
}

// zrot: x <- c x + s y, y <- c y - conj(s) x.
template <class X, class Y>
void zrot(X&& x, Y&& y, double c, cdouble s) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const cdouble xi = x(i), yi = y(i);
        x(i) = c * xi + s * yi;
        y(i) = c * yi - std::conj(s) * xi;
    }
}

// Swap diagonal entries k and k+1 of the upper-triangular T (ztrexc step).
void swap_adjacent(CMat& T, CMat& Q, Eigen::Index k) {
    const Eigen::Index n = T.rows();
    const cdouble t11 = T(k, k), t22 = T(k + 1, k + 1);
    double cs;
    cdouble sn;
    givens(T(k, k + 1), t22 - t11, cs, sn);
    if (k + 2 < n) {
        auto r1 = T.row(k).segment(k + 2, n - k - 2);
        auto r2 = T.row(k + 1).segment(k + 2, n - k - 2);
        zrot(r1, r2, cs, sn);
    }
    if (k > 0) {
        auto c1 = T.col(k).head(k);
        auto c2 = T.col(k + 1).head(k);
        zrot(c1, c2, cs, std::conj(sn));
    }
    T(k, k) = t22;
    T(k + 1, k + 1) = t11;
    auto q1 = Q.col(k);
    auto q2 = Q.col(k + 1);
    zrot(q1, q2, cs, std::conj(sn));
}

struct SchurPair {
    CMat U, T;
};

SchurPair complex_schur(const Mat& A) {
    SchurPair s;
    if (A.rows() == 0) {
        s.U.resize(0, 0);
        s.T.resize(0, 0);
        return s;
    }
    Eigen::ComplexSchur<CMat> cs(A.cast<cdouble>());
    if (cs.info() != Eigen::Success) throw NumericalError("complex Schur decomposition failed");
    s.U = cs.matrixU();
    s.T = cs.matrixT();
    return s;
}

// T Y + Y S + C = 0 with T, S upper triangular.
CMat triangular_sylvester(const CMat& T, const CMat& S, const CMat& C, double sing_tol) {
    const Eigen::Index p = T.rows(), q = S.rows();
    CMat Y(p, q);
    for (Eigen::Index j = 0; j < q; ++j) {
        CMat Tj = T;
        for (Eigen::Index i = 0; i < p; ++i) {
            Tj(i, i) += S(j, j);
            if (std::abs(Tj(i, i)) <= sing_tol) {
                std::ostringstream os;
                os << "singular Sylvester operator: eigenvalues " << T(i, i) << " and " << S(j, j)
                   << " sum to ~0";
                throw SingularEquationError(os.str());
            }
        }
        Eigen::VectorXcd rhs = -C.col(j);
        for (Eigen::Index i = 0; i < j; ++i) rhs -= S(i, j) * Y.col(i);
        Y.col(j) = Tj.triangularView<Eigen::Upper>().solve(rhs);
    }
    return Y;
}

// sigma_min of a complex matrix relative to its largest singular value.
double sigma_min(const CMat& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(M);
    const auto& s = svd.singularValues();
    return s(s.size() - 1);
}

}  // namespace

// ---- spectra -------------------------------------------------------------

Eigen::VectorXcd eigenvalues(const Mat& A) {
    require_square(A, "eigenvalues");
    if (A.rows() == 0) return Eigen::VectorXcd(0);
    Eigen::EigenSolver<Mat> es(A, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
    return es.eigenvalues();
}

double spectral_abscissa(const Mat& A) {
    const auto ev = eigenvalues(A);
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) m = std::max(m, ev(i).real());
    return m;
}

bool is_hurwitz(const Mat& A, double margin) {
    require_square(A, "is_hurwitz");
    if (A.rows() == 0) return true;
    return spectral_abscissa(A) < -margin;
}

OrderedSchur ordered_schur(const Mat& A, double margin) {
    require_square(A, "ordered_schur");
    SchurPair s = complex_schur(A);
    OrderedSchur out;
    out.Q = std::move(s.U);
    out.T = std::move(s.T);
    const Eigen::Index n = out.T.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(out.T(i, i).real()) <= margin) {
            std::ostringstream os;
            os << "eigenvalue " << out.T(i, i) << " lies within " << margin << " of the imaginary axis";
            throw AxisEigenvalueError(os.str());
        }
    }
    Eigen::Index next = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (out.T(j, j).real() < -margin) {
            for (Eigen::Index k = j; k > next; --k) swap_adjacent(out.T, out.Q, k - 1);
            ++next;
        }
    }
    out.stable = next;
    // Swaps leave round-off below the diagonal of order eps*|T|; the
    // algorithm never writes there, so T stays exactly triangular.
    return out;
}

Mat stable_subspace(const Mat& A, double margin) {
    const OrderedSchur os = ordered_schur(A, margin);
    const Eigen::Index n = A.rows(), k = os.stable;
    if (k == 0) return Mat(n, 0);
    Mat M(n, 2 * k);
    M.leftCols(k) = os.Q.leftCols(k).real();
    M.rightCols(k) = os.Q.leftCols(k).imag();
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(k);
}

// ---- subspaces -----------------------------------------------------------

Eigen::Index numerical_rank(const Mat& M, double rel_tol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

Mat orth(const Mat& M, double abs_tol) {
    if (M.size() == 0) return Mat(M.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > abs_tol) ++r;
    return svd.matrixU().leftCols(r);
}

Mat orth_complement(const Mat& V, Eigen::Index n) {
    if (V.cols() == 0) return Mat::Identity(n, n);
    if (V.cols() >= n) return Mat(n, 0);
    Eigen::JacobiSVD<Mat> svd(V, Eigen::ComputeFullU);
    return svd.matrixU().rightCols(n - V.cols());
}

Mat controllable_subspace(const Mat& A, const Mat& B, double rel_tol) {
    const Eigen::Index n = A.rows();
    if (B.rows() != n) throw DimensionError("controllable_subspace: B row count mismatch");
    const double scale = std::max({fro(A), fro(B), 1e-300});
    const double tol = rel_tol * scale;
    Mat V = orth(B, tol);
    Mat frontier = V;
    while (frontier.cols() > 0 && V.cols() < n) {
        Mat W = A * frontier;
        for (int pass = 0; pass < 2; ++pass) W -= V * (V.transpose() * W);
        Mat fresh = orth(W, tol);
        if (fresh.cols() == 0) break;
        Mat next(n, V.cols() + fresh.cols());
        next << V, fresh;
        V = std::move(next);
        frontier = std::move(fresh);
    }
    return V;
}

Mat observable_subspace(const Mat& C, const Mat& A, double rel_tol) {
    return controllable_subspace(A.transpose(), C.transpose(), rel_tol);
}

// ---- linear matrix equations ---------------------------------------------

double sylvester_residual(const Mat& A1, const Mat& A2, const Mat& A0, const Mat& X) {
    if (X.size() == 0) return 0.0;
    return fro(A1 * X + X * A2 + A0);
}

Mat solve_sylvester(const Mat& A1, const Mat& A2, const Mat& A0) {
    require_square(A1, "solve_sylvester(A1)");
    require_square(A2, "solve_sylvester(A2)");
    if (A0.rows() != A1.rows() || A0.cols() != A2.rows())
        throw DimensionError("solve_sylvester: A0 shape mismatch");
    if (A0.size() == 0) return Mat(A0.rows(), A0.cols());

    const SchurPair s1 = complex_schur(A1), s2 = complex_schur(A2);
    const double scale = std::max(1.0, fro(A1) + fro(A2));
    const double sing_tol = 1e-10 * scale;

    auto solve = [&](const Mat& rhs) {
        const CMat C = s1.U.adjoint() * rhs.cast<cdouble>() * s2.U;
        const CMat Y = triangular_sylvester(s1.T, s2.T, C, sing_tol);
        return Mat((s1.U * Y * s2.U.adjoint()).real());
    };

    Mat X = solve(A0);
    // One step of iterative refinement.
    const Mat R = A1 * X + X * A2 + A0;
    if (fro(R) > 0) {
        const Mat X2 = X + solve(R);
        if (sylvester_residual(A1, A2, A0, X2) < fro(R)) X = X2;
    }
    return X;
}

Mat solve_lyapunov(const Mat& A, const Mat& Q) {
    require_square(A, "solve_lyapunov");
    return symmetrize(solve_sylvester(A, A.transpose(), Q));
}

// ---- Riccati -------------------------------------------------------------

double are_residual(const Mat& A, const Mat& B, const Mat& C, const Mat& D, const Mat& X) {
    const Mat R = D.transpose() * D;
    const Mat N = X * B + C.transpose() * D;
    const Mat Res = A.transpose() * X + X * A + C.transpose() * C -
                    N * R.llt().solve(N.transpose());
    return fro(Res) / (1.0 + fro(X));
}

AreSolution solve_are(const Mat& A, const Mat& B, const Mat& C, const Mat& D,
                      const Tolerances& tol) {
    require_square(A, "solve_are");
    const Eigen::Index n = A.rows(), m = B.cols();
    if (B.rows() != n || C.cols() != n || D.rows() != C.rows() || D.cols() != m)
        throw DimensionError("solve_are: inconsistent dimensions");

    const Mat R = D.transpose() * D;
    if (m > 0) {
        Eigen::SelfAdjointEigenSolver<Mat> es(R);
        const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        if (!(lo > 1e-12 * std::max(1.0, hi)))
            throw AreError(AreFailure::singular_weight, "solve_are: D^T D is singular");
    }
    if (!pbh_stabilizable(A, B, 0.0))
        throw AreError(AreFailure::not_stabilizable, "solve_are: (A, B) is not stabilizable");
    if (!axis_rank_ok(A, B, C, D, RankSide::column, tol.axis))
        throw AreError(AreFailure::axis_rank,
                       "solve_are: [A - jwI, B; C, D] loses column rank on the imaginary axis");

    AreSolution sol;
    if (n == 0) {
        sol.X = Mat(0, 0);
        sol.K = Mat(m, 0);
        return sol;
    }

    const Eigen::LLT<Mat> Rl(R);
    const Mat As = A - B * Rl.solve(D.transpose() * C);
    const Mat Qs = symmetrize(C.transpose() * C -
                              C.transpose() * D * Rl.solve(D.transpose() * C));
    const Mat G = symmetrize(B * Rl.solve(B.transpose()));

    Mat H(2 * n, 2 * n);
    H << As, -G, -Qs, -As.transpose();

    Mat U;
    try {
        U = stable_subspace(H, tol.hurwitz * std::max(1.0, fro(H)));
    } catch (const AxisEigenvalueError& e) {
        throw AreError(AreFailure::axis_rank, std::string("solve_are: Hamiltonian ") + e.what());
    }
    if (U.cols() != n)
        throw AreError(AreFailure::numerical, "solve_are: Hamiltonian stable subspace has wrong dimension");
    const Mat U1 = U.topRows(n), U2 = U.bottomRows(n);
    Eigen::JacobiSVD<Mat> svd(U1);
    const auto& sv = svd.singularValues();
    if (!(sv(n - 1) > 1e-13 * sv(0)))
        throw AreError(AreFailure::numerical, "solve_are: stable subspace not a graph (U1 singular)");
    Mat X = symmetrize(U1.transpose().fullPivLu().solve(U2.transpose()).transpose());

    auto gain = [&](const Mat& Xc) { return Mat(-Rl.solve(B.transpose() * Xc + D.transpose() * C)); };

    // Newton (Kleinman) polishing.
    double res = are_residual(A, B, C, D, X);
    for (int it = 0; it < 4 && res > 1e-15; ++it) {
        const Mat Acl = As - G * X;
        if (!is_hurwitz(Acl, 0.0)) break;
        Mat Xn;
        try {
            Xn = solve_lyapunov(Acl.transpose(), Qs + X * G * X);
        } catch (const Error&) {
            break;
        }
        const double rn = are_residual(A, B, C, D, Xn);
        if (!(rn < res)) break;
        X = Xn;
        res = rn;
    }

    sol.X = X;
    sol.K = gain(X);
    sol.residual = res;

    if (!is_hurwitz(A + B * sol.K, tol.hurwitz))
        throw AreError(AreFailure::numerical, "solve_are: closed loop A + BK is not Hurwitz");
    if (min_eig_sym(X) < -1e-8 * (1.0 + fro(X)))
        throw AreError(AreFailure::numerical, "solve_are: solution is not positive semidefinite");
    if (sol.residual > tol.residual) {
        std::ostringstream os;
        os << "solve_are: residual " << sol.residual << " exceeds " << tol.residual;
        throw AreError(AreFailure::numerical, os.str());
    }
    return sol;
}

// ---- rank tests ----------------------------------------------------------

bool pbh_stabilizable(const Mat& A, const Mat& B, double margin) {
    require_square(A, "pbh_stabilizable");
    if (B.rows() != A.rows()) throw DimensionError("pbh_stabilizable: B row count mismatch");
    const Eigen::Index n = A.rows();
    if (n == 0) return true;
    const Mat V = controllable_subspace(A, B);
    if (V.cols() == n) return true;
    const Mat W = orth_complement(V, n);
    return is_hurwitz(W.transpose() * A * W, margin);
}

bool pbh_detectable(const Mat& C, const Mat& A, double margin) {
    if (C.cols() != A.rows()) throw DimensionError("pbh_detectable: C column count mismatch");
    return pbh_stabilizable(A.transpose(), C.transpose(), margin);
}

bool axis_rank_ok(const Mat& A, const Mat& B, const Mat& C, const Mat& D, RankSide side,
                  double axis_tol) {
    if (side == RankSide::row)
        return axis_rank_ok(A.transpose(), C.transpose(), B.transpose(), D.transpose(),
                            RankSide::column, axis_tol);
    require_square(A, "axis_rank_ok");
    const Eigen::Index n = A.rows(), m = B.cols(), p = C.rows();
    if (B.rows() != n || C.cols() != n || D.rows() != p || D.cols() != m)
        throw DimensionError("axis_rank_ok: inconsistent dimensions");
    const Eigen::Index rows = n + p, cols = n + m;
    if (rows < cols) return false;
    if (cols == 0) return true;

    Mat M(rows, cols);
    M << A, B, C, D;
    Mat E = Mat::Zero(rows, cols);
    E.topLeftCorner(n, n).setIdentity();
    const double scale = std::max(1.0, fro(M));

    auto pencil_smin = [&](cdouble s) {
        return sigma_min(M.cast<cdouble>() - s * E.cast<cdouble>()) / scale;
    };

    // Normal rank: generically full unless the pencil is structurally deficient.
    const cdouble s1(0.3719 * scale, 1.1337 * scale), s2(-0.5821 * scale, -0.2473 * scale);
    if (pencil_smin(s1) < 1e-10 && pencil_smin(s2) < 1e-10) return false;
    if (n == 0) return true;

    // Finite zeros are eigenvalues of every square projection of the pencil.
    Mat P = Mat::Identity(cols, rows);
    if (rows > cols) {
        std::mt19937_64 rng(0x5eed1234ULL);
        std::normal_distribution<double> nd;
        for (Eigen::Index i = 0; i < P.size(); ++i) P(i) = nd(rng);
    }
    Eigen::GeneralizedEigenSolver<Mat> ges(P * M, P * E, false);
    if (ges.info() != Eigen::Success) throw NumericalError("axis_rank_ok: QZ failed");
    const auto alphas = ges.alphas();
    const auto betas = ges.betas();
    for (Eigen::Index i = 0; i < alphas.size(); ++i) {
        const double b = betas(i);
        if (std::abs(b) <= 1e-12 * std::abs(alphas(i))) continue;
        if (b == 0.0) continue;
        const cdouble lam = alphas(i) / b;
        if (std::abs(lam.real()) > axis_tol * std::max(1.0, std::abs(lam))) continue;
        if (pencil_smin(cdouble(0.0, lam.imag())) <= 1e-6) return false;
    }
    return true;
}

// ---- Gramians and norms --------------------------------------------------

Mat gramian(const StateSpace& sys, GramianSide side) {
    sys.validate();
    if (!is_hurwitz(sys.A, 0.0)) throw NumericalError("gramian: A is not Hurwitz");
    if (side == GramianSide::controllability)
        return solve_lyapunov(sys.A, sys.B * sys.B.transpose());
    return solve_lyapunov(sys.A.transpose(), sys.C.transpose() * sys.C);
}

namespace {
void require_h2(const StateSpace& sys) {
    sys.validate();
    if (sys.D.size() > 0 && sys.D.cwiseAbs().maxCoeff() > 1e-12)
        throw NumericalError("h2_norm: nonzero feedthrough, norm is infinite");
}
}  // namespace

CMat lyapunov_factor(const Mat& A, const Mat& B, CMat* schur_basis) {
    if (!is_hurwitz(A, 0.0)) throw NumericalError("lyapunov_factor: A is not Hurwitz");
    const Eigen::Index n = A.rows();
    Eigen::ComplexSchur<CMat> cs(A.cast<cdouble>());
    const CMat& T = cs.matrixT();
    CMat Bc = cs.matrixU().adjoint() * B.cast<cdouble>();
    CMat U = CMat::Zero(n, n);
    // Hammarling: peel off the last state, T = [T1 t; 0 tau], U = [U1 u; 0 nu].
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        const cdouble tau = T(k, k);
        const Eigen::RowVectorXcd b = Bc.row(k).head(Bc.cols());
        const double nb = b.norm();
        const double nu = nb / std::sqrt(-2.0 * tau.real());
        U(k, k) = nu;
        if (k == 0 || nu == 0.0) continue;
        CMat M = T.topLeftCorner(k, k);
        M.diagonal().array() += std::conj(tau);
        const CMat rhs = T.col(k).head(k) * nu + Bc.topRows(k) * b.adjoint() / nu;
        const CMat u = -M.triangularView<Eigen::Upper>().solve(rhs);
        U.col(k).head(k) = u;
        Bc.topRows(k) -= u * b / nu;
    }
    if (schur_basis) *schur_basis = cs.matrixU();
    return U;
}

double h2_norm(const StateSpace& sys) {
    require_h2(sys);
    if (sys.states() == 0) return 0.0;
    // Square-root form keeps the error proportional to eps rather than sqrt(eps)
    // when the norm is small relative to the realization.
    CMat Q;
    const CMat U = lyapunov_factor(sys.A, sys.B, &Q);
    return (sys.C.cast<cdouble>() * Q * U).norm();
}

double h2_norm_squared_obs(const StateSpace& sys) {
    require_h2(sys);
    if (sys.states() == 0) return 0.0;
    const Mat Wo = gramian(sys, GramianSide::observability);
    return (sys.B.transpose() * Wo * sys.B).trace();
}

StableAntistable stable_antistable_decompose(const StateSpace& sys, double margin) {
    sys.validate();
    const Eigen::Index n = sys.states();
    StableAntistable out;
    out.feedthrough = sys.D;
    const Mat Vs = stable_subspace(sys.A, margin);
    const Eigen::Index k = Vs.cols();
    const Mat W = orth_complement(Vs, n);
    Mat U(n, n);
    U << Vs, W;
    const Mat At = U.transpose() * sys.A * U;
    const Mat A11 = At.topLeftCorner(k, k), A12 = At.topRightCorner(k, n - k),
              A22 = At.bottomRightCorner(n - k, n - k);
    const Mat Bt = U.transpose() * sys.B, Ct = sys.C * U;
    // [I Z; 0 I] block-diagonalizes At when A11 Z - Z A22 + A12 = 0.
    const Mat Z = solve_sylvester(A11, -A22, A12);
    const Mat B1 = Bt.topRows(k) - Z * Bt.bottomRows(n - k);
    const Mat C2 = Ct.leftCols(k) * Z + Ct.rightCols(n - k);
    out.stable = StateSpace(A11, B1, Ct.leftCols(k), Mat::Zero(sys.outputs(), sys.inputs()));
    out.antistable =
        StateSpace(A22, Bt.bottomRows(n - k), C2, Mat::Zero(sys.outputs(), sys.inputs()));
    return out;
}

StateSpace minreal(const StateSpace& sys, double rel_tol) {
    sys.validate();
    const Mat Vc = controllable_subspace(sys.A, sys.B, rel_tol);
    const Mat Ac = Vc.transpose() * sys.A * Vc, Bc = Vc.transpose() * sys.B, Cc = sys.C * Vc;
    const Mat Vo = observable_subspace(Cc, Ac, rel_tol);
    return StateSpace(Vo.transpose() * Ac * Vo, Vo.transpose() * Bc, Cc * Vo, sys.D);
}

// ---- misc ----------------------------------------------------------------

Mat kron(const Mat& A, const Mat& B) {
    Mat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

Mat vec(const Mat& M) { return Eigen::Map<const Mat>(M.data(), M.size(), 1); }

Mat unvec(const Mat& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols) throw DimensionError("unvec: size mismatch");
    Mat out(rows, cols);
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i % rows, i / rows) = v(i);
    return out;
}

Mat symmetrize(const Mat& M) { return 0.5 * (M + M.transpose()); }

double min_eig_sym(const Mat& M) {
    if (M.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(M), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace twoplayer
