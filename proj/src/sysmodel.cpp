#include "twoplayer/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twoplayer/errors.hpp"

namespace twoplayer {

namespace {

double fro(const Mat& M) { return M.size() == 0 ? 0.0 : M.norm(); }

Mat blkdiag(const Mat& X, const Mat& Y) {
    Mat M = Mat::Zero(X.rows() + Y.rows(), X.cols() + Y.cols());
    M.topLeftCorner(X.rows(), X.cols()) = X;
    M.bottomRightCorner(Y.rows(), Y.cols()) = Y;
    return M;
}

Mat hcat(const Mat& X, const Mat& Y) {
    Mat M(X.rows(), X.cols() + Y.cols());
    M << X, Y;
    return M;
}

Mat vcat(const Mat& X, const Mat& Y) {
    Mat M(X.rows() + Y.rows(), X.cols());
    M << X, Y;
    return M;
}

void shape_check(bool ok, const char* what) {
    if (!ok) throw DimensionError(what);
}

void canonicalize_signs(Mat& V) {
    for (Eigen::Index j = 0; j < V.cols(); ++j) {
        Eigen::Index i;
        V.col(j).cwiseAbs().maxCoeff(&i);
        if (V(i, j) < 0) V.col(j) *= -1.0;
    }
}

}  // namespace

// ---- interconnections ----------------------------------------------------

StateSpace multiply(const StateSpace& G1, const StateSpace& G2) {
    shape_check(G1.inputs() == G2.outputs(), "multiply: inner dimensions differ");
    const Eigen::Index n1 = G1.states(), n2 = G2.states();
    Mat A = Mat::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = G1.A;
    A.topRightCorner(n1, n2) = G1.B * G2.C;
    A.bottomRightCorner(n2, n2) = G2.A;
    return StateSpace(A, vcat(G1.B * G2.D, G2.B), hcat(G1.C, G1.D * G2.C), G1.D * G2.D);
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
    return multiply(second, first);
}

StateSpace add(const StateSpace& G1, const StateSpace& G2) {
    shape_check(G1.inputs() == G2.inputs() && G1.outputs() == G2.outputs(),
                "add: shapes differ");
    return StateSpace(blkdiag(G1.A, G2.A), vcat(G1.B, G2.B), hcat(G1.C, G2.C), G1.D + G2.D);
}

StateSpace negate(const StateSpace& G) { return StateSpace(G.A, G.B, -G.C, -G.D); }

StateSpace subtract(const StateSpace& G1, const StateSpace& G2) { return add(G1, negate(G2)); }

StateSpace left_multiply(const Mat& M, const StateSpace& G) {
    shape_check(M.cols() == G.outputs(), "left_multiply: shape mismatch");
    return StateSpace(G.A, G.B, M * G.C, M * G.D);
}

StateSpace right_multiply(const StateSpace& G, const Mat& M) {
    shape_check(M.rows() == G.inputs(), "right_multiply: shape mismatch");
    return StateSpace(G.A, G.B * M, G.C, G.D * M);
}

StateSpace conjugate_transpose(const StateSpace& G) {
    return StateSpace(-G.A.transpose(), G.C.transpose(), -G.B.transpose(), G.D.transpose());
}

StateSpace transpose(const StateSpace& G) {
    return StateSpace(G.A.transpose(), G.C.transpose(), G.B.transpose(), G.D.transpose());
}

StateSpace hstack(const StateSpace& G1, const StateSpace& G2) {
    shape_check(G1.outputs() == G2.outputs(), "hstack: output counts differ");
    return StateSpace(blkdiag(G1.A, G2.A), blkdiag(G1.B, G2.B), hcat(G1.C, G2.C),
                      hcat(G1.D, G2.D));
}

StateSpace vstack(const StateSpace& G1, const StateSpace& G2) {
    shape_check(G1.inputs() == G2.inputs(), "vstack: input counts differ");
    return StateSpace(blkdiag(G1.A, G2.A), vcat(G1.B, G2.B), blkdiag(G1.C, G2.C),
                      vcat(G1.D, G2.D));
}

StateSpace block_diag(const StateSpace& G1, const StateSpace& G2) {
    return StateSpace(blkdiag(G1.A, G2.A), blkdiag(G1.B, G2.B), blkdiag(G1.C, G2.C),
                      blkdiag(G1.D, G2.D));
}

StateSpace inverse(const StateSpace& G) {
    shape_check(G.inputs() == G.outputs(), "inverse: system is not square");
    Eigen::FullPivLU<Mat> lu(G.D);
    if (!lu.isInvertible()) throw NumericalError("inverse: feedthrough is singular");
    const Mat Di = lu.inverse();
    return StateSpace(G.A - G.B * Di * G.C, G.B * Di, -Di * G.C, Di);
}

StateSpace similarity(const StateSpace& G, const Mat& T) {
    Eigen::FullPivLU<Mat> lu(T);
    if (!lu.isInvertible()) throw NumericalError("similarity: transform is singular");
    return StateSpace(lu.solve(G.A * T), lu.solve(G.B), G.C * T, G.D);
}

StateSpace subsystem(const StateSpace& G, Eigen::Index r0, Eigen::Index nr, Eigen::Index c0,
                     Eigen::Index nc) {
    shape_check(r0 >= 0 && nr >= 0 && r0 + nr <= G.outputs() && c0 >= 0 && nc >= 0 &&
                    c0 + nc <= G.inputs(),
                "subsystem: index range out of bounds");
    return StateSpace(G.A, G.B.middleCols(c0, nc), G.C.middleRows(r0, nr),
                      G.D.block(r0, c0, nr, nc));
}

StateSpace lft_lower(const StateSpace& P, const StateSpace& K) {
    const Eigen::Index nu = K.outputs(), ny = K.inputs();
    const Eigen::Index nw = P.inputs() - nu, nz = P.outputs() - ny;
    shape_check(nw >= 0 && nz >= 0, "lft_lower: controller larger than plant");
    const Eigen::Index n = P.states();
    const Mat B1 = P.B.leftCols(nw), B2 = P.B.rightCols(nu);
    const Mat C1 = P.C.topRows(nz), C2 = P.C.bottomRows(ny);
    const Mat D11 = P.D.topLeftCorner(nz, nw), D12 = P.D.topRightCorner(nz, nu);
    const Mat D21 = P.D.bottomLeftCorner(ny, nw), D22 = P.D.bottomRightCorner(ny, nu);

    Eigen::FullPivLU<Mat> lz(Mat::Identity(ny, ny) - D22 * K.D);
    Eigen::FullPivLU<Mat> lzt(Mat::Identity(nu, nu) - K.D * D22);
    if ((ny > 0 && !lz.isInvertible()) || (nu > 0 && !lzt.isInvertible()))
        throw NumericalError("lft_lower: interconnection is not well posed");
    const Mat Z = ny > 0 ? lz.inverse() : Mat(0, 0);
    const Mat Zt = nu > 0 ? lzt.inverse() : Mat(0, 0);

    const Eigen::Index nk = K.states();
    Mat A(n + nk, n + nk);
    A << P.A + B2 * Zt * K.D * C2, B2 * Zt * K.C, K.B * Z * C2, K.A + K.B * Z * D22 * K.C;
    const Mat B = vcat(B1 + B2 * Zt * K.D * D21, K.B * Z * D21);
    const Mat C = hcat(C1 + D12 * Zt * K.D * C2, D12 * Zt * K.C);
    const Mat D = D11 + D12 * Zt * K.D * D21;
    return StateSpace(A, B, C, D);
}

StateSpace lft_upper(const StateSpace& M, const StateSpace& K) {
    const Eigen::Index nu = K.outputs(), ny = K.inputs();
    const Eigen::Index n2in = M.inputs() - nu, n2out = M.outputs() - ny;
    shape_check(n2in >= 0 && n2out >= 0, "lft_upper: controller larger than system");
    // Reorder to [[M22, M21], [M12, M11]] and close the lower loop.
    Mat B(M.states(), M.inputs());
    B << M.B.rightCols(n2in), M.B.leftCols(nu);
    Mat C(M.outputs(), M.states());
    C << M.C.bottomRows(n2out), M.C.topRows(ny);
    Mat D(M.outputs(), M.inputs());
    D << M.D.bottomRightCorner(n2out, n2in), M.D.bottomLeftCorner(n2out, nu),
        M.D.topRightCorner(ny, n2in), M.D.topLeftCorner(ny, nu);
    return lft_lower(StateSpace(M.A, B, C, D), K);
}

// ---- transfer-function probes --------------------------------------------

std::vector<Mat> markov_parameters(const StateSpace& sys, int count) {
    if (count < 1) throw DimensionError("markov_parameters: count must be positive");
    std::vector<Mat> out;
    out.reserve(count);
    out.push_back(sys.D);
    Mat X = sys.B;
    for (int k = 1; k < count; ++k) {
        out.push_back(sys.C * X);
        X = sys.A * X;
    }
    return out;
}

CMat eval_at(const StateSpace& sys, cdouble s) {
    const Eigen::Index n = sys.states();
    if (n == 0) return sys.D.cast<cdouble>();
    const CMat M = s * CMat::Identity(n, n) - sys.A.cast<cdouble>();
    Eigen::JacobiSVD<CMat> svd(M);
    const auto& sv = svd.singularValues();
    if (!(sv(n - 1) > 1e-13 * std::max(1.0, sv(0))))
        throw NumericalError("eval_at: s is a pole of the realization");
    return sys.D.cast<cdouble>() +
           sys.C.cast<cdouble>() * M.partialPivLu().solve(sys.B.cast<cdouble>());
}

double markov_distance(const StateSpace& G1, const StateSpace& G2, int count) {
    shape_check(G1.inputs() == G2.inputs() && G1.outputs() == G2.outputs(),
                "markov_distance: shapes differ");
    if (count < 0) count = static_cast<int>(2 * (G1.states() + G2.states()) + 2);
    auto op_norm = [](const Mat& M) {
        if (M.size() == 0) return 0.0;
        return Eigen::JacobiSVD<Mat>(M).singularValues()(0);
    };
    const double rho = std::max({1.0, op_norm(G1.A), op_norm(G2.A)});
    const double scale = std::max({1.0, op_norm(G1.D), op_norm(G1.C) * op_norm(G1.B),
                                   op_norm(G2.D), op_norm(G2.C) * op_norm(G2.B)});
    double dist = op_norm(G1.D - G2.D) / scale;
    Mat X1 = G1.B, X2 = G2.B;
    for (int k = 1; k < count; ++k) {
        dist = std::max(dist, op_norm(G1.C * X1 - G2.C * X2) / scale);
        X1 = (G1.A / rho) * X1;
        X2 = (G2.A / rho) * X2;
    }
    return dist;
}

double frequency_distance(const StateSpace& G1, const StateSpace& G2, int points) {
    shape_check(G1.inputs() == G2.inputs() && G1.outputs() == G2.outputs(),
                "frequency_distance: shapes differ");
    double dist = 0.0;
    for (int j = 0; j < points; ++j) {
        const double w = std::pow(10.0, -2.0 + 4.0 * j / std::max(1, points - 1));
        CMat H1, H2;
        try {
            H1 = eval_at(G1, cdouble(0.0, w));
            H2 = eval_at(G2, cdouble(0.0, w));
        } catch (const NumericalError&) {
            continue;
        }
        const double ref = H1.size() ? H1.norm() : 0.0;
        dist = std::max(dist, (H1.size() ? (H1 - H2).norm() : 0.0) / (1.0 + ref));
    }
    return dist;
}

bool is_block_lower_tf(const StateSpace& sys, Eigen::Index row_split, Eigen::Index col_split,
                       double tol) {
    sys.validate();
    shape_check(row_split >= 0 && row_split <= sys.outputs() && col_split >= 0 &&
                    col_split <= sys.inputs(),
                "is_block_lower_tf: split out of range");
    const Eigen::Index nc2 = sys.inputs() - col_split;
    if (row_split == 0 || nc2 == 0) return true;
    const Mat D12 = sys.D.topRightCorner(row_split, nc2);
    if (fro(D12) > tol * std::max(1.0, fro(sys.D))) return false;
    if (sys.states() == 0) return true;
    // Every Markov parameter C1 A^k B2 vanishes iff C1 annihilates the reachable
    // subspace of (A, B2).
    const Mat Vc = controllable_subspace(sys.A, sys.B.rightCols(nc2));
    const Mat C1 = sys.C.topRows(row_split);
    return fro(C1 * Vc) <= tol * std::max(1.0, fro(C1));
}

bool realization_is_lower(const StateSpace& sys, Eigen::Index n1, Eigen::Index row_split,
                          Eigen::Index col_split, double tol) {
    const Eigen::Index n = sys.states();
    if (n1 < 0 || n1 > n) return false;
    const Eigen::Index n2 = n - n1, q2 = sys.inputs() - col_split;
    auto small = [tol](const Mat& M) { return M.size() == 0 || M.cwiseAbs().maxCoeff() <= tol; };
    return small(sys.A.topRightCorner(n1, n2)) && small(sys.B.topRightCorner(n1, q2)) &&
           small(sys.C.topRightCorner(row_split, n2)) &&
           small(sys.D.topRightCorner(row_split, q2));
}

Triangularized triangularize_realization(const StateSpace& sys, Eigen::Index row_split,
                                         Eigen::Index col_split,
                                         std::optional<Eigen::Index> n1_hint) {
    sys.validate();
    const Eigen::Index n = sys.states();
    if (n1_hint && realization_is_lower(sys, *n1_hint, row_split, col_split))
        return {sys, *n1_hint, n - *n1_hint, Mat::Identity(n, n)};
    if (!is_block_lower_tf(sys, row_split, col_split, 1e-8))
        throw InputError("triangularize_realization: transfer function is not block-lower");

    Mat Vc = controllable_subspace(sys.A, sys.B.rightCols(sys.inputs() - col_split));
    const Eigen::Index n2 = Vc.cols(), n1 = n - n2;
    if (realization_is_lower(sys, n1, row_split, col_split))
        return {sys, n1, n2, Mat::Identity(n, n)};

    canonicalize_signs(Vc);
    Mat Vp = orth_complement(Vc, n);
    canonicalize_signs(Vp);
    Mat T(n, n);
    T << Vp, Vc;
    StateSpace out(T.transpose() * sys.A * T, T.transpose() * sys.B, sys.C * T, sys.D);
    const Eigen::Index q2 = sys.inputs() - col_split;
    out.A.topRightCorner(n1, n2).setZero();
    out.B.topRightCorner(n1, q2).setZero();
    out.C.topRightCorner(row_split, n2).setZero();
    out.D.topRightCorner(row_split, q2).setZero();
    return {out, n1, n2, T};
}

}  // namespace twoplayer
