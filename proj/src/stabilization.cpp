#include "twoplayer/stabilization.hpp"

#include "twoplayer/errors.hpp"

namespace twoplayer {

namespace {

Mat blkdiag(const Mat& X, const Mat& Y) {
    Mat M = Mat::Zero(X.rows() + Y.rows(), X.cols() + Y.cols());
    M.topLeftCorner(X.rows(), X.cols()) = X;
    M.bottomRightCorner(Y.rows(), Y.cols()) = Y;
    return M;
}

// LQR with identity weights; used when the plant's own weights are not admissible
// for a subsystem.
AreSolution identity_weight_are(const Mat& A, const Mat& B, const Tolerances& tol) {
    const Index n = A.rows(), m = B.cols();
    Mat C = Mat::Zero(n + m, n), D = Mat::Zero(n + m, m);
    C.topRows(n).setIdentity();
    D.bottomRows(m).setIdentity();
    return solve_are(A, B, C, D, tol);
}

AreSolution subsystem_are(const Mat& A, const Mat& B, const Mat& C, const Mat& D,
                          const Tolerances& tol) {
    try {
        return solve_are(A, B, C, D, tol);
    } catch (const AreError&) {
        return identity_weight_are(A, B, tol);
    }
}

}  // namespace

std::string TriangularStabilizability::detail() const {
    if (ok()) return "(C11, A11, B11) and (C22, A22, B22) are stabilizable and detectable";
    std::string s;
    auto add = [&s](bool good, const char* msg) {
        if (good) return;
        if (!s.empty()) s += "; ";
        s += msg;
    };
    add(stabilizable11, "unstabilizable (A11, B11)");
    add(detectable11, "undetectable (C11, A11)");
    add(stabilizable22, "unstabilizable (A22, B22)");
    add(detectable22, "undetectable (C22, A22)");
    return s + ": no block-lower-triangular controller stabilizes the plant";
}

TriangularStabilizability exists_triangular_stabilizing(const TwoPlayerPlant& p) {
    TriangularStabilizability t;
    t.stabilizable11 = pbh_stabilizable(p.Ablk(1, 1), p.B2blk(1, 1));
    t.detectable11 = pbh_detectable(p.C2blk(1, 1), p.Ablk(1, 1));
    t.stabilizable22 = pbh_stabilizable(p.Ablk(2, 2), p.B2blk(2, 2));
    t.detectable22 = pbh_detectable(p.C2blk(2, 2), p.Ablk(2, 2));
    return t;
}

bool centralized_stabilizable(const TwoPlayerPlant& p) {
    return pbh_stabilizable(p.A, p.B2) && pbh_detectable(p.C2, p.A);
}

AreSolution player2_control_are(const TwoPlayerPlant& p, const Tolerances& tol) {
    return solve_are(p.Ablk(2, 2), p.B2blk(2, 2), p.C1 * p.En(2), p.D12 * p.Em(2), tol);
}

AreSolution player1_filter_are(const TwoPlayerPlant& p, const Tolerances& tol) {
    return solve_are(p.Ablk(1, 1).transpose(), p.C2blk(1, 1).transpose(),
                     (p.En(1).transpose() * p.B1).transpose(),
                     (p.Ek(1).transpose() * p.D21).transpose(), tol);
}

NominalGains nominal_gains(const TwoPlayerPlant& p, const Mat& J, const Mat& M,
                           const Tolerances& tol) {
    NominalGains g;
    g.J = J;
    g.M = M;
    g.K1 = subsystem_are(p.Ablk(1, 1), p.B2blk(1, 1), p.C1 * p.En(1), p.D12 * p.Em(1), tol).K;
    g.L2 = subsystem_are(p.Ablk(2, 2).transpose(), p.C2blk(2, 2).transpose(),
                         (p.En(2).transpose() * p.B1).transpose(),
                         (p.Ek(2).transpose() * p.D21).transpose(), tol)
               .K.transpose();
    g.Kd = blkdiag(g.K1, g.J);
    g.Ld = blkdiag(g.M, g.L2);
    g.AKd = p.A + p.B2 * g.Kd;
    g.ALd = p.A + g.Ld * p.C2;
    g.CKd = p.C1 + p.D12 * g.Kd;
    g.BLd = p.B1 + g.Ld * p.D21;
    if (!is_hurwitz(g.AKd, tol.hurwitz) || !is_hurwitz(g.ALd, tol.hurwitz))
        throw NumericalError("nominal_gains: A + B2 Kd or A + Ld C2 is not Hurwitz");
    return g;
}

NominalGains nominal_gains(const TwoPlayerPlant& p, const Tolerances& tol) {
    const Mat J = player2_control_are(p, tol).K;
    const Mat M = player1_filter_are(p, tol).K.transpose();
    return nominal_gains(p, J, M, tol);
}

StateSpace nominal_controller(const TwoPlayerPlant& p, const NominalGains& g) {
    return StateSpace(p.A + p.B2 * g.Kd + g.Ld * p.C2, -g.Ld, g.Kd,
                      Mat::Zero(p.nu(), p.ny()));
}

ModelMatchData youla_data(const TwoPlayerPlant& p, const NominalGains& g) {
    const Index n = p.n(), m = p.nu(), k = p.ny(), nw = p.nw(), nz = p.nz();
    ModelMatchData d;
    d.part = p.part;

    Mat AT = Mat::Zero(2 * n, 2 * n);
    AT.topLeftCorner(n, n) = g.AKd;
    AT.topRightCorner(n, n) = -p.B2 * g.Kd;
    AT.bottomRightCorner(n, n) = g.ALd;
    Mat Bw(2 * n, nw);
    Bw << p.B1, g.BLd;
    Mat Bu = Mat::Zero(2 * n, m);
    Bu.topRows(n) = p.B2;
    Mat Cz(nz, 2 * n);
    Cz << g.CKd, -p.D12 * g.Kd;
    Mat Cy = Mat::Zero(k, 2 * n);
    Cy.rightCols(n) = p.C2;
    d.T11 = StateSpace(AT, Bw, Cz, Mat::Zero(nz, nw));
    d.T12 = StateSpace(AT, Bu, Cz, p.D12);
    d.T21 = StateSpace(AT, Bw, Cy, p.D21);

    Mat Bj(n, k + m);
    Bj << -g.Ld, p.B2;
    Mat Cj(m + k, n);
    Cj << g.Kd, -p.C2;
    Mat Dj = Mat::Zero(m + k, k + m);
    Dj.topRightCorner(m, m).setIdentity();
    Dj.bottomLeftCorner(k, k).setIdentity();
    d.Jd = StateSpace(p.A + p.B2 * g.Kd + g.Ld * p.C2, Bj, Cj, Dj);

    Mat Bi(n, m + k);
    Bi << p.B2, -g.Ld;
    Mat Ci(k + m, n);
    Ci << p.C2, -g.Kd;
    Mat Di = Mat::Zero(k + m, m + k);
    Di.topRightCorner(k, k).setIdentity();
    Di.bottomLeftCorner(m, m).setIdentity();
    d.Jd_inv = StateSpace(p.A, Bi, Ci, Di);
    return d;
}

StateSpace controller_from_Q(const StateSpace& Jd, const StateSpace& Q) {
    return lft_lower(Jd, Q);
}

StateSpace q_from_controller(const StateSpace& Jd, const StateSpace& K) {
    return lft_upper(inverse(Jd), K);
}

StateSpace closed_loop(const TwoPlayerPlant& p, const StateSpace& K) {
    return lft_lower(p.generalized(), K);
}

}  // namespace twoplayer
