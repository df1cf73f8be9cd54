#include "twoplayer/synthesis.hpp"

#include <cmath>
#include <sstream>

#include "twoplayer/errors.hpp"

namespace twoplayer {

namespace {

double fro(const Mat& M) { return M.size() == 0 ? 0.0 : M.norm(); }

template <class F>
AreSolution named_are(const char* name, F&& f) {
    try {
        return f();
    } catch (const AreError& e) {
        throw AreError(e.reason, std::string(name) + ": " + e.what());
    }
}

// Block (i, j) of an n x n matrix under the state split.
Mat nblk(const TwoPlayerPlant& p, const Mat& X, int i, int j) {
    return p.En(i).transpose() * X * p.En(j);
}

struct CouplingData {
    Mat AJ, AM, dX, dY, C11, B22, V11inv, R22inv, S12, U12, cphi, cpsi;
};

CouplingData coupling_data(const TwoPlayerPlant& p, const AreBundle& b) {
    const CostCovariance cc = cost_cov_matrices(p);
    CouplingData d;
    d.AJ = b.AJ;
    d.AM = b.AM;
    d.dX = b.Xt - nblk(p, b.X, 2, 2);
    d.dY = b.Yt - nblk(p, b.Y, 1, 1);
    d.C11 = p.C2blk(1, 1);
    d.B22 = p.B2blk(2, 2);
    d.V11inv = (p.Ek(1).transpose() * cc.V * p.Ek(1)).inverse();
    d.R22inv = (p.Em(2).transpose() * cc.R * p.Em(2)).inverse();
    d.S12 = p.En(1).transpose() * cc.S * p.Em(2);  // n1 x m2
    d.U12 = p.Ek(1).transpose() * cc.U * p.En(2);  // k1 x n2
    const Mat A21 = p.Ablk(2, 1);
    const Mat Q21 = nblk(p, cc.Q, 2, 1), W21 = nblk(p, cc.W, 2, 1);
    const Mat X21 = nblk(p, b.X, 2, 1), Y21 = nblk(p, b.Y, 2, 1);
    d.cphi = -d.dX * d.U12.transpose() * d.V11inv * d.C11 + b.Xt * A21 +
             b.J.transpose() * d.S12.transpose() + Q21 - X21 * b.M * d.C11;
    d.cpsi = -d.B22 * d.R22inv * d.S12.transpose() * d.dY + A21 * b.Yt +
             d.U12.transpose() * b.M.transpose() + W21 - d.B22 * b.J * Y21;
    return d;
}

}  // namespace

AreBundle solve_four_ares(const TwoPlayerPlant& p, const Tolerances& tol) {
    AreBundle b;
    const AreSolution x =
        named_are("control ARE (X, K)", [&] { return solve_are(p.A, p.B2, p.C1, p.D12, tol); });
    const AreSolution y = named_are("filter ARE (Y, L)", [&] {
        return solve_are(p.A.transpose(), p.C2.transpose(), p.B1.transpose(), p.D21.transpose(),
                         tol);
    });
    const AreSolution xt =
        named_are("player-2 control ARE (X~, J)", [&] { return player2_control_are(p, tol); });
    const AreSolution yt =
        named_are("player-1 filter ARE (Y~, M)", [&] { return player1_filter_are(p, tol); });
    b.X = x.X;
    b.K = x.K;
    b.Y = y.X;
    b.L = y.K.transpose();
    b.Xt = xt.X;
    b.J = xt.K;
    b.Yt = yt.X;
    b.M = yt.K.transpose();
    b.residual_X = x.residual;
    b.residual_Y = y.residual;
    b.residual_Xt = xt.residual;
    b.residual_Yt = yt.residual;
    b.AK = p.A + p.B2 * b.K;
    b.AL = p.A + b.L * p.C2;
    b.AJ = p.Ablk(2, 2) + p.B2blk(2, 2) * b.J;
    b.AM = p.Ablk(1, 1) + b.M * p.C2blk(1, 1);
    return b;
}

PhiPsiSystem build_phi_psi_system(const TwoPlayerPlant& p, const AreBundle& b) {
    const CouplingData d = coupling_data(p, b);
    const Index n1 = p.part.n.first, n2 = p.part.n.second, N = n1 * n2;
    const Mat I1 = Mat::Identity(n1, n1), I2 = Mat::Identity(n2, n2);
    const Mat G = d.C11.transpose() * d.V11inv * d.C11;  // n1 x n1
    const Mat F = d.B22 * d.R22inv * d.B22.transpose();  // n2 x n2

    PhiPsiSystem s;
    s.coef.resize(2 * N, 2 * N);
    s.coef.topLeftCorner(N, N) = kron(I1, d.AJ.transpose()) + kron(d.AM.transpose(), I2);
    s.coef.topRightCorner(N, N) = -kron(G.transpose(), d.dX);
    s.coef.bottomLeftCorner(N, N) = -kron(d.dY.transpose(), F);
    s.coef.bottomRightCorner(N, N) = kron(I1, d.AJ) + kron(d.AM, I2);
    s.rhs.resize(2 * N);
    s.rhs.head(N) = -vec(d.cphi);
    s.rhs.tail(N) = -vec(d.cpsi);
    return s;
}

std::pair<Mat, Mat> phi_psi_residuals(const TwoPlayerPlant& p, const AreBundle& b, const Mat& Phi,
                                      const Mat& Psi) {
    const CouplingData d = coupling_data(p, b);
    const Mat rphi = d.AJ.transpose() * Phi + Phi * d.AM -
                     d.dX * Psi * d.C11.transpose() * d.V11inv * d.C11 + d.cphi;
    const Mat rpsi = d.AJ * Psi + Psi * d.AM.transpose() -
                     d.B22 * d.R22inv * d.B22.transpose() * Phi * d.dY + d.cpsi;
    return {rphi, rpsi};
}

CouplingSolution solve_phi_psi(const TwoPlayerPlant& p, const AreBundle& b, const Tolerances& tol) {
    const PhiPsiSystem s = build_phi_psi_system(p, b);
    const Index n1 = p.part.n.first, n2 = p.part.n.second, N = n1 * n2;
    CouplingSolution c;
    Vec x;
    Eigen::FullPivLU<Mat> lu(s.coef);
    lu.setThreshold(1e-12);
    if (lu.isInvertible()) {
        x = lu.solve(s.rhs);
    } else {
        c.min_norm = true;
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(s.coef);
        cod.setThreshold(1e-12);
        x = cod.solve(s.rhs);
    }
    c.Phi = unvec(x.head(N), n2, n1);
    c.Psi = unvec(x.tail(N), n2, n1);
    const auto [rphi, rpsi] = phi_psi_residuals(p, b, c.Phi, c.Psi);
    const double scale = 1.0 + fro(c.Phi) + fro(c.Psi);
    c.residual_phi = fro(rphi) / scale;
    c.residual_psi = fro(rpsi) / scale;
    if (c.residual_phi > tol.residual || c.residual_psi > tol.residual) {
        std::ostringstream os;
        os << "solve_phi_psi: coupled equations inconsistent (residuals " << c.residual_phi << ", "
           << c.residual_psi << ")";
        throw NumericalError(os.str());
    }
    return c;
}

HatGains gains_hat(const TwoPlayerPlant& p, const AreBundle& b, const CouplingSolution& c) {
    const CouplingData d = coupling_data(p, b);
    const Index n1 = p.part.n.first, n2 = p.part.n.second;
    const Index m1 = p.part.m.first, m2 = p.part.m.second;
    const Index k1 = p.part.k.first, k2 = p.part.k.second;
    HatGains g;
    g.H = -d.R22inv * (d.B22.transpose() * c.Phi + d.S12.transpose());
    g.Khat = Mat::Zero(m1 + m2, n1 + n2);
    g.Khat.bottomLeftCorner(m2, n1) = g.H;
    g.Khat.bottomRightCorner(m2, n2) = b.J;
    g.Lhat = Mat::Zero(n1 + n2, k1 + k2);
    g.Lhat.topLeftCorner(n1, k1) = b.M;
    g.Lhat.bottomLeftCorner(n2, k1) = -(c.Psi * d.C11.transpose() + d.U12.transpose()) * d.V11inv;
    return g;
}

StateSpace controller_realization(const TwoPlayerPlant& p, const AreBundle& b, const Mat& Khat,
                                  const Mat& Lhat, Realization which) {
    const Index n = p.n();
    const Mat Azz = p.A + p.B2 * b.K + Lhat * p.C2;
    const Mat Axx = p.A + b.L * p.C2 + p.B2 * Khat;
    Mat A = Mat::Zero(2 * n, 2 * n);
    A.topLeftCorner(n, n) = Azz;
    A.bottomRightCorner(n, n) = Axx;
    Mat B(2 * n, p.ny()), C(p.nu(), 2 * n);
    if (which == Realization::primary) {
        A.bottomLeftCorner(n, n) = p.B2 * b.K - p.B2 * Khat;
        B << -Lhat, -b.L;
        C << b.K - Khat, Khat;
    } else {
        A.bottomLeftCorner(n, n) = b.L * p.C2 - Lhat * p.C2;
        B << Lhat, b.L - Lhat;
        C << -b.K, -Khat;
    }
    return StateSpace(A, B, C, Mat::Zero(p.nu(), p.ny()));
}

SynthesisResult optimal_controller(const TwoPlayerPlant& p, const Tolerances& tol) {
    const AssumptionReport rep = check_assumptions(p, tol);
    if (!rep.all()) {
        std::string msg = "assumptions violated:";
        for (int i = 0; i < 6; ++i)
            if (!rep.pass[i]) msg += " A" + std::to_string(i + 1) + " (" + rep.detail[i] + ")";
        throw AssumptionError(msg);
    }
    const TriangularStabilizability ts = exists_triangular_stabilizing(p);
    if (!ts.ok()) throw AssumptionError(ts.detail());

    SynthesisResult r;
    r.ares = solve_four_ares(p, tol);
    r.nominal = nominal_gains(p, r.ares.J, r.ares.M, tol);
    r.coupling = solve_phi_psi(p, r.ares, tol);
    const HatGains g = gains_hat(p, r.ares, r.coupling);
    r.Khat = g.Khat;
    r.Lhat = g.Lhat;
    r.H = g.H;
    r.Ahat = p.A + p.B2 * r.Khat + r.Lhat * p.C2;
    if (!is_hurwitz(r.Ahat, tol.hurwitz))
        throw NumericalError("optimal_controller: A + B2 Khat + Lhat C2 is not Hurwitz");

    ObserverForm& o = r.observer;
    o.A_zeta = p.A + p.B2 * r.ares.K + r.Lhat * p.C2;
    o.A_xi_zeta = p.B2 * r.ares.K - p.B2 * r.Khat;
    o.A_xi = p.A + r.ares.L * p.C2 + p.B2 * r.Khat;
    o.B_zeta = -r.Lhat;
    o.B_xi = -r.ares.L;
    o.C_zeta = r.ares.K - r.Khat;
    o.C_xi = r.Khat;

    r.controller = controller_realization(p, r.ares, r.Khat, r.Lhat, Realization::primary);
    r.controller_alt = controller_realization(p, r.ares, r.Khat, r.Lhat, Realization::alternative);
    return r;
}

CentralizedResult centralized_h2(const TwoPlayerPlant& p, const Tolerances& tol) {
    p.validate();
    if (!centralized_stabilizable(p))
        throw AssumptionError("centralized_h2: (A, B2) not stabilizable or (C2, A) not detectable");
    const AreSolution x =
        named_are("control ARE (X, K)", [&] { return solve_are(p.A, p.B2, p.C1, p.D12, tol); });
    const AreSolution y = named_are("filter ARE (Y, L)", [&] {
        return solve_are(p.A.transpose(), p.C2.transpose(), p.B1.transpose(), p.D21.transpose(),
                         tol);
    });
    const CostCovariance cc = cost_cov_matrices(p);
    CentralizedResult c;
    c.X = x.X;
    c.K_gain = x.K;
    c.Y = y.X;
    c.L = y.K.transpose();
    c.K = StateSpace(p.A + p.B2 * c.K_gain + c.L * p.C2, -c.L, c.K_gain,
                     Mat::Zero(p.nu(), p.ny()));
    c.norm_sq_xw = (c.X * cc.W).trace() + (c.Y * c.K_gain.transpose() * cc.R * c.K_gain).trace();
    c.norm_sq_yq = (c.Y * cc.Q).trace() + (c.X * c.L * cc.V * c.L.transpose()).trace();
    const double a = c.norm_sq_xw, bq = c.norm_sq_yq;
    if (std::abs(a - bq) > 1e-8 * (1.0 + std::abs(a)))
        throw NumericalError("centralized_h2: trace formulas disagree");
    c.norm = std::sqrt(std::max(0.0, a));
    return c;
}

}  // namespace twoplayer
