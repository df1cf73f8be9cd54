#include "twoplayer/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "twoplayer/errors.hpp"

namespace twoplayer {

namespace {

double fro(const Mat& M) { return M.size() == 0 ? 0.0 : M.norm(); }

double rel_dev(const Mat& a, const Mat& b) { return fro(a - b) / (1.0 + fro(b)); }

Mat blkdiag(const Mat& X, const Mat& Y) {
    Mat M = Mat::Zero(X.rows() + Y.rows(), X.cols() + Y.cols());
    M.topLeftCorner(X.rows(), X.cols()) = X;
    M.bottomRightCorner(Y.rows(), Y.cols()) = Y;
    return M;
}

// Stable part of M G, M stable and G antistable (any feedthrough): strictly proper.
StateSpace stable_part_right(const StateSpace& M, const StateSpace& G) {
    const Mat N = M.B * G.C;
    const Mat Z = solve_sylvester(M.A, -G.A, N);
    return StateSpace(M.A, M.B * G.D - Z * G.B, M.C, Mat::Zero(M.outputs(), G.inputs()));
}

// Stable part of G S, G antistable and S stable strictly proper.
StateSpace stable_part_left(const StateSpace& G, const StateSpace& S) {
    const Mat Z = solve_sylvester(G.A, -S.A, G.B * S.C);
    return StateSpace(S.A, S.B, G.C * Z + G.D * S.C, Mat::Zero(G.outputs(), S.inputs()));
}

// H2 norm of the stable projection of L^* M R^*, with L, M, R stable.
double projection_norm(const StateSpace* L, const StateSpace& M, const StateSpace* R) {
    StateSpace S = R ? stable_part_right(M, conjugate_transpose(*R))
                     : StateSpace(M.A, M.B, M.C, Mat::Zero(M.outputs(), M.inputs()));
    if (L) S = stable_part_left(conjugate_transpose(*L), S);
    return h2_norm(S);
}

}  // namespace

// ---- Lyapunov identities -------------------------------------------------

HatPair hat_pair(const TwoPlayerPlant& p, const SynthesisResult& s) {
    const CostCovariance cc = cost_cov_matrices(p);
    const AreBundle& b = s.ares;
    const Mat dL = s.Lhat - b.L, dK = s.Khat - b.K;
    HatPair h;
    h.Yhat = b.Y + solve_lyapunov(s.Ahat, dL * cc.V * dL.transpose());
    h.Xhat = b.X + solve_lyapunov(s.Ahat.transpose(), dK.transpose() * cc.R * dK);

    const Mat E1 = p.En(1), E2 = p.En(2);
    h.err_Y11 = rel_dev(E1.transpose() * h.Yhat * E1, b.Yt);
    h.err_Y21 = rel_dev(E2.transpose() * h.Yhat * E1, s.coupling.Psi);
    h.err_X22 = rel_dev(E2.transpose() * h.Xhat * E2, b.Xt);
    h.err_X21 = rel_dev(E2.transpose() * h.Xhat * E1, s.coupling.Phi);

    const Mat Ek1 = p.Ek(1), Em2 = p.Em(2);
    const Mat V11 = Ek1.transpose() * cc.V * Ek1;
    const Mat R22 = Em2.transpose() * cc.R * Em2;
    const Mat Lrec = -(h.Yhat * p.C2.transpose() + cc.U.transpose()) * Ek1 *
                     V11.llt().solve(Ek1.transpose());
    const Mat Krec = -Em2 * R22.llt().solve(Em2.transpose() *
                                            (p.B2.transpose() * h.Xhat + cc.S.transpose()));
    h.err_Lhat = rel_dev(Lrec, s.Lhat);
    h.err_Khat = rel_dev(Krec, s.Khat);
    h.min_eig_dY = min_eig_sym(h.Yhat - b.Y);
    h.min_eig_dX = min_eig_sym(h.Xhat - b.X);
    return h;
}

GramianTriple closed_loop_gramian(const TwoPlayerPlant& p, const SynthesisResult& s) {
    const CostCovariance cc = cost_cov_matrices(p);
    const AreBundle& b = s.ares;
    const Index n = p.n();
    const Mat dLC = (s.Lhat - b.L) * p.C2;

    Mat Ac = Mat::Zero(3 * n, 3 * n);
    Ac.block(0, 0, n, n) = b.AK;
    Ac.block(0, n, n, n) = -s.Lhat * p.C2;
    Ac.block(0, 2 * n, n, n) = -s.Lhat * p.C2;
    Ac.block(n, n, n, n) = s.Ahat;
    Ac.block(n, 2 * n, n, n) = dLC;
    Ac.block(2 * n, 2 * n, n, n) = b.AL;
    Mat Bc(3 * n, p.nw());
    Bc << -s.Lhat * p.D21, (s.Lhat - b.L) * p.D21, p.B1 + b.L * p.D21;

    GramianTriple g;
    g.Theta = solve_lyapunov(Ac, Bc * Bc.transpose());
    g.Z = solve_lyapunov(b.AK, s.Lhat * cc.V * s.Lhat.transpose());
    g.Y = b.Y;
    g.mid = hat_pair(p, s).Yhat - b.Y;
    g.z_residual = fro(b.AK * g.Z + g.Z * b.AK.transpose() + s.Lhat * cc.V * s.Lhat.transpose()) /
                   (1.0 + fro(g.Z));

    const double scale = std::max(fro(g.Theta), 1e-300);
    double off = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) off = std::max(off, fro(g.Theta.block(i * n, j * n, n, n)));
    g.offdiag_rel = off / scale;
    g.diag_err = std::max({rel_dev(g.Theta.block(0, 0, n, n), g.Z),
                           rel_dev(g.Theta.block(n, n, n, n), g.mid),
                           rel_dev(g.Theta.block(2 * n, 2 * n, n, n), g.Y)});

    // The displayed realization must be the actual closed loop in the coordinates
    // (zeta, xi - zeta, x - xi).
    const StateSpace cl = closed_loop(p, s.controller);
    const Mat I = Mat::Identity(n, n);
    Mat T = Mat::Zero(3 * n, 3 * n);
    T.block(0, n, n, n) = I;
    T.block(n, n, n, n) = -I;
    T.block(n, 2 * n, n, n) = I;
    T.block(2 * n, 0, n, n) = I;
    T.block(2 * n, 2 * n, n, n) = -I;
    const Mat Ti = T.inverse();
    g.realization_err = std::max(rel_dev(T * cl.A * Ti, Ac), rel_dev(T * cl.B, Bc));
    return g;
}

// ---- estimators ----------------------------------------------------------

StateSpace kalman_estimator(const Mat& A, const Mat& B1, const Mat& B2, const Mat& C2,
                            const Mat& D21, const Tolerances& tol) {
    const AreSolution y = solve_are(A.transpose(), C2.transpose(), B1.transpose(),
                                    D21.transpose(), tol);
    const Mat L = y.K.transpose();
    const Index n = A.rows();
    Mat B(n, C2.rows() + B2.cols());
    B << -L, B2;
    return StateSpace(A + L * C2, B, Mat::Identity(n, n), Mat::Zero(n, B.cols()));
}

StateSpace kalman_estimator(const TwoPlayerPlant& p, const Tolerances& tol) {
    return kalman_estimator(p.A, p.B1, p.B2, p.C2, p.D21, tol);
}

StateSpace zeta_estimator(const TwoPlayerPlant& p, const SynthesisResult& s) {
    const Index n = p.n(), k1 = p.part.k.first;
    Mat B(n, k1 + p.nu());
    B << -s.Lhat * p.Ek(1), p.B2;
    Mat C(2 * n + p.nu(), n);
    C << Mat::Identity(n, n), Mat::Identity(n, n), s.ares.K;
    return StateSpace(s.Ahat, B, C, Mat::Zero(C.rows(), B.cols()));
}

EstimatorSystems estimator_systems(const TwoPlayerPlant& p, const SynthesisResult& s) {
    const AreBundle& b = s.ares;
    const Index n = p.n();
    const Mat Ahat = p.A + p.B2 * s.Khat + s.Lhat * p.C2;
    const Mat BL = p.B1 + b.L * p.D21;
    EstimatorSystems e;
    e.E2 = StateSpace(b.AL, BL, Mat::Identity(n, n), Mat::Zero(n, p.nw()));
    e.R2 = StateSpace(b.AL, BL, p.C2, p.D21);

    Mat A1 = Mat::Zero(2 * n, 2 * n);
    A1.topLeftCorner(n, n) = Ahat;
    A1.topRightCorner(n, n) = (s.Lhat - b.L) * p.C2;
    A1.bottomRightCorner(n, n) = b.AL;
    Mat B1(2 * n, p.nw());
    B1 << (s.Lhat - b.L) * p.D21, BL;
    Mat C1(n, 2 * n);
    C1 << Mat::Identity(n, n), Mat::Identity(n, n);
    e.E1 = StateSpace(A1, B1, C1, Mat::Zero(n, p.nw()));

    const Mat En1 = p.En(1), Ek1 = p.Ek(1);
    const StateSpace F(b.AM, b.M * Ek1.transpose() - En1.transpose() * b.L, p.C2blk(1, 1),
                       Ek1.transpose());
    e.R1 = multiply(F, e.R2);
    return e;
}

OrthogonalityResiduals orthogonality_residuals(const TwoPlayerPlant& p, const SynthesisResult& s) {
    const EstimatorSystems e = estimator_systems(p, s);
    OrthogonalityResiduals r;
    r.player2 = projection_norm(nullptr, e.E2, &e.R2);
    r.player1 = projection_norm(nullptr, e.E1, &e.R1);
    return r;
}

// ---- cost ----------------------------------------------------------------

DeltaCost delta_cost(const TwoPlayerPlant& p, const SynthesisResult& s, const HatPair& h) {
    const CostCovariance cc = cost_cov_matrices(p);
    const AreBundle& b = s.ares;
    const Mat dL = s.Lhat - b.L, dK = s.Khat - b.K;
    DeltaCost d;
    const StateSpace G(s.Ahat, dL * p.D21, p.D12 * dK, Mat::Zero(p.nz(), p.nw()));
    d.norm = std::pow(h2_norm(G), 2);
    d.trace_Y = ((h.Yhat - b.Y) * dK.transpose() * cc.R * dK).trace();
    d.trace_X = ((h.Xhat - b.X) * dL * cc.V * dL.transpose()).trace();
    const StateSpace Qyou(s.Ahat, dL, dK, Mat::Zero(p.nu(), p.ny()));
    d.youla = std::pow(h2_norm(left_multiply(p.D12, right_multiply(Qyou, p.D21))), 2);
    d.cl_opt_sq = std::pow(h2_norm(closed_loop(p, s.controller)), 2);
    const CentralizedResult cen = centralized_h2(p);
    d.cl_cen_sq = std::pow(h2_norm(closed_loop(p, cen.K)), 2);
    return d;
}

YoulaParameters youla_parameters(const TwoPlayerPlant& p, const SynthesisResult& s) {
    const AreBundle& b = s.ares;
    const NominalGains& g = s.nominal;
    const Index n = p.n();
    YoulaParameters y;
    y.T = youla_data(p, g);
    y.Q_opt = lft_upper(y.T.Jd_inv, s.controller);
    Mat B(2 * n, p.ny());
    B << s.Lhat, g.Ld - b.L;
    Mat C(p.nu(), 2 * n);
    C << g.Kd - b.K, s.Khat;
    y.Q_opt_simplified = StateSpace(blkdiag(b.AK, b.AL), B, C, Mat::Zero(p.nu(), p.ny()));
    y.Q_you = StateSpace(s.Ahat, s.Lhat - b.L, s.Khat - b.K, Mat::Zero(p.nu(), p.ny()));
    return y;
}

// ---- model matching ------------------------------------------------------

Eigen::Matrix2d structured_optimality_residual(const ModelMatchData& T, const StateSpace& Q) {
    const StateSpace cl = add(T.T11, multiply(T.T12, multiply(Q, T.T21)));
    const Index m1 = T.part.m.first, m2 = T.part.m.second;
    const Index k1 = T.part.k.first, k2 = T.part.k.second;
    // Block (i, j) of T12^* cl T21^* is (T12 E_i)^* cl (E_j^T T21)^*.
    const StateSpace L1 = subsystem(T.T12, 0, T.T12.outputs(), 0, m1);
    const StateSpace L2 = subsystem(T.T12, 0, T.T12.outputs(), m1, m2);
    const StateSpace R1 = subsystem(T.T21, 0, k1, 0, T.T21.inputs());
    const StateSpace R2 = subsystem(T.T21, k1, k2, 0, T.T21.inputs());
    const double scale = 1.0 + projection_norm(&T.T12, T.T11, &T.T21);
    Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
    r(0, 0) = projection_norm(&L1, cl, &R1) / scale;
    r(1, 0) = projection_norm(&L2, cl, &R1) / scale;
    r(1, 1) = projection_norm(&L2, cl, &R2) / scale;
    return r;
}

double centralized_optimality_residual(const StateSpace& T11, const StateSpace& T12,
                                       const StateSpace& T21, const StateSpace& Q) {
    const StateSpace cl = add(T11, multiply(T12, multiply(Q, T21)));
    return projection_norm(&T12, cl, &T21) / (1.0 + projection_norm(&T12, T11, &T21));
}

StateSpace centralized_model_match(const StateSpace& T11, const StateSpace& T12,
                                   const StateSpace& T21, const Tolerances& tol) {
    T11.validate();
    T12.validate();
    T21.validate();
    if (T11.D.size() > 0 && T11.D.cwiseAbs().maxCoeff() > 0)
        throw AssumptionError("centralized_model_match: T11 has nonzero feedthrough");
    if (T12.outputs() != T11.outputs() || T21.inputs() != T11.inputs())
        throw DimensionError("centralized_model_match: block shapes are inconsistent");
    const Index n1 = T11.states(), n2 = T12.states(), n3 = T21.states();
    const Index N = n1 + n2 + n3;
    const Index nw = T11.inputs(), nz = T11.outputs(), m = T12.inputs(), k = T21.outputs();

    // Joint realization [T11 T12; T21 0] by block-diagonal stacking.
    Mat A = Mat::Zero(N, N);
    A.block(0, 0, n1, n1) = T11.A;
    A.block(n1, n1, n2, n2) = T12.A;
    A.block(n1 + n2, n1 + n2, n3, n3) = T21.A;
    Mat B1 = Mat::Zero(N, nw), B2 = Mat::Zero(N, m);
    B1.topRows(n1) = T11.B;
    B1.bottomRows(n3) = T21.B;
    B2.middleRows(n1, n2) = T12.B;
    Mat C1 = Mat::Zero(nz, N), C2 = Mat::Zero(k, N);
    C1.leftCols(n1) = T11.C;
    C1.middleCols(n1, n2) = T12.C;
    C2.rightCols(n3) = T21.C;
    if (!is_hurwitz(A, tol.hurwitz))
        throw AssumptionError("centralized_model_match: T is not stable");

    AreSolution x, y;
    try {
        x = solve_are(A, B2, C1, T12.D, tol);
        y = solve_are(A.transpose(), C2.transpose(), B1.transpose(), T21.D.transpose(), tol);
    } catch (const AreError& e) {
        throw AssumptionError(std::string("centralized_model_match: ") + e.what());
    }
    const Mat K = x.K, L = y.K.transpose();
    Mat Aq = Mat::Zero(2 * N, 2 * N);
    Aq.topLeftCorner(N, N) = A + B2 * K;
    Aq.topRightCorner(N, N) = B2 * K;
    Aq.bottomRightCorner(N, N) = A + L * C2;
    Mat Bq(2 * N, k);
    Bq << Mat::Zero(N, k), -L;
    Mat Cq(m, 2 * N);
    Cq << K, K;
    return StateSpace(Aq, Bq, Cq, Mat::Zero(m, k));
}

StateSpace kron_sys(const StateSpace& G1, const StateSpace& G2) {
    // G1 (x) G2 = (G1 (x) I_p2)(I_q1 (x) G2).
    const Index p2 = G2.outputs(), q1 = G1.inputs();
    const Mat Ip = Mat::Identity(p2, p2), Iq = Mat::Identity(q1, q1);
    const StateSpace left(kron(G1.A, Ip), kron(G1.B, Ip), kron(G1.C, Ip), kron(G1.D, Ip));
    const StateSpace right(kron(Iq, G2.A), kron(Iq, G2.B), kron(Iq, G2.C), kron(Iq, G2.D));
    return multiply(left, right);
}

StateSpace vec_sys(const StateSpace& G) {
    if (G.D.size() > 0 && G.D.cwiseAbs().maxCoeff() > 0) {
        const Index q = G.inputs();
        const Mat I = Mat::Identity(q, q);
        return StateSpace(kron(I, G.A), vec(G.B), kron(I, G.C), vec(G.D));
    }
    const Index q = G.inputs();
    const Mat I = Mat::Identity(q, q);
    return StateSpace(kron(I, G.A), vec(G.B), kron(I, G.C), Mat::Zero(G.outputs() * q, 1));
}

OracleResult vectorization_oracle(const ModelMatchData& T, const Partition& part,
                                  const OracleOptions& opt) {
    const Index m = T.T12.inputs(), k = T.T21.outputs();
    const Index m1 = part.m.first, k1 = part.k.first;
    if (m != part.m.total() || k != part.k.total())
        throw DimensionError("vectorization_oracle: partition does not match T");

    const StateSpace Tv = vec_sys(T.T11);
    const StateSpace Kr = kron_sys(transpose(T.T21), T.T12);
    OracleResult r;
    r.raw_states = Tv.states() + Kr.states();
    if (r.raw_states > opt.guard) {
        std::ostringstream os;
        os << "vectorization_oracle: Kronecker realization has " << r.raw_states
           << " states, above the guard of " << opt.guard;
        throw ScaleGuardError(os.str());
    }

    // Columns of the identity kept by E: entries (i, j) of Q, vec index j*m + i,
    // except the structurally zero block i < m1, j >= k1.
    std::vector<Index> keep;
    for (Index j = 0; j < k; ++j)
        for (Index i = 0; i < m; ++i)
            if (!opt.structured || !(i < m1 && j >= k1)) keep.push_back(j * m + i);
    Mat E = Mat::Zero(m * k, static_cast<Index>(keep.size()));
    for (Index c = 0; c < static_cast<Index>(keep.size()); ++c) E(keep[c], c) = 1.0;

    const StateSpace Tv_r = minreal(Tv);
    const StateSpace KE_r = minreal(right_multiply(Kr, E));
    r.reduced_states = Tv_r.states() + KE_r.states();
    const StateSpace q = centralized_model_match(Tv_r, KE_r, StateSpace::gain(Mat::Identity(1, 1)),
                                                 opt.tol);

    // Un-vectorize: column j of Q is rows [j*m, (j+1)*m) of E q.
    const StateSpace Eq = left_multiply(E, q);
    const Index nq = Eq.states();
    Mat A = Mat::Zero(k * nq, k * nq), B = Mat::Zero(k * nq, k), C(m, k * nq);
    for (Index j = 0; j < k; ++j) {
        A.block(j * nq, j * nq, nq, nq) = Eq.A;
        B.block(j * nq, j, nq, 1) = Eq.B;
        C.middleCols(j * nq, nq) = Eq.C.middleRows(j * m, m);
    }
    r.Q = minreal(StateSpace(A, B, C, Mat::Zero(m, k)));
    r.norm = h2_norm(add(T.T11, multiply(T.T12, multiply(r.Q, T.T21))));
    return r;
}

FixedPointMaps fixed_point_maps(const TwoPlayerPlant& p, const SynthesisResult& s) {
    const AreBundle& b = s.ares;
    const NominalGains& g = s.nominal;
    FixedPointMaps f;
    const Mat Kbar2 = p.Em(2).transpose() * s.Khat;
    const Mat Lbar2 = s.Lhat * p.Ek(1);
    f.g1 = StateSpace(b.AL, (g.Ld - b.L) * p.Ek(2), Kbar2,
                      Mat::Zero(p.part.m.second, p.part.k.second));
    f.g2 = StateSpace(b.AK, Lbar2, p.Em(1).transpose() * (g.Kd - b.K),
                      Mat::Zero(p.part.m.first, p.part.k.first));
    return f;
}

StateSpace random_lower_direction(const Partition& part, std::uint64_t seed) {
    const Index m = part.m.total(), k = part.k.total();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> gain(-1.0, 1.0), pole(0.5, 2.0);
    std::vector<std::pair<Index, Index>> entries;
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < k; ++j)
            if (!(i < part.m.first && j >= part.k.first)) entries.emplace_back(i, j);
    const Index ns = static_cast<Index>(entries.size());
    Mat A = Mat::Zero(ns, ns), B = Mat::Zero(ns, k), C = Mat::Zero(m, ns);
    for (Index s = 0; s < ns; ++s) {
        A(s, s) = -pole(rng);
        B(s, entries[s].second) = 1.0;
        C(entries[s].first, s) = gain(rng);
    }
    StateSpace d(A, B, C, Mat::Zero(m, k));
    const double nrm = h2_norm(d);
    if (nrm > 0) d.C /= nrm;
    return d;
}

// ---- duality -------------------------------------------------------------

Mat swap_permutation(const Split& s) {
    Mat P = Mat::Zero(s.total(), s.total());
    P.topRightCorner(s.second, s.second).setIdentity();
    P.bottomLeftCorner(s.first, s.first).setIdentity();
    return P;
}

TwoPlayerPlant dual_plant(const TwoPlayerPlant& p) {
    const Mat Pn = swap_permutation(p.part.n), Pm = swap_permutation(p.part.m),
              Pk = swap_permutation(p.part.k);
    TwoPlayerPlant d;
    d.A = Pn * p.A.transpose() * Pn.transpose();
    d.B2 = Pn * p.C2.transpose() * Pk.transpose();
    d.C2 = Pm * p.B2.transpose() * Pn.transpose();
    d.B1 = Pn * p.C1.transpose();
    d.C1 = p.B1.transpose() * Pn.transpose();
    d.D12 = p.D21.transpose() * Pk.transpose();
    d.D21 = Pm * p.D12.transpose();
    d.part.n = {p.part.n.second, p.part.n.first};
    d.part.m = {p.part.k.second, p.part.k.first};
    d.part.k = {p.part.m.second, p.part.m.first};
    return d;
}

double DualityErrors::max() const { return std::max({X, K, Xhat, Khat, Ahat}); }

DualityErrors duality_errors(const TwoPlayerPlant& p, const SynthesisResult& primal,
                             const SynthesisResult& dual, const HatPair& primal_hat,
                             const HatPair& dual_hat) {
    const Mat Pn = swap_permutation(p.part.n), Pk = swap_permutation(p.part.k);
    DualityErrors e;
    e.X = rel_dev(dual.ares.X, Pn * primal.ares.Y * Pn.transpose());
    e.K = rel_dev(dual.ares.K, Pk * primal.ares.L.transpose() * Pn.transpose());
    e.Xhat = rel_dev(dual_hat.Xhat, Pn * primal_hat.Yhat * Pn.transpose());
    e.Khat = rel_dev(dual.Khat, Pk * primal.Lhat.transpose() * Pn.transpose());
    e.Ahat = rel_dev(dual.Ahat, Pn * primal.Ahat.transpose() * Pn.transpose());
    return e;
}

// ---- Monte Carlo ---------------------------------------------------------

MonteCarloResult monte_carlo_zeta_error(const TwoPlayerPlant& p, const SynthesisResult& s,
                                        const MonteCarloOptions& opt) {
    if (opt.paths < 2 || !(opt.step > 0) || !(opt.horizon_time_constants > 0))
        throw InputError("monte_carlo_zeta_error: invalid options");
    const StateSpace cl = closed_loop(p, s.controller);  // states (x, zeta, xi)
    const Index N = cl.states(), n = p.n(), nw = p.nw();
    const double abscissa = spectral_abscissa(cl.A);
    if (!(abscissa < 0)) throw NumericalError("monte_carlo_zeta_error: closed loop is unstable");

    MonteCarloResult r;
    r.horizon = opt.horizon_time_constants / (-abscissa);
    r.steps = static_cast<long>(std::ceil(r.horizon / opt.step));
    r.expected = hat_pair(p, s).Yhat;

    const Mat Phi = Mat::Identity(N, N) + opt.step * cl.A;
    const Mat G = std::sqrt(opt.step) * cl.B;
    const Index P = opt.paths;
    Mat X = Mat::Zero(N, P), Xn(N, P), W(nw, P);

    // Box-Muller over whole arrays so the transcendental calls vectorize.
    std::mt19937_64 rng(opt.seed);
    const Index half = (nw * P + 1) / 2;
    Eigen::ArrayXd u1(half), u2(half);
    auto fill_normals = [&](Mat& M) {
        for (Index i = 0; i < half; ++i) {
            u1(i) = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
            u2(i) = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        }
        const Eigen::ArrayXd rad = (-2.0 * u1.log()).sqrt();
        const Eigen::ArrayXd th = 6.283185307179586 * u2;
        Eigen::Map<Eigen::ArrayXd> d(M.data(), M.size());
        const Index h1 = M.size() / 2;
        d.head(h1) = rad.head(h1) * th.head(h1).cos();
        d.tail(M.size() - h1) = rad.head(M.size() - h1) * th.head(M.size() - h1).sin();
    };

    for (long t = 0; t < r.steps; ++t) {
        fill_normals(W);
        Xn.noalias() = Phi * X;
        Xn.noalias() += G * W;
        X.swap(Xn);
    }

    const Mat E = X.topRows(n) - X.middleRows(n, n);  // x - zeta
    // Two-pass sample covariance in long double.
    Eigen::Matrix<long double, Eigen::Dynamic, 1> mean = Eigen::Matrix<long double, Eigen::Dynamic, 1>::Zero(n);
    for (Index j = 0; j < P; ++j) mean += E.col(j).cast<long double>();
    mean /= static_cast<long double>(P);
    Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> acc =
        Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
    for (Index j = 0; j < P; ++j) {
        const auto c = (E.col(j).cast<long double>() - mean).eval();
        acc.noalias() += c * c.transpose();
    }
    r.covariance = (acc / static_cast<long double>(P - 1)).cast<double>();
    r.rel_error = fro(r.covariance - r.expected) / fro(r.expected);
    return r;
}

// ---- full identity suite -------------------------------------------------

std::vector<Check> verify_all(const TwoPlayerPlant& p, const VerifyOptions& opt) {
    std::vector<Check> out;
    auto add_check = [&out](std::string name, double value, double tol) {
        out.push_back({std::move(name), value, tol, value <= tol});
    };
    const SynthesisResult s = optimal_controller(p, opt.numerics);
    const double rt = opt.residual_tol, ct = opt.tol;

    add_check("are_residual_X", s.ares.residual_X, rt);
    add_check("are_residual_Y", s.ares.residual_Y, rt);
    add_check("are_residual_Xtilde", s.ares.residual_Xt, rt);
    add_check("are_residual_Ytilde", s.ares.residual_Yt, rt);
    add_check("phi_residual", s.coupling.residual_phi, rt);
    add_check("psi_residual", s.coupling.residual_psi, rt);

    const HatPair h = hat_pair(p, s);
    add_check("Yhat11_eq_Ytilde", h.err_Y11, rt);
    add_check("Yhat21_eq_Psi", h.err_Y21, rt);
    add_check("Xhat22_eq_Xtilde", h.err_X22, rt);
    add_check("Xhat21_eq_Phi", h.err_X21, rt);
    add_check("Lhat_from_Yhat", h.err_Lhat, rt);
    add_check("Khat_from_Xhat", h.err_Khat, rt);
    add_check("Yhat_minus_Y_psd", std::max(0.0, -h.min_eig_dY), 1e-9);
    add_check("Xhat_minus_X_psd", std::max(0.0, -h.min_eig_dX), 1e-9);

    const GramianTriple g = closed_loop_gramian(p, s);
    add_check("gramian_offdiag", g.offdiag_rel, 1e-7);
    add_check("gramian_diag", g.diag_err, 1e-7);
    add_check("gramian_realization", g.realization_err, rt);

    const OrthogonalityResiduals o = orthogonality_residuals(p, s);
    add_check("orthogonality_player1", o.player1, 1e-7);
    add_check("orthogonality_player2", o.player2, 1e-7);

    const DeltaCost d = delta_cost(p, s, h);
    const double dscale = 1.0 + std::abs(d.norm);
    add_check("delta_traceY_vs_norm", std::abs(d.trace_Y - d.norm) / dscale, 1e-7);
    add_check("delta_traceX_vs_norm", std::abs(d.trace_X - d.norm) / dscale, 1e-7);
    add_check("delta_youla_vs_norm", std::abs(d.youla - d.norm) / dscale, 1e-7);
    add_check("delta_nonnegative", std::max(0.0, -d.norm), 1e-9);
    add_check("delta_vs_closed_loop_gap", std::abs(d.gap() - d.norm) / std::max(1.0, d.cl_opt_sq),
              ct);

    const YoulaParameters y = youla_parameters(p, s);
    add_check("Qopt_simplified", markov_distance(y.Q_opt, y.Q_opt_simplified), 1e-7);
    add_check("Qopt_block_lower",
              is_block_lower_tf(y.Q_opt, p.part.m.first, p.part.k.first, 1e-8) ? 0.0 : 1.0, 0.0);
    add_check("Qopt_roundtrip", markov_distance(controller_from_Q(y.T.Jd, y.Q_opt), s.controller),
              1e-7);

    const FixedPointMaps f = fixed_point_maps(p, s);
    const Index m1 = p.part.m.first, m2 = p.part.m.second, k1 = p.part.k.first,
                k2 = p.part.k.second;
    add_check("fixed_point_Q11", markov_distance(subsystem(y.Q_opt, 0, m1, 0, k1), f.g2), 1e-7);
    add_check("fixed_point_Q22", markov_distance(subsystem(y.Q_opt, m1, m2, k1, k2), f.g1), 1e-7);

    add_check("controller_states_2n",
              s.controller.states() == 2 * p.n() ? 0.0 : 1.0, 0.0);
    add_check("controller_block_lower",
              is_block_lower_tf(s.controller, m1, k1, 1e-8) ? 0.0 : 1.0, 0.0);
    const StateSpace cl = closed_loop(p, s.controller);
    add_check("controller_stabilizing", std::max(0.0, spectral_abscissa(cl.A) + 1e-9), 0.0);
    add_check("realizations_agree", markov_distance(s.controller, s.controller_alt), 1e-7);

    if (opt.oracle) {
        add_check("structured_optimality",
                  structured_optimality_residual(y.T, y.Q_opt).maxCoeff(), ct);
        OracleOptions oo;
        oo.guard = opt.guard;
        oo.tol = opt.numerics;
        const OracleResult orc = vectorization_oracle(y.T, p.part, oo);
        const double cf = std::sqrt(d.cl_opt_sq);
        add_check("oracle_norm", std::abs(orc.norm - cf) / std::max(1.0, cf), ct);

        // A small structured perturbation must break the optimality certificate.
        const StateSpace dQ = random_lower_direction(p.part, opt.seed);
        const StateSpace Qp = add(y.Q_opt, StateSpace(dQ.A, 1e-2 * dQ.B, dQ.C, dQ.D));
        const double rp = structured_optimality_residual(y.T, Qp).maxCoeff();
        out.push_back({"perturbed_optimality_exceeds", rp, 1e-4, rp > 1e-4, true});
    }
    return out;
}

}  // namespace twoplayer
