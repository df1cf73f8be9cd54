#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twoplayer/synthesis.hpp"

namespace twoplayer {

// ---- Lyapunov identities -------------------------------------------------

struct HatPair {
    Mat Yhat, Xhat;
    // Scaled deviations |a - b| / (1 + |b|).
    double err_Y11 = 0;  // Yhat11 vs Y~
    double err_Y21 = 0;  // Yhat21 vs Psi
    double err_X22 = 0;  // Xhat22 vs X~
    double err_X21 = 0;  // Xhat21 vs Phi
    double err_Lhat = 0;  // Lhat reconstructed from Yhat
    double err_Khat = 0;  // Khat reconstructed from Xhat
    double min_eig_dY = 0, min_eig_dX = 0;
};

HatPair hat_pair(const TwoPlayerPlant& p, const SynthesisResult& s);

struct GramianTriple {
    Mat Theta;  // 3n x 3n controllability Gramian in (zeta, xi - zeta, x - xi)
    Mat Z, mid, Y;
    double offdiag_rel = 0;       // max off-diagonal block norm / |Theta|
    double diag_err = 0;          // max scaled deviation of diagonal blocks from (Z, Yhat - Y, Y)
    double z_residual = 0;        // Lyapunov residual of Z
    double realization_err = 0;   // displayed A_c vs transformed F_l(P, K_opt)
};

GramianTriple closed_loop_gramian(const TwoPlayerPlant& p, const SynthesisResult& s);

// ---- estimators ----------------------------------------------------------

// (A_L, [-L, B2], I, 0) for the plant x' = Ax + B1 w + B2 u, y = C2 x + D21 w.
StateSpace kalman_estimator(const Mat& A, const Mat& B1, const Mat& B2, const Mat& C2,
                            const Mat& D21, const Tolerances& tol = {});
StateSpace kalman_estimator(const TwoPlayerPlant& p, const Tolerances& tol = {});

// (Ahat, [-Lhat E1, B2], [I; I; K], 0): (y1, u_zeta) -> (x, xi, u).
StateSpace zeta_estimator(const TwoPlayerPlant& p, const SynthesisResult& s);

struct EstimatorSystems {
    StateSpace E1, R1, E2, R2;
};

EstimatorSystems estimator_systems(const TwoPlayerPlant& p, const SynthesisResult& s);

struct OrthogonalityResiduals {
    double player1 = 0;  // E1 R1^*
    double player2 = 0;  // E2 R2^*
};

// H2 norm of the stable projection of E_i R_i^*. Uses s.Khat / s.Lhat (Ahat is
// recomputed), so a perturbed copy of `s` can be passed.
OrthogonalityResiduals orthogonality_residuals(const TwoPlayerPlant& p, const SynthesisResult& s);

// ---- cost ----------------------------------------------------------------

struct DeltaCost {
    double norm = 0;     // |(Ahat, (Lhat - L) D21, D12 (Khat - K), 0)|^2
    double trace_Y = 0;  // tr (Yhat - Y)(Khat - K)^T R (Khat - K)
    double trace_X = 0;  // tr (Xhat - X)(Lhat - L) V (Lhat - L)^T
    double youla = 0;    // |D12 Q_you D21|^2
    double cl_opt_sq = 0, cl_cen_sq = 0;  // closed-loop squared norms
    double gap() const { return cl_opt_sq - cl_cen_sq; }
};

DeltaCost delta_cost(const TwoPlayerPlant& p, const SynthesisResult& s, const HatPair& h);

struct YoulaParameters {
    StateSpace Q_opt;             // F_u(J_d^{-1}, K_opt)
    StateSpace Q_opt_simplified;  // (diag(A_K, A_L), [Lhat; L_d - L], [K_d - K, Khat], 0)
    StateSpace Q_you;             // (Ahat, Lhat - L, Khat - K, 0)
    ModelMatchData T;
};

YoulaParameters youla_parameters(const TwoPlayerPlant& p, const SynthesisResult& s);

// ---- model matching ------------------------------------------------------

// H2 norms of the stable projections of the (1,1), (2,1), (2,2) blocks of
// T12^*(T11 + T12 Q T21)T21^*, divided by 1 + |stable projection of T12^* T11 T21^*|.
// Entry (0,1) is reported as 0.
Eigen::Matrix2d structured_optimality_residual(const ModelMatchData& T, const StateSpace& Q);
// Same scaling, whole product.
double centralized_optimality_residual(const StateSpace& T11, const StateSpace& T12,
                                       const StateSpace& T21, const StateSpace& Q);

// Optimal unstructured Q for min |T11 + T12 Q T21| over stable Q.
StateSpace centralized_model_match(const StateSpace& T11, const StateSpace& T12,
                                   const StateSpace& T21, const Tolerances& tol = {});

// Kronecker-product realizations.
StateSpace kron_sys(const StateSpace& G1, const StateSpace& G2);
StateSpace vec_sys(const StateSpace& G);

struct OracleOptions {
    Index guard = 200;      // max raw Kronecker state count
    bool structured = true; // false: keep every entry of vec(Q)
    Tolerances tol;
};

struct OracleResult {
    StateSpace Q;
    double norm = 0;         // |T11 + T12 Q T21|
    Index raw_states = 0;    // before reduction
    Index reduced_states = 0;
};

OracleResult vectorization_oracle(const ModelMatchData& T, const Partition& part,
                                  const OracleOptions& opt = {});

struct FixedPointMaps {
    StateSpace g1;  // (A_L, (L_d - L) E2, E2^T Khat, 0), the optimal Q22
    StateSpace g2;  // (A_K, Lhat E1, E1^T (K_d - K), 0), the optimal Q11
};

FixedPointMaps fixed_point_maps(const TwoPlayerPlant& p, const SynthesisResult& s);

// Random stable block-lower m x k system with unit H2 norm: one first-order entry
// c / (s + a) per admissible (i, j).
StateSpace random_lower_direction(const Partition& part, std::uint64_t seed);

// ---- duality -------------------------------------------------------------

// Block-swap permutation [[0, I_second], [I_first, 0]].
Mat swap_permutation(const Split& s);
TwoPlayerPlant dual_plant(const TwoPlayerPlant& p);

struct DualityErrors {
    double X = 0, K = 0, Xhat = 0, Khat = 0, Ahat = 0;
    double max() const;
};

// Compares the synthesis of the dual plant against the transformed primal quantities.
DualityErrors duality_errors(const TwoPlayerPlant& p, const SynthesisResult& primal,
                             const SynthesisResult& dual, const HatPair& primal_hat,
                             const HatPair& dual_hat);

// ---- Monte Carlo ---------------------------------------------------------

struct MonteCarloOptions {
    double step = 1e-3;
    double horizon_time_constants = 50.0;
    int paths = 10000;
    std::uint64_t seed = 20140512ULL;
};

struct MonteCarloResult {
    Mat covariance;  // sample covariance of x - zeta at the final time
    Mat expected;    // Yhat
    double rel_error = 0;
    double horizon = 0;
    long steps = 0;
};

// Euler-Maruyama simulation of the closed loop driven by unit white noise.
MonteCarloResult monte_carlo_zeta_error(const TwoPlayerPlant& p, const SynthesisResult& s,
                                        const MonteCarloOptions& opt = {});

// ---- full identity suite -------------------------------------------------

struct Check {
    std::string name;
    double value = 0;
    double tol = 0;
    bool pass = false;
    bool lower_bound = false;  // pass means value > tol
};

struct VerifyOptions {
    bool oracle = false;
    double tol = 1e-6;           // comparison tolerance
    double residual_tol = 1e-8;  // residual tolerance
    Index guard = 200;
    std::uint64_t seed = 1;
    Tolerances numerics;
};

std::vector<Check> verify_all(const TwoPlayerPlant& p, const VerifyOptions& opt = {});

}  // namespace twoplayer
