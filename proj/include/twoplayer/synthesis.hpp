#pragma once

#include "twoplayer/plant.hpp"
#include "twoplayer/stabilization.hpp"

namespace twoplayer {

struct AreBundle {
    Mat X, K;    // are(A, B2, C1, D12)
    Mat Y, L;    // are(A^T, C2^T, B1^T, D21^T), L = (gain)^T
    Mat Xt, J;   // are(A22, B22, C1 E2, D12 E2)
    Mat Yt, M;   // are(A11^T, C11^T, ...), M = (gain)^T
    Mat AK, AL, AJ, AM;
    double residual_X = 0, residual_Y = 0, residual_Xt = 0, residual_Yt = 0;
};

AreBundle solve_four_ares(const TwoPlayerPlant& p, const Tolerances& tol = {});

// Stacked [vec(Phi); vec(Psi)] system: coef * x = rhs.
struct PhiPsiSystem {
    Mat coef;
    Vec rhs;
};

PhiPsiSystem build_phi_psi_system(const TwoPlayerPlant& p, const AreBundle& b);

struct CouplingSolution {
    Mat Phi, Psi;  // n2 x n1
    double residual_phi = 0, residual_psi = 0;
    bool min_norm = false;  // coefficient matrix was rank deficient
};

// Residuals of the two coupled equations, in matrix form.
std::pair<Mat, Mat> phi_psi_residuals(const TwoPlayerPlant& p, const AreBundle& b, const Mat& Phi,
                                      const Mat& Psi);

CouplingSolution solve_phi_psi(const TwoPlayerPlant& p, const AreBundle& b,
                               const Tolerances& tol = {});

struct HatGains {
    Mat Khat;  // (m1+m2) x n, first block row zero
    Mat Lhat;  // n x (k1+k2), second block column zero
    Mat H;     // (2,1) block of Khat
};

HatGains gains_hat(const TwoPlayerPlant& p, const AreBundle& b, const CouplingSolution& c);

// Controller states (zeta, xi): blocks of the primary realization.
struct ObserverForm {
    Mat A_zeta;      // A + B2 K + Lhat C2
    Mat A_xi_zeta;   // B2 K - B2 Khat
    Mat A_xi;        // A + L C2 + B2 Khat
    Mat B_zeta, B_xi;  // -Lhat, -L
    Mat C_zeta, C_xi;  // K - Khat, Khat
};

enum class Realization { primary, alternative };

struct SynthesisResult {
    AreBundle ares;
    CouplingSolution coupling;
    NominalGains nominal;
    Mat Khat, Lhat, H, Ahat;
    ObserverForm observer;
    StateSpace controller;      // primary realization, 2n states
    StateSpace controller_alt;  // alternative realization
};

StateSpace controller_realization(const TwoPlayerPlant& p, const AreBundle& b, const Mat& Khat,
                                  const Mat& Lhat, Realization which);

// Throws AssumptionError when A1-A6 or structured stabilizability fail,
// AreError / NumericalError on numerical breakdown.
SynthesisResult optimal_controller(const TwoPlayerPlant& p, const Tolerances& tol = {});

struct CentralizedResult {
    StateSpace K;       // (A + B2 K + L C2, -L, K, 0)
    double norm = 0;    // closed-loop H2 norm
    double norm_sq_xw = 0;  // tr(XW) + tr(Y K^T R K)
    double norm_sq_yq = 0;  // tr(YQ) + tr(X L V L^T)
    Mat X, K_gain, Y, L;
};

CentralizedResult centralized_h2(const TwoPlayerPlant& p, const Tolerances& tol = {});

}  // namespace twoplayer
