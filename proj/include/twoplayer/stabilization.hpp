#pragma once

#include <string>

#include "twoplayer/plant.hpp"
#include "twoplayer/sysmodel.hpp"

namespace twoplayer {

struct TriangularStabilizability {
    bool stabilizable11 = false, detectable11 = false;
    bool stabilizable22 = false, detectable22 = false;
    bool ok() const { return stabilizable11 && detectable11 && stabilizable22 && detectable22; }
    std::string detail() const;
};

// (C11, A11, B11) and (C22, A22, B22) both stabilizable and detectable.
TriangularStabilizability exists_triangular_stabilizing(const TwoPlayerPlant& p);

// (A, B2) stabilizable and (C2, A) detectable.
bool centralized_stabilizable(const TwoPlayerPlant& p);

// (X~, J) = are(A22, B22, C1 E2, D12 E2).
AreSolution player2_control_are(const TwoPlayerPlant& p, const Tolerances& tol = {});
// (Y~, M^T) = are(A11^T, C11^T, (E1^T B1)^T, (E1^T D21)^T); returned K field holds M^T.
AreSolution player1_filter_are(const TwoPlayerPlant& p, const Tolerances& tol = {});

struct NominalGains {
    Mat K1, J;  // K_d = diag(K1, J)
    Mat M, L2;  // L_d = diag(M, L2)
    Mat Kd, Ld;
    Mat AKd, ALd, CKd, BLd;
};

NominalGains nominal_gains(const TwoPlayerPlant& p, const Tolerances& tol = {});
// Variant reusing already computed J and M.
NominalGains nominal_gains(const TwoPlayerPlant& p, const Mat& J, const Mat& M,
                           const Tolerances& tol = {});

// K0 = (A + B2 Kd + Ld C2, -Ld, Kd, 0).
StateSpace nominal_controller(const TwoPlayerPlant& p, const NominalGains& g);

struct ModelMatchData {
    StateSpace T11, T12, T21;
    StateSpace Jd;      // inputs (y, q_out), outputs (u, q_in)
    StateSpace Jd_inv;  // displayed inverse realization
    Partition part;
};

ModelMatchData youla_data(const TwoPlayerPlant& p, const NominalGains& g);

// K = F_l(J_d, Q).
StateSpace controller_from_Q(const StateSpace& Jd, const StateSpace& Q);
// Q = F_u(J_d^{-1}, K).
StateSpace q_from_controller(const StateSpace& Jd, const StateSpace& K);

// Closed loop F_l(P, K) of the generalized plant.
StateSpace closed_loop(const TwoPlayerPlant& p, const StateSpace& K);

}  // namespace twoplayer
