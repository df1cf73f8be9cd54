#pragma once

#include <optional>
#include <vector>

#include "twoplayer/linalg.hpp"
#include "twoplayer/state_space.hpp"

namespace twoplayer {

// ---- interconnections ----------------------------------------------------

// Product G1 * G2 (G2 acts first).
StateSpace multiply(const StateSpace& G1, const StateSpace& G2);
// Signal flows through `first`, then `second`: returns second * first.
StateSpace series(const StateSpace& first, const StateSpace& second);
StateSpace add(const StateSpace& G1, const StateSpace& G2);
StateSpace subtract(const StateSpace& G1, const StateSpace& G2);
StateSpace negate(const StateSpace& G);
StateSpace left_multiply(const Mat& M, const StateSpace& G);
StateSpace right_multiply(const StateSpace& G, const Mat& M);
// G~(s) = G(-s)^T.
StateSpace conjugate_transpose(const StateSpace& G);
StateSpace transpose(const StateSpace& G);
StateSpace hstack(const StateSpace& G1, const StateSpace& G2);
StateSpace vstack(const StateSpace& G1, const StateSpace& G2);
StateSpace block_diag(const StateSpace& G1, const StateSpace& G2);
// Requires square invertible D.
StateSpace inverse(const StateSpace& G);
StateSpace similarity(const StateSpace& G, const Mat& T);  // x = T x'

// Sub-block of the transfer matrix: outputs [r0, r0+nr), inputs [c0, c0+nc).
StateSpace subsystem(const StateSpace& G, Eigen::Index r0, Eigen::Index nr, Eigen::Index c0,
                     Eigen::Index nc);

// F_l(P, K) = P11 + P12 K (I - P22 K)^{-1} P21; the split of P follows K's size.
StateSpace lft_lower(const StateSpace& P, const StateSpace& K);
// F_u(M, K) = M22 + M21 K (I - M11 K)^{-1} M12.
StateSpace lft_upper(const StateSpace& M, const StateSpace& K);

// ---- transfer-function probes --------------------------------------------

// [D, CB, CAB, ...], `count` entries.
std::vector<Mat> markov_parameters(const StateSpace& sys, int count);
CMat eval_at(const StateSpace& sys, cdouble s);

// Scaled Markov-parameter distance: max_k |M1_k - M2_k| / (rho^k * scale). Zero iff the
// transfer functions agree (when count covers both orders; default 2(n1+n2)+2).
double markov_distance(const StateSpace& G1, const StateSpace& G2, int count = -1);
// max over `points` frequencies on iR of |G1(jw) - G2(jw)| / (1 + |G1(jw)|).
double frequency_distance(const StateSpace& G1, const StateSpace& G2, int points = 32);

// True iff the (1,2) block (first `row_split` outputs x inputs past `col_split`) vanishes.
bool is_block_lower_tf(const StateSpace& sys, Eigen::Index row_split, Eigen::Index col_split,
                       double tol = 1e-8);

struct Triangularized {
    StateSpace sys;
    Eigen::Index n1 = 0, n2 = 0;
    Mat T;  // x_original = T x_new
};

// Similarity transform to a realization with A, B, C, D block-lower for the returned
// state split. If `n1_hint` is given and the realization is already lower for it, the
// input is returned unchanged.
Triangularized triangularize_realization(const StateSpace& sys, Eigen::Index row_split,
                                         Eigen::Index col_split,
                                         std::optional<Eigen::Index> n1_hint = std::nullopt);

// Exact-zero test of the upper blocks of a realization for a given state split.
bool realization_is_lower(const StateSpace& sys, Eigen::Index n1, Eigen::Index row_split,
                          Eigen::Index col_split, double tol = 0.0);

}  // namespace twoplayer
