#pragma once

#include <utility>

#include "twoplayer/errors.hpp"
#include "twoplayer/state_space.hpp"

namespace twoplayer {

struct Tolerances {
    double residual = 1e-8;  // relative residual for Lyapunov/Sylvester/Riccati
    double hurwitz = 1e-9;   // eigenvalues must satisfy Re < -hurwitz
    double axis = 1e-7;      // invariant zeros closer than this to iR fail the axis test
    double rank = 1e-9;      // relative rank threshold for staircase/SVD decisions
};

// ---- spectra -------------------------------------------------------------

Eigen::VectorXcd eigenvalues(const Mat& A);
double spectral_abscissa(const Mat& A);
bool is_hurwitz(const Mat& A, double margin = 1e-9);

// Complex Schur form A = Q T Q^H with the eigenvalues satisfying Re < -margin
// moved to the leading block. Throws AxisEigenvalueError if some eigenvalue
// has |Re| <= margin.
struct OrderedSchur {
    CMat Q, T;
    Eigen::Index stable = 0;
};
OrderedSchur ordered_schur(const Mat& A, double margin);

// Real orthonormal basis of the invariant subspace associated with the
// eigenvalues Re < -margin (and of the complementary Re > margin subspace).
Mat stable_subspace(const Mat& A, double margin);

// ---- subspaces -----------------------------------------------------------

Eigen::Index numerical_rank(const Mat& M, double rel_tol = 1e-9);
Mat orth(const Mat& M, double abs_tol);
Mat orth_complement(const Mat& V, Eigen::Index n);

// Orthonormal basis of the controllable subspace of (A, B) (block Arnoldi staircase).
Mat controllable_subspace(const Mat& A, const Mat& B, double rel_tol = 1e-9);
Mat observable_subspace(const Mat& C, const Mat& A, double rel_tol = 1e-9);

// ---- linear matrix equations ---------------------------------------------

// A1 X + X A2 + A0 = 0 (complex Schur / Bartels-Stewart).
Mat solve_sylvester(const Mat& A1, const Mat& A2, const Mat& A0);
// A P + P A^T + Q = 0.
Mat solve_lyapunov(const Mat& A, const Mat& Q);

double sylvester_residual(const Mat& A1, const Mat& A2, const Mat& A0, const Mat& X);

// ---- Riccati -------------------------------------------------------------

struct AreSolution {
    Mat X;  // stabilizing solution
    Mat K;  // -(D^T D)^{-1} (B^T X + D^T C)
    double residual = 0;
};

// Stabilizing solution of
//   A^T X + X A + C^T C - (X B + C^T D)(D^T D)^{-1}(B^T X + D^T C) = 0.
AreSolution solve_are(const Mat& A, const Mat& B, const Mat& C, const Mat& D,
                      const Tolerances& tol = {});

double are_residual(const Mat& A, const Mat& B, const Mat& C, const Mat& D, const Mat& X);

// ---- rank tests ----------------------------------------------------------

bool pbh_stabilizable(const Mat& A, const Mat& B, double margin = 0.0);
bool pbh_detectable(const Mat& C, const Mat& A, double margin = 0.0);

enum class RankSide { column, row };

// [A - iwI, B; C, D] has full column (row) rank for every real w.
bool axis_rank_ok(const Mat& A, const Mat& B, const Mat& C, const Mat& D, RankSide side,
                  double axis_tol = 1e-7);

// ---- Gramians and norms --------------------------------------------------

enum class GramianSide { controllability, observability };

Mat gramian(const StateSpace& sys, GramianSide side);
// Upper-triangular U with A P + P A^T + B B^T = 0, P = Q U U^* Q^*, Q the Schur basis of A.
CMat lyapunov_factor(const Mat& A, const Mat& B, CMat* schur_basis = nullptr);
double h2_norm(const StateSpace& sys);
// Squared norm via the observability Gramian (independent route).
double h2_norm_squared_obs(const StateSpace& sys);

struct StableAntistable {
    StateSpace stable;      // strictly proper, Hurwitz A
    StateSpace antistable;  // strictly proper, -A Hurwitz
    Mat feedthrough;
};

StableAntistable stable_antistable_decompose(const StateSpace& sys, double margin = 1e-9);

// Remove uncontrollable and unobservable modes.
StateSpace minreal(const StateSpace& sys, double rel_tol = 1e-9);

// ---- misc ----------------------------------------------------------------

Mat kron(const Mat& A, const Mat& B);
Mat vec(const Mat& M);
Mat unvec(const Mat& v, Eigen::Index rows, Eigen::Index cols);
Mat symmetrize(const Mat& M);
double min_eig_sym(const Mat& M);

}  // namespace twoplayer
