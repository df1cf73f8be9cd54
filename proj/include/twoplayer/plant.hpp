#pragma once

#include <array>
#include <string>
#include <vector>

#include "twoplayer/linalg.hpp"
#include "twoplayer/state_space.hpp"

namespace twoplayer {

using Index = Eigen::Index;

struct Split {
    Index first = 0, second = 0;
    Index total() const { return first + second; }
    bool operator==(const Split&) const = default;
};

struct Partition {
    Split n;  // states
    Split m;  // control inputs
    Split k;  // measurements
    bool operator==(const Partition&) const = default;
};

// x' = A x + B1 w + B2 u,  z = C1 x + D12 u,  y = C2 x + D21 w.
// A, B2, C2 are block-lower-triangular for the partition.
struct TwoPlayerPlant {
    Mat A, B1, B2, C1, C2, D12, D21;
    Partition part;

    Index n() const { return A.rows(); }
    Index nw() const { return B1.cols(); }
    Index nz() const { return C1.rows(); }
    Index nu() const { return B2.cols(); }
    Index ny() const { return C2.rows(); }

    // Blocks of A, B2, C2 under the partition (i, j in {1, 2}).
    Mat Ablk(int i, int j) const;
    Mat B2blk(int i, int j) const;
    Mat C2blk(int i, int j) const;

    // Selectors [I 0]^T, [0 I]^T for states, inputs and measurements.
    Mat En(int i) const;
    Mat Em(int i) const;
    Mat Ek(int i) const;

    // Full generalized plant P = [P11 P12; P21 P22] with (w, u) -> (z, y).
    StateSpace generalized() const;
    // P22 = (A, B2, C2, 0).
    StateSpace p22() const;

    // Throws InputError on any shape, partition or structure violation.
    void validate() const;
};

struct CostCovariance {
    Mat Q, S, R;  // [Q S; S^T R] = [C1 D12]^T [C1 D12]
    Mat W, U, V;  // [W U^T; U V] = [B1; D21][B1; D21]^T
};

CostCovariance cost_cov_matrices(const TwoPlayerPlant& p);

struct AssumptionReport {
    std::array<bool, 6> pass{};            // A1..A6
    std::array<std::string, 6> detail;     // human-readable diagnostic per assumption
    bool minimal = true;                   // warning only
    std::string minimality_detail;
    bool all() const {
        for (bool b : pass)
            if (!b) return false;
        return true;
    }
};

AssumptionReport check_assumptions(const TwoPlayerPlant& p, const Tolerances& tol = {});

}  // namespace twoplayer
