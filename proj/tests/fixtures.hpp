#pragma once

// Shared test plants.

#include <cstdint>
#include <random>
#include <vector>

#include "twoplayer/plant.hpp"
#include "twoplayer/stabilization.hpp"
#include "twoplayer/synthesis.hpp"

namespace fixtures {

using twoplayer::Index;
using twoplayer::Mat;
using twoplayer::Split;
using twoplayer::TwoPlayerPlant;

// Standard noise/cost channels: B1 = [G 0], D21 = [0 I], C1 = [H; 0], D12 = [0; I].
inline TwoPlayerPlant with_standard_channels(const Mat& A, const Mat& B2, const Mat& C2,
                                             const Mat& G, const Mat& H, Split n, Split m,
                                             Split k) {
    const Index nn = A.rows(), mm = B2.cols(), kk = C2.rows();
    TwoPlayerPlant p;
    p.A = A;
    p.B2 = B2;
    p.C2 = C2;
    p.B1 = Mat::Zero(nn, G.cols() + kk);
    p.B1.leftCols(G.cols()) = G;
    p.D21 = Mat::Zero(kk, G.cols() + kk);
    p.D21.rightCols(kk).setIdentity();
    p.C1 = Mat::Zero(H.rows() + mm, nn);
    p.C1.topRows(H.rows()) = H;
    p.D12 = Mat::Zero(H.rows() + mm, mm);
    p.D12.bottomRows(mm).setIdentity();
    p.part = {n, m, k};
    return p;
}

// Fully decoupled: A = diag(-1, -2), B2 = C2 = I.
inline TwoPlayerPlant plant_D() {
    Mat A(2, 2);
    A << -1, 0, 0, -2;
    const Mat I = Mat::Identity(2, 2);
    return with_standard_channels(A, I, I, I, I, {1, 1}, {1, 1}, {1, 1});
}

// P22 = [1/(s+1) 0; 1/(s-1) 1/(s+1)], 3-state realization; state split (2, 1).
inline TwoPlayerPlant plant_U() {
    Mat A = Mat::Zero(3, 3);
    A.diagonal() << -1, 1, -1;
    Mat B2(3, 2);
    B2 << 1, 0, 1, 0, 0, 1;
    Mat C2(2, 3);
    C2 << 1, 0, 0, 0, 1, 1;
    const Mat I = Mat::Identity(3, 3);
    return with_standard_channels(A, B2, C2, I, I, {2, 1}, {1, 1}, {1, 1});
}

// P22 = [1/(s-1) 0; 1/(s-1) 1/(s+1)].
inline TwoPlayerPlant plant_S() {
    Mat A(2, 2);
    A << 1, 0, 0, -1;
    Mat C2(2, 2);
    C2 << 1, 0, 1, 1;
    const Mat I = Mat::Identity(2, 2);
    return with_standard_channels(A, I, C2, I, I, {1, 1}, {1, 1}, {1, 1});
}

inline Mat plant_S_K0() {
    Mat K(2, 2);
    K << -2, 0, 0, 0;
    return K;
}

// Seeded random plant with m = k = (1, 1); redrawn until A1-A6 and structured
// stabilizability hold and the A + B2 K, A + L C2 spectra stay clear of the axis.
inline TwoPlayerPlant random_plant(std::uint64_t seed, Split n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    const Index nn = n.total();
    auto draw = [&](Index r, Index c) {
        Mat M(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j) M(i, j) = N(rng);
        return M;
    };
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Mat A = draw(nn, nn);
        A.topRightCorner(n.first, n.second).setZero();
        Mat B2 = draw(nn, 2);
        B2.topRightCorner(n.first, 1).setZero();
        Mat C2 = draw(2, nn);
        C2.topRightCorner(1, n.second).setZero();
        const Mat G = draw(nn, nn), H = draw(nn, nn);
        TwoPlayerPlant p = with_standard_channels(A, B2, C2, G, H, n, {1, 1}, {1, 1});
        try {
            if (!twoplayer::check_assumptions(p).all()) continue;
            if (!twoplayer::exists_triangular_stabilizing(p).ok()) continue;
            (void)twoplayer::optimal_controller(p);
            return p;
        } catch (const std::exception&) {
            continue;
        }
    }
    throw std::runtime_error("random_plant: no admissible draw");
}

// Reference random plant; the seed is chosen for a fast closed-loop time constant.
constexpr std::uint64_t kFixtureRSeed = 20140515;
inline TwoPlayerPlant plant_R() { return random_plant(kFixtureRSeed, {2, 1}); }

// 32 plants cycling through n in {(1,1), (2,1), (1,2), (2,2)}.
inline std::vector<TwoPlayerPlant> ensemble(std::uint64_t base_seed = 1000) {
    const Split shapes[] = {{1, 1}, {2, 1}, {1, 2}, {2, 2}};
    std::vector<TwoPlayerPlant> out;
    for (int i = 0; i < 32; ++i) out.push_back(random_plant(base_seed + i, shapes[i % 4]));
    return out;
}

// Dynamically decoupled: A, B2, C2 and the process noise block diagonal, so W, V, U are too.
inline TwoPlayerPlant plant_decoupled(std::uint64_t seed, Split n) {
    for (std::uint64_t s = seed;; s += 7919) {
        TwoPlayerPlant p = random_plant(s, n);
        p.A.bottomLeftCorner(n.second, n.first).setZero();
        p.B2.bottomLeftCorner(n.second, 1).setZero();
        p.C2.bottomLeftCorner(1, n.first).setZero();
        p.B1.block(0, n.first, n.first, n.second).setZero();
        p.B1.block(n.first, 0, n.second, n.first).setZero();
        try {
            if (!twoplayer::check_assumptions(p).all()) continue;
            if (!twoplayer::exists_triangular_stabilizing(p).ok()) continue;
            (void)twoplayer::optimal_controller(p);
            return p;
        } catch (const std::exception&) {
        }
    }
}

// Player 2's measurement carries no state information (C21 = C22 = 0, A22 stable), so
// player 1 already sees everything useful and the structured optimum is centralized.
inline TwoPlayerPlant plant_degenerate() {
    Mat A(2, 2);
    A << 0.5, 0, 1, -1;
    Mat B2(2, 2);
    B2 << 1, 0, 0.5, 1;
    Mat C2(2, 2);
    C2 << 1, 0, 0, 0;
    Mat G(2, 2);
    G << 1, 0, 0.3, 1;
    const Mat I = Mat::Identity(2, 2);
    return with_standard_channels(A, B2, C2, G, I, {1, 1}, {1, 1}, {1, 1});
}

}  // namespace fixtures
