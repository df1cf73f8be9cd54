#include <doctest.h>

#include <functional>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "twoplayer/plant.hpp"
#include "twoplayer/sysmodel.hpp"

using namespace twoplayer;
using Eigen::Index;

namespace {

Mat m1(double v) { return Mat::Constant(1, 1, v); }
StateSpace first_order(double a, double c = 1.0) { return StateSpace(m1(-a), m1(1), m1(c), m1(0)); }

double freq_gap(const StateSpace& G, const std::function<CMat(oracle::cd)>& ref) {
    double worst = 0;
    for (const oracle::cd s : oracle::sample_points()) {
        const CMat a = oracle::freq(G.A, G.B, G.C, G.D, s), b = ref(s);
        worst = std::max(worst, (a - b).norm() / (1 + b.norm()));
    }
    return worst;
}

}  // namespace

TEST_SUITE("sysmodel") {

TEST_CASE("conjugate transpose of 1/(s+1)") {
    const StateSpace g = conjugate_transpose(first_order(1));
    CHECK(g.A(0, 0) == 1.0);
    CHECK(g.B(0, 0) == 1.0);
    CHECK(g.C(0, 0) == -1.0);
    CHECK(g.D(0, 0) == 0.0);
    CHECK(freq_gap(g, [](oracle::cd s) {
              return CMat::Constant(1, 1, oracle::rational({1}, {-1, 1}, s));
          }) < 1e-14);
}

TEST_CASE("series, add and negate") {
    const StateSpace g = first_order(2, 3);
    CHECK(markov_distance(series(g, StateSpace::gain(m1(1))), g) < 1e-14);
    CHECK(markov_distance(add(g, negate(g)), StateSpace::zero(1, 1)) < 1e-14);
    // 1/(s+1) then 1/(s+2): product 1/((s+1)(s+2)).
    const StateSpace p = series(first_order(1), first_order(2));
    CHECK(freq_gap(p, [](oracle::cd s) {
              return CMat::Constant(1, 1, oracle::rational({1}, {1, 3, 2}, s));
          }) < 1e-14);
    CHECK_THROWS_AS(add(g, StateSpace::zero(2, 1)), DimensionError);
    CHECK_THROWS_AS(multiply(StateSpace::zero(1, 2), g), DimensionError);
}

TEST_CASE("markov parameters") {
    const std::vector<Mat> mk = markov_parameters(first_order(1), 4);
    REQUIRE(mk.size() == 4);
    CHECK(mk[0](0, 0) == 0.0);
    CHECK(mk[1](0, 0) == 1.0);
    CHECK(mk[2](0, 0) == -1.0);
    CHECK(mk[3](0, 0) == 1.0);
    const std::vector<Mat> st = markov_parameters(StateSpace::gain(m1(5)), 3);
    CHECK(st[0](0, 0) == 5.0);
    CHECK(st[1](0, 0) == 0.0);
    CHECK(st[2](0, 0) == 0.0);

    // Same transfer function, different realization.
    const Mat T = (Mat(2, 2) << 2, 1, 0, 1).finished();
    const StateSpace g(m1(-1), m1(1), m1(1), m1(0));
    const StateSpace h = block_diag(g, first_order(3));
    const StateSpace ht = similarity(h, T);
    const auto a = markov_parameters(h, 6), b = markov_parameters(ht, 6);
    for (size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() < 1e-12);
}

TEST_CASE("eval_at") {
    const CMat v = eval_at(first_order(1), cdouble(0, 1));
    CHECK(v(0, 0).real() == doctest::Approx(0.5));
    CHECK(v(0, 0).imag() == doctest::Approx(-0.5));
    CHECK(eval_at(first_order(1), 0.0)(0, 0).real() == doctest::Approx(1.0));
    CHECK_THROWS_AS(eval_at(first_order(1), -1.0), NumericalError);
}

TEST_CASE("lower LFT") {
    const StateSpace g = first_order(1);
    const StateSpace P(m1(-1), Mat::Ones(1, 2), Mat::Ones(2, 1), Mat::Zero(2, 2));
    CHECK(markov_distance(lft_lower(P, StateSpace::gain(m1(0))), g) < 1e-14);

    // P11 + P12 K (1 - P22 K)^{-1} P21 with every block 1/(s+1), K = -1.
    const StateSpace cl = lft_lower(P, StateSpace::gain(m1(-1)));
    CHECK(freq_gap(cl, [](oracle::cd s) {
              const oracle::cd h = 1.0 / (s + 1.0);
              return CMat::Constant(1, 1, h - h * h / (1.0 + h));
          }) < 1e-13);

    // P12 = 0: u drives only the second state, z reads only the first.
    Mat A = Mat::Zero(2, 2);
    A.diagonal() << -1, -2;
    const StateSpace Pz(A, Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Zero(2, 2));
    CHECK(markov_distance(lft_lower(Pz, first_order(0.5, 3.0)), subsystem(Pz, 0, 1, 0, 1)) < 1e-12);
    CHECK_THROWS_AS(lft_lower(StateSpace::gain(Mat::Ones(2, 2)), StateSpace::gain(m1(1))),
                    NumericalError);
}

TEST_CASE("upper LFT") {
    const StateSpace M(m1(-1), Mat::Ones(1, 2), Mat::Ones(2, 1), Mat::Zero(2, 2));
    CHECK(markov_distance(lft_upper(M, StateSpace::gain(m1(0))), first_order(1)) < 1e-14);
    // M21 = 0: inputs (a, b), outputs (c, d); state driven by a only feeds c.
    Mat A = Mat::Zero(2, 2);
    A.diagonal() << -1, -3;
    const StateSpace M2(A, Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Zero(2, 2));
    CHECK(markov_distance(lft_upper(M2, first_order(2)), subsystem(M2, 1, 1, 1, 1)) < 1e-12);

    // F_u(J^{-1}, F_l(J, Q)) = Q for an invertible-feedthrough J.
    std::mt19937_64 rng(17);
    std::normal_distribution<double> N;
    Mat Aj(3, 3), Bj(3, 2), Cj(2, 3);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) Aj(i, j) = 0.3 * N(rng);
        for (Index j = 0; j < 2; ++j) Bj(i, j) = N(rng), Cj(j, i) = N(rng);
        Aj(i, i) -= 2;
    }
    const Mat Dj = (Mat(2, 2) << 0, 1, 1, 0).finished();
    const StateSpace J(Aj, Bj, Cj, Dj);
    const StateSpace Q = first_order(1.5, 0.7);
    const StateSpace back = lft_upper(inverse(J), lft_lower(J, Q));
    CHECK(markov_distance(back, Q) < 1e-9);
}

TEST_CASE("block-lower transfer-function test") {
    CHECK_FALSE(is_block_lower_tf(StateSpace::gain((Mat(2, 2) << 1, 2, 3, 4).finished()), 1, 1));
    CHECK(is_block_lower_tf(block_diag(first_order(1), first_order(2)), 1, 1));
    // Upper block cancels only as a transfer function: hidden coupling.
    Mat A = Mat::Zero(2, 2);
    A.diagonal() << -1, -2;
    const Mat B = (Mat(2, 2) << 1, 1, 0, 1).finished();
    const Mat C = (Mat(2, 2) << 0, 0, 1, 1).finished();
    CHECK(is_block_lower_tf(StateSpace(A, B, C, Mat::Zero(2, 2)), 1, 1));
    CHECK_FALSE(is_block_lower_tf(StateSpace(A, B, (Mat(2, 2) << 1, 0, 1, 1).finished(),
                                             Mat::Zero(2, 2)),
                                  1, 1));
}

TEST_CASE("triangularize: already lower and permuted") {
    const fixtures::TwoPlayerPlant u = fixtures::plant_U();
    const StateSpace g = u.p22();
    const Triangularized same = triangularize_realization(g, 1, 1, Index(2));
    CHECK(same.n1 == 2);
    CHECK(same.n2 == 1);
    CHECK((same.T - Mat::Identity(3, 3)).norm() == 0.0);

    const Triangularized any = triangularize_realization(g, 1, 1);
    CHECK(((any.n1 == 2 && any.n2 == 1) || (any.n1 == 1 && any.n2 == 2)));
    CHECK(realization_is_lower(any.sys, any.n1, 1, 1));
    CHECK(markov_distance(any.sys, g) < 1e-9);

    // diag(1/(s+1), 1/(s+2)) with the two states swapped.
    Mat A = Mat::Zero(2, 2);
    A.diagonal() << -2, -1;
    const Mat P = (Mat(2, 2) << 0, 1, 1, 0).finished();
    const StateSpace s(A, P, P, Mat::Zero(2, 2));
    const Triangularized t = triangularize_realization(s, 1, 1);
    CHECK(t.n1 == 1);
    CHECK(t.n2 == 1);
    CHECK(realization_is_lower(t.sys, 1, 1, 1));
    CHECK(markov_distance(t.sys, s) < 1e-9);
    CHECK(std::abs(t.sys.A(0, 0) + 1.0) < 1e-12);
    CHECK(std::abs(t.sys.A(1, 1) + 2.0) < 1e-12);

    CHECK_THROWS_AS(triangularize_realization(StateSpace::gain(Mat::Ones(2, 2)), 1, 1), InputError);
}

TEST_CASE("triangularize: coupled random lower system") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> N;
    for (int t = 0; t < 6; ++t) {
        const Index n1 = 1 + t % 2, n2 = 1 + (t / 2) % 2, n = n1 + n2;
        Mat A(n, n), B(n, 2), C(2, n);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) A(i, j) = N(rng);
            for (Index j = 0; j < 2; ++j) B(i, j) = N(rng), C(j, i) = N(rng);
        }
        A.topRightCorner(n1, n2).setZero();
        B.topRightCorner(n1, 1).setZero();
        C.topRightCorner(1, n2).setZero();
        Mat T(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) T(i, j) = N(rng);
        T += 3 * Mat::Identity(n, n);
        const StateSpace hidden = similarity(StateSpace(A, B, C, Mat::Zero(2, 2)), T);
        const Triangularized r = triangularize_realization(hidden, 1, 1);
        CHECK(r.n1 + r.n2 == n);
        CHECK(r.n1 >= 1);
        CHECK(r.n2 >= 1);
        CHECK(realization_is_lower(r.sys, r.n1, 1, 1));
        const auto a = markov_parameters(hidden, int(2 * n)), b = markov_parameters(r.sys, int(2 * n));
        double worst = 0;
        for (size_t i = 0; i < a.size(); ++i)
            worst = std::max(worst, (a[i] - b[i]).norm() / (1 + a[i].norm()));
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("cost and covariance matrices") {
    const CostCovariance d = cost_cov_matrices(fixtures::plant_D());
    const Mat I = Mat::Identity(2, 2);
    CHECK((d.Q - I).norm() == 0.0);
    CHECK((d.R - I).norm() == 0.0);
    CHECK(d.S.norm() == 0.0);
    CHECK((d.W - I).norm() == 0.0);
    CHECK((d.V - I).norm() == 0.0);
    CHECK(d.U.norm() == 0.0);

    TwoPlayerPlant z = fixtures::plant_D();
    z.C1.setZero();
    const CostCovariance cz = cost_cov_matrices(z);
    CHECK(cz.Q.norm() == 0.0);
    CHECK(cz.S.norm() == 0.0);

    const TwoPlayerPlant r = fixtures::plant_R();
    const CostCovariance c = cost_cov_matrices(r);
    Mat big(r.n() + r.nu(), r.n() + r.nu());
    big << c.Q, c.S, c.S.transpose(), c.R;
    CHECK(min_eig_sym(big) >= -1e-12);
    Mat cov(r.n() + r.ny(), r.n() + r.ny());
    cov << c.W, c.U.transpose(), c.U, c.V;
    CHECK(min_eig_sym(cov) >= -1e-12);
    Mat stack(r.n() + r.ny(), r.nw());
    stack << r.B1, r.D21;
    CHECK((cov - stack * stack.transpose()).norm() <= 1e-12 * cov.norm());
}

TEST_CASE("kalman plant covariance") {
    // The scalar plant x' = -4x + 3w1 + u, y = x + w2 as player 1, paired with a
    // noiseless stable second player.
    Mat A = Mat::Zero(2, 2);
    A.diagonal() << -4, -1;
    const Mat G = (Mat(2, 2) << 3, 0, 0, 0).finished();
    const Mat I = Mat::Identity(2, 2);
    const CostCovariance c =
        cost_cov_matrices(fixtures::with_standard_channels(A, I, I, G, I, {1, 1}, {1, 1}, {1, 1}));
    CHECK(c.W(0, 0) == 9.0);
    CHECK(c.V(0, 0) == 1.0);
    CHECK(c.U(0, 0) == 0.0);
}

TEST_CASE("assumption checks") {
    const AssumptionReport d = check_assumptions(fixtures::plant_D());
    CHECK(d.all());

    TwoPlayerPlant a2 = fixtures::plant_D();
    a2.A(0, 0) = 1;
    a2.B2(0, 0) = 0;
    const AssumptionReport r2 = check_assumptions(a2);
    CHECK_FALSE(r2.pass[1]);
    CHECK(r2.pass[0]);

    TwoPlayerPlant a4 = fixtures::plant_D();
    a4.D21.setZero();
    const AssumptionReport r4 = check_assumptions(a4);
    CHECK_FALSE(r4.pass[3]);

    TwoPlayerPlant a1 = fixtures::plant_D();
    a1.D12.setZero();
    CHECK_FALSE(check_assumptions(a1).pass[0]);
}

TEST_CASE("plant validation") {
    TwoPlayerPlant p = fixtures::plant_D();
    CHECK_NOTHROW(p.validate());
    p.A(0, 1) = 1;
    CHECK_THROWS_AS(p.validate(), InputError);
    p = fixtures::plant_D();
    p.part.n = {2, 0};
    CHECK_THROWS_AS(p.validate(), InputError);
}

}  // TEST_SUITE
