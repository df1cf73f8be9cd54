#include "twoplayer/plant.hpp"

#include <sstream>

#include <Eigen/Eigenvalues>

#include "twoplayer/errors.hpp"

namespace twoplayer {

namespace {

Index offset(const Split& s, int i) { return i == 1 ? 0 : s.first; }
Index size(const Split& s, int i) { return i == 1 ? s.first : s.second; }

Mat selector(const Split& s, int i) {
    Mat E = Mat::Zero(s.total(), size(s, i));
    E.block(offset(s, i), 0, size(s, i), size(s, i)).setIdentity();
    return E;
}

std::string shape(const Mat& M) {
    std::ostringstream os;
    os << M.rows() << "x" << M.cols();
    return os.str();
}

bool positive_definite(const Mat& M, double rel) {
    if (M.rows() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(M), Eigen::EigenvaluesOnly);
    const double hi = es.eigenvalues().maxCoeff();
    return es.eigenvalues().minCoeff() > rel * std::max(1.0, hi);
}

}  // namespace

Mat TwoPlayerPlant::Ablk(int i, int j) const {
    return A.block(offset(part.n, i), offset(part.n, j), size(part.n, i), size(part.n, j));
}
Mat TwoPlayerPlant::B2blk(int i, int j) const {
    return B2.block(offset(part.n, i), offset(part.m, j), size(part.n, i), size(part.m, j));
}
Mat TwoPlayerPlant::C2blk(int i, int j) const {
    return C2.block(offset(part.k, i), offset(part.n, j), size(part.k, i), size(part.n, j));
}
Mat TwoPlayerPlant::En(int i) const { return selector(part.n, i); }
Mat TwoPlayerPlant::Em(int i) const { return selector(part.m, i); }
Mat TwoPlayerPlant::Ek(int i) const { return selector(part.k, i); }

StateSpace TwoPlayerPlant::generalized() const {
    Mat B(n(), nw() + nu());
    B << B1, B2;
    Mat C(nz() + ny(), n());
    C << C1, C2;
    Mat D = Mat::Zero(nz() + ny(), nw() + nu());
    D.topRightCorner(nz(), nu()) = D12;
    D.bottomLeftCorner(ny(), nw()) = D21;
    return StateSpace(A, B, C, D);
}

StateSpace TwoPlayerPlant::p22() const {
    return StateSpace(A, B2, C2, Mat::Zero(ny(), nu()));
}

void TwoPlayerPlant::validate() const {
    auto fail = [](const std::string& msg) { throw InputError(msg); };
    const Split* splits[] = {&part.n, &part.m, &part.k};
    const char* names[] = {"n", "m", "k"};
    for (int i = 0; i < 3; ++i) {
        if (splits[i]->first < 1 || splits[i]->second < 1)
            fail(std::string("partition '") + names[i] + "' must have two positive entries");
    }
    const Index nn = part.n.total(), mm = part.m.total(), kk = part.k.total();
    auto expect = [&](const Mat& M, const char* name, Index r, Index c) {
        if (M.rows() != r || M.cols() != c) {
            std::ostringstream os;
            os << "matrix '" << name << "' has shape " << shape(M) << ", expected " << r << "x" << c;
            fail(os.str());
        }
        if (M.size() > 0 && !M.allFinite()) fail(std::string("matrix '") + name + "' has non-finite entries");
    };
    expect(A, "A", nn, nn);
    expect(B2, "B2", nn, mm);
    expect(C2, "C2", kk, nn);
    if (B1.rows() != nn) fail("matrix 'B1' must have " + std::to_string(nn) + " rows");
    if (C1.cols() != nn) fail("matrix 'C1' must have " + std::to_string(nn) + " columns");
    expect(B1, "B1", nn, B1.cols());
    expect(C1, "C1", C1.rows(), nn);
    expect(D12, "D12", C1.rows(), mm);
    expect(D21, "D21", kk, B1.cols());
    auto upper_zero = [&](const Mat& M, const char* name, Index r1, Index c1) {
        const Mat U = M.topRightCorner(r1, M.cols() - c1);
        if (U.size() > 0 && U.cwiseAbs().maxCoeff() != 0.0)
            fail(std::string("matrix '") + name + "' is not block-lower-triangular for the partition");
    };
    upper_zero(A, "A", part.n.first, part.n.first);
    upper_zero(B2, "B2", part.n.first, part.m.first);
    upper_zero(C2, "C2", part.k.first, part.n.first);
}

CostCovariance cost_cov_matrices(const TwoPlayerPlant& p) {
    CostCovariance cc;
    cc.Q = p.C1.transpose() * p.C1;
    cc.S = p.C1.transpose() * p.D12;
    cc.R = p.D12.transpose() * p.D12;
    cc.W = p.B1 * p.B1.transpose();
    cc.U = p.D21 * p.B1.transpose();
    cc.V = p.D21 * p.D21.transpose();
    return cc;
}

AssumptionReport check_assumptions(const TwoPlayerPlant& p, const Tolerances& tol) {
    p.validate();
    AssumptionReport r;
    const CostCovariance cc = cost_cov_matrices(p);

    r.pass[0] = positive_definite(cc.R, tol.rank);
    r.detail[0] = r.pass[0] ? "D12^T D12 > 0" : "D12^T D12 is singular";

    const bool s1 = pbh_stabilizable(p.Ablk(1, 1), p.B2blk(1, 1));
    const bool s2 = pbh_stabilizable(p.Ablk(2, 2), p.B2blk(2, 2));
    r.pass[1] = s1 && s2;
    r.detail[1] = r.pass[1] ? "(A11, B11) and (A22, B22) stabilizable"
                            : std::string(!s1 ? "(A11, B11) not stabilizable" : "") +
                                  (!s1 && !s2 ? "; " : "") +
                                  (!s2 ? "(A22, B22) not stabilizable" : "");

    r.pass[2] = axis_rank_ok(p.A, p.B2, p.C1, p.D12, RankSide::column, tol.axis);
    r.detail[2] = r.pass[2] ? "[A - jwI, B2; C1, D12] full column rank on the axis"
                            : "[A - jwI, B2; C1, D12] loses column rank on the imaginary axis";

    r.pass[3] = positive_definite(cc.V, tol.rank);
    r.detail[3] = r.pass[3] ? "D21 D21^T > 0" : "D21 D21^T is singular";

    const bool d1 = pbh_detectable(p.C2blk(1, 1), p.Ablk(1, 1));
    const bool d2 = pbh_detectable(p.C2blk(2, 2), p.Ablk(2, 2));
    r.pass[4] = d1 && d2;
    r.detail[4] = r.pass[4] ? "(C11, A11) and (C22, A22) detectable"
                            : std::string(!d1 ? "(C11, A11) not detectable" : "") +
                                  (!d1 && !d2 ? "; " : "") +
                                  (!d2 ? "(C22, A22) not detectable" : "");

    r.pass[5] = axis_rank_ok(p.A, p.B1, p.C2, p.D21, RankSide::row, tol.axis);
    r.detail[5] = r.pass[5] ? "[A - jwI, B1; C2, D21] full row rank on the axis"
                            : "[A - jwI, B1; C2, D21] loses row rank on the imaginary axis";

    Mat B(p.n(), p.nw() + p.nu());
    B << p.B1, p.B2;
    Mat C(p.nz() + p.ny(), p.n());
    C << p.C1, p.C2;
    const bool ctrb = controllable_subspace(p.A, B, tol.rank).cols() == p.n();
    const bool obsv = observable_subspace(C, p.A, tol.rank).cols() == p.n();
    r.minimal = ctrb && obsv;
    r.minimality_detail = r.minimal ? "realization is minimal"
                                    : std::string("realization is not minimal (") +
                                          (!ctrb ? "uncontrollable" : "") +
                                          (!ctrb && !obsv ? ", " : "") +
                                          (!obsv ? "unobservable" : "") + ")";
    return r;
}

}  // namespace twoplayer
