#pragma once

#include <Eigen/Dense>

namespace twoplayer {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using cdouble = std::complex<double>;

// Continuous-time LTI system D + C (sI - A)^{-1} B.
struct StateSpace {
    Mat A, B, C, D;

    StateSpace() = default;
    StateSpace(Mat a, Mat b, Mat c, Mat d);

    // Static gain with no states.
    static StateSpace gain(const Mat& d);
    static StateSpace zero(Eigen::Index outputs, Eigen::Index inputs);

    Eigen::Index states() const { return A.rows(); }
    Eigen::Index inputs() const { return D.cols(); }
    Eigen::Index outputs() const { return D.rows(); }

    // Throws DimensionError on inconsistent shapes or non-finite entries.
    void validate() const;
};

}  // namespace twoplayer
