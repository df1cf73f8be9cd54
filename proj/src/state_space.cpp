#include "twoplayer/state_space.hpp"

#include <sstream>

#include "twoplayer/errors.hpp"

namespace twoplayer {

StateSpace::StateSpace(Mat a, Mat b, Mat c, Mat d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
    validate();
}

StateSpace StateSpace::gain(const Mat& d) {
    return StateSpace(Mat(0, 0), Mat(0, d.cols()), Mat(d.rows(), 0), d);
}

StateSpace StateSpace::zero(Eigen::Index outputs, Eigen::Index inputs) {
    return gain(Mat::Zero(outputs, inputs));
}

void StateSpace::validate() const {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != C.rows() ||
        D.cols() != B.cols()) {
        std::ostringstream os;
        os << "inconsistent state-space dimensions: A " << A.rows() << "x" << A.cols() << ", B "
           << B.rows() << "x" << B.cols() << ", C " << C.rows() << "x" << C.cols() << ", D "
           << D.rows() << "x" << D.cols();
        throw DimensionError(os.str());
    }
    auto finite = [](const Mat& M) { return M.size() == 0 || M.allFinite(); };
    if (!finite(A) || !finite(B) || !finite(C) || !finite(D))
        throw DimensionError("state-space realization has non-finite entries");
}

}  // namespace twoplayer
