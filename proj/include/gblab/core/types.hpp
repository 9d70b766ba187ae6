#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace gblab {

using cplx = std::complex<double>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Rank-3 array stored as one matrix per leading index: arr[k](i, j).
using Tensor3 = std::vector<Mat>;
/// Rank-4 array: arr[k][l](i, j).
using Tensor4 = std::vector<std::vector<Mat>>;

inline constexpr double pi = 3.14159265358979323846;

/// Unit vector along coordinate axis j in dimension n.
inline Vec unit_vector(int n, int j) {
    Vec e = Vec::Zero(n);
    e(j) = 1.0;
    return e;
}

inline double min_eigenvalue_sym(const Mat& m) {
    if (m.rows() == 1) return m(0, 0);
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue_sym(const Mat& m) {
    if (m.rows() == 1) return m(0, 0);
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

} // namespace gblab
