#include "edskit/linalg.hpp"

namespace edskit {

Mat to_rational(const Eigen::MatrixXd& A, unsigned bits)
{
    Mat out(A.rows(), A.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) out(i, j) = round_dyadic(A(i, j), bits);
    return out;
}

Eigen::MatrixXd to_double(const Mat& A)
{
    Eigen::MatrixXd out(A.rows(), A.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) out(i, j) = A(i, j).to_double();
    return out;
}

Mat rational_identity(Eigen::Index n)
{
    Mat out = rational_zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) out(i, i) = Rational(1);
    return out;
}

Mat rational_zero(Eigen::Index rows, Eigen::Index cols)
{
    Mat out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = Rational(0);
    return out;
}

} // namespace edskit
