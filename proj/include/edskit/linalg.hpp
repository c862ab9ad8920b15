#pragma once

#include "edskit/rational.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace edskit {

template <typename Scalar>
struct ZeroTest {
    static bool is_zero(const Scalar& x, double tol) { return std::abs(x) <= tol; }
    static double magnitude(const Scalar& x) { return std::abs(x); }
};

template <>
struct ZeroTest<Rational> {
    static bool is_zero(const Rational& x, double) { return x.is_zero(); }
    static double magnitude(const Rational& x) { return std::abs(x.to_double()); }
};

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Echelon {
    MatrixX<Scalar> R;
    std::vector<Eigen::Index> pivots;
};

// Reduced row echelon form. Exact for Rational (first nonzero pivot);
// partial pivoting with an absolute tolerance for floating point.
template <typename Derived>
Echelon<typename Derived::Scalar> rref(const Eigen::MatrixBase<Derived>& A, double tol = 1e-12)
{
    using Scalar = typename Derived::Scalar;
    using Z = ZeroTest<Scalar>;
    Echelon<Scalar> out;
    out.R = A;
    MatrixX<Scalar>& R = out.R;
    const Eigen::Index m = R.rows(), n = R.cols();
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < n && row < m; ++col) {
        Eigen::Index piv = -1;
        double best = 0;
        for (Eigen::Index i = row; i < m; ++i) {
            if (Z::is_zero(R(i, col), tol)) continue;
            double mag = Z::magnitude(R(i, col));
            if (piv < 0 || (!std::is_same_v<Scalar, Rational> && mag > best)) {
                piv = i;
                best = mag;
                if (std::is_same_v<Scalar, Rational>) break;
            }
        }
        if (piv < 0) continue;
        if (piv != row) R.row(piv).swap(R.row(row));
        Scalar inv = Scalar(1) / R(row, col);
        for (Eigen::Index j = col; j < n; ++j) R(row, j) = R(row, j) * inv;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (i == row || Z::is_zero(R(i, col), tol)) continue;
            Scalar f = R(i, col);
            for (Eigen::Index j = col; j < n; ++j) R(i, j) = R(i, j) - f * R(row, j);
        }
        out.pivots.push_back(col);
        ++row;
    }
    return out;
}

template <typename Derived>
Eigen::Index rank(const Eigen::MatrixBase<Derived>& A, double tol = 1e-12)
{
    if (A.rows() == 0 || A.cols() == 0) return 0;
    return static_cast<Eigen::Index>(rref(A, tol).pivots.size());
}

// Columns form a basis of {x : A x = 0}.
template <typename Derived>
MatrixX<typename Derived::Scalar> nullspace(const Eigen::MatrixBase<Derived>& A, double tol = 1e-12)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = A.cols();
    if (A.rows() == 0) return MatrixX<Scalar>::Identity(n, n);
    Echelon<Scalar> e = rref(A, tol);
    std::vector<bool> is_pivot(n, false);
    for (auto p : e.pivots) is_pivot[p] = true;
    MatrixX<Scalar> N(n, n - static_cast<Eigen::Index>(e.pivots.size()));
    for (Eigen::Index i = 0; i < N.rows(); ++i)
        for (Eigen::Index j = 0; j < N.cols(); ++j) N(i, j) = Scalar(0);
    Eigen::Index k = 0;
    for (Eigen::Index free = 0; free < n; ++free) {
        if (is_pivot[free]) continue;
        N(free, k) = Scalar(1);
        for (size_t r = 0; r < e.pivots.size(); ++r) N(e.pivots[r], k) = -e.R(static_cast<Eigen::Index>(r), free);
        ++k;
    }
    return N;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> inverse(const Eigen::MatrixBase<Derived>& A, double tol = 1e-12)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("inverse of a non-square matrix");
    MatrixX<Scalar> aug(n, 2 * n);
    aug.leftCols(n) = A;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) aug(i, n + j) = Scalar(i == j ? 1 : 0);
    Echelon<Scalar> e = rref(aug, tol);
    if (static_cast<Eigen::Index>(e.pivots.size()) < n || (n > 0 && e.pivots[n - 1] != n - 1))
        throw std::domain_error("singular matrix");
    return e.R.rightCols(n);
}

// Solves A x = b; throws std::domain_error when no or no unique solution exists.
template <typename DA, typename DB>
VectorX<typename DA::Scalar> solve_unique(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& b, double tol = 1e-12)
{
    using Scalar = typename DA::Scalar;
    const Eigen::Index m = A.rows(), n = A.cols();
    MatrixX<Scalar> aug(m, n + 1);
    aug.leftCols(n) = A;
    aug.col(n) = b;
    Echelon<Scalar> e = rref(aug, tol);
    if (!e.pivots.empty() && e.pivots.back() == n) throw std::domain_error("inconsistent linear system");
    if (static_cast<Eigen::Index>(e.pivots.size()) != n) throw std::domain_error("underdetermined linear system");
    VectorX<Scalar> x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = e.R(i, n);
    return x;
}

// Rows of A selected greedily, in order, whenever they raise the rank.
template <typename Derived>
std::vector<Eigen::Index> independent_rows(const Eigen::MatrixBase<Derived>& A, double tol = 1e-12)
{
    using Scalar = typename Derived::Scalar;
    std::vector<Eigen::Index> chosen;
    MatrixX<Scalar> acc(0, A.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        MatrixX<Scalar> trial(acc.rows() + 1, A.cols());
        trial.topRows(acc.rows()) = acc;
        trial.row(acc.rows()) = A.row(i);
        if (rank(trial, tol) > acc.rows()) {
            acc = trial;
            chosen.push_back(i);
        }
    }
    return chosen;
}

// Column-space equality test.
template <typename DA, typename DB>
bool same_column_span(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B, double tol = 1e-12)
{
    using Scalar = typename DA::Scalar;
    if (A.rows() != B.rows()) return false;
    MatrixX<Scalar> both(A.rows(), A.cols() + B.cols());
    both.leftCols(A.cols()) = A;
    both.rightCols(B.cols()) = B;
    Eigen::Index r = rank(both, tol);
    return r == rank(A, tol) && r == rank(B, tol);
}

Mat to_rational(const Eigen::MatrixXd& A, unsigned bits);
Eigen::MatrixXd to_double(const Mat& A);
Mat rational_identity(Eigen::Index n);
Mat rational_zero(Eigen::Index rows, Eigen::Index cols);

} // namespace edskit
