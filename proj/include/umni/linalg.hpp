#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace umni {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Number of singular values above rel_tol * sigma_max.
int numerical_rank(const MatrixXd& a, double rel_tol);

/// Moore–Penrose pseudo-inverse; singular values below rel_tol * sigma_max are dropped.
MatrixXd pinv(const MatrixXd& a, double rel_tol = 1e-10);

/// Orthogonal projector onto the nullspace of the matrix whose rows are `rows`
/// (equivalently, the orthogonal complement of their span). `dim` is the ambient
/// dimension, used when `rows` is empty.
MatrixXd nullspace_projector(const MatrixXd& rows, Eigen::Index dim);

/// Sample covariance (divisor n-1) of the rows of x.
MatrixXd sample_covariance(const MatrixXd& x);

/// Cast an integer matrix for floating-point arithmetic.
inline MatrixXd to_real(const IntMatrix& m) { return m.cast<double>(); }

}  // namespace umni
