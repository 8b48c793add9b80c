#include "umni/linalg.hpp"

#include "umni/errors.hpp"

namespace umni {

int numerical_rank(const MatrixXd& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

MatrixXd pinv(const MatrixXd& a, double rel_tol) {
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  VectorXd inv = VectorXd::Zero(s.size());
  if (s.size() > 0 && s(0) > 0.0)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > rel_tol * s(0)) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

MatrixXd nullspace_projector(const MatrixXd& rows, Eigen::Index dim) {
  MatrixXd p = MatrixXd::Identity(dim, dim);
  if (rows.rows() == 0) return p;
  if (rows.cols() != dim) throw ArgumentError("nullspace_projector: dimension mismatch");
  Eigen::JacobiSVD<MatrixXd> svd(rows, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return p;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= 1e-12 * s(0)) break;
    const VectorXd v = svd.matrixV().col(i);
    p -= v * v.transpose();
  }
  return p;
}

MatrixXd sample_covariance(const MatrixXd& x) {
  if (x.rows() < 2) throw ArgumentError("sample_covariance: need at least two samples");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const MatrixXd centered = x.rowwise() - mean;
  return (centered.adjoint() * centered) / static_cast<double>(x.rows() - 1);
}

}  // namespace umni
