#include "umni/score.hpp"

#include <algorithm>
#include <cmath>

#include "umni/errors.hpp"

namespace umni {

MatrixXd AffineScoreFn::evaluate(const MatrixXd& points) const {
  if (points.cols() != coeff.cols()) throw ArgumentError("AffineScoreFn::evaluate: dimension mismatch");
  return (coeff * points.transpose()).colwise() + offset;
}

AffineScoreFn& AffineScoreFn::operator+=(const AffineScoreFn& other) {
  if (coeff.rows() != other.coeff.rows() || coeff.cols() != other.coeff.cols())
    throw ArgumentError("AffineScoreFn: dimension mismatch");
  coeff += other.coeff;
  offset += other.offset;
  return *this;
}

AffineScoreFn& AffineScoreFn::operator*=(double s) {
  coeff *= s;
  offset *= s;
  return *this;
}

AffineScoreFn gaussian_score(const VectorXd& mean, const MatrixXd& cov, double rel_tol) {
  if (cov.rows() != cov.cols() || cov.rows() != mean.size()) throw ArgumentError("gaussian_score: dimension mismatch");
  MatrixXd theta = pinv(cov, rel_tol);
  theta = 0.5 * (theta + theta.transpose());
  return {-theta, theta * mean};
}

AffineScoreFn estimate_gaussian_score(const MatrixXd& x, double rel_tol) {
  if (x.rows() < 2) throw ArgumentError("estimate_gaussian_score: need at least two samples");
  return gaussian_score(x.colwise().mean().transpose(), sample_covariance(x), rel_tol);
}

AffineScoreFn score_difference(const AffineScoreFn& interventional, const AffineScoreFn& observational) {
  if (interventional.coeff.rows() != observational.coeff.rows() ||
      interventional.coeff.cols() != observational.coeff.cols())
    throw ArgumentError("score_difference: dimension mismatch");
  return {interventional.coeff - observational.coeff, interventional.offset - observational.offset};
}

AffineScoreFn analytic_latent_score(const LinearGaussianSem& sem, const EnvironmentSpec& spec) {
  const MatrixXd theta = analytic_latent_precision(sem, spec);
  return {-theta, theta * analytic_latent_mean(sem, spec)};
}

AffineScoreFn analytic_observed_score(const LinearGaussianSem& sem, const EnvironmentSpec& spec,
                                      const ObservationModel& model) {
  const MatrixXd& g = model.transform();
  const MatrixXd cov = g * analytic_latent_covariance(sem, spec) * g.transpose();
  return gaussian_score(g * analytic_latent_mean(sem, spec), cov, kAnalyticPinvTol);
}

ScoreDifferenceStack::ScoreDifferenceStack(std::vector<AffineScoreFn> diffs) : diffs_(std::move(diffs)) {
  for (const auto& f : diffs_)
    if (f.dim() != diffs_.front().dim()) throw ArgumentError("ScoreDifferenceStack: mixed dimensions");
}

MatrixXd ScoreDifferenceStack::evaluate(const VectorXd& x) const {
  MatrixXd out(dim(), size());
  for (Eigen::Index m = 0; m < size(); ++m) out.col(m) = diffs_[m](x);
  return out;
}

AffineScoreFn ScoreDifferenceStack::combine(const IntVector& w) const {
  if (w.size() != size()) throw ArgumentError("ScoreDifferenceStack::combine: weight length mismatch");
  AffineScoreFn out{MatrixXd::Zero(dim(), dim()), VectorXd::Zero(dim())};
  for (Eigen::Index m = 0; m < size(); ++m) {
    if (w(m) == 0) continue;
    out.coeff += static_cast<double>(w(m)) * diffs_[m].coeff;
    out.offset += static_cast<double>(w(m)) * diffs_[m].offset;
  }
  return out;
}

BasisSelection select_basis(std::span<const AffineScoreFn> diffs, const MatrixXd& probes, int n, double rel_tol) {
  if (n < 1) throw ArgumentError("select_basis: n must be positive");
  if (probes.rows() == 0) throw ArgumentError("select_basis: no probe points");
  BasisSelection out;
  std::vector<AffineScoreFn> admitted;
  MatrixXd columns;
  int rank = 0;
  for (std::size_t c = 0; c < diffs.size() && rank < n; ++c) {
    const MatrixXd e = diffs[c].evaluate(probes);
    VectorXd v = Eigen::Map<const VectorXd>(e.data(), e.size());
    const double norm = v.norm();
    if (norm == 0.0) continue;
    v /= norm;
    MatrixXd trial(v.size(), columns.cols() + 1);
    if (columns.cols() > 0) trial.leftCols(columns.cols()) = columns;
    trial.rightCols(1) = v;
    const int r = numerical_rank(trial, rel_tol);
    if (r > rank) {
      rank = r;
      columns = std::move(trial);
      out.indices.push_back(static_cast<int>(c));
      admitted.push_back(diffs[c]);
    }
  }
  if (rank < n)
    throw IdentifiabilityInputError("select_basis: found " + std::to_string(rank) + " independent score differences, need " +
                                    std::to_string(n));
  out.stack = ScoreDifferenceStack(std::move(admitted));
  return out;
}

namespace {

// ∇_z log(p_i / q_i) for node i with observational row a, variance v and
// interventional row a2, variance v2, noise mean s2.
VectorXd log_ratio_gradient(int i, const VectorXd& a, double v, const VectorXd& a2, double v2, double s2,
                            const VectorXd& z) {
  const Eigen::Index n = z.size();
  VectorXd ei = VectorXd::Unit(n, i);
  const double r = z(i) - a.dot(z);
  const double r2 = z(i) - a2.dot(z) - s2;
  return -(r / v) * (ei - a) + (r2 / v2) * (ei - a2);
}

}  // namespace

MatrixXd lambda_oracle(const LinearGaussianSem& sem, const EnvironmentSpec& spec, const VectorXd& z) {
  const int n = sem.size();
  if (z.size() != n) throw ArgumentError("lambda_oracle: point dimension mismatch");
  MatrixXd out = MatrixXd::Zero(n, n);
  for (const auto& m : spec.mechanisms())
    out.col(m.node) = log_ratio_gradient(m.node, sem.weights().row(m.node).transpose(), sem.noise_vars()(m.node),
                                         m.weights, m.noise_var, m.shift, z);
  return out;
}

MatrixXd lambda_matrix(const LinearGaussianSem& sem, std::span<const EnvironmentSpec> specs, const VectorXd& z) {
  const int n = sem.size();
  if (z.size() != n) throw ArgumentError("lambda_matrix: point dimension mismatch");
  MatrixXd out = MatrixXd::Zero(n, n);
  std::vector<bool> done(n, false);
  for (const auto& spec : specs)
    for (const auto& m : spec.mechanisms()) {
      if (done[m.node]) continue;
      done[m.node] = true;
      out.col(m.node) = log_ratio_gradient(m.node, sem.weights().row(m.node).transpose(), sem.noise_vars()(m.node),
                                           m.weights, m.noise_var, m.shift, z);
    }
  return out;
}

bool verify_score_transform(const AffineScoreFn& x_score, const LinearGaussianSem& sem, const EnvironmentSpec& spec,
                            const ObservationModel& model, const MatrixXd& probe_z, double tol) {
  if (probe_z.cols() != sem.size() || x_score.dim() != model.observed_dim()) return false;
  const AffineScoreFn z_score = analytic_latent_score(sem, spec);
  for (Eigen::Index k = 0; k < probe_z.rows(); ++k) {
    const VectorXd z = probe_z.row(k).transpose();
    const VectorXd lhs = x_score(model.transform() * z);
    const VectorXd rhs = model.encoder().transpose() * z_score(z);
    if ((lhs - rhs).norm() > tol * std::max(1.0, rhs.norm())) return false;
  }
  return true;
}

bool verify_score_transform(const LinearGaussianSem& sem, const EnvironmentSpec& spec, const ObservationModel& model,
                            const MatrixXd& probe_z, double tol) {
  return verify_score_transform(analytic_observed_score(sem, spec, model), sem, spec, model, probe_z, tol);
}

}  // namespace umni
