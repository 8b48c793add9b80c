#include "umni/theory.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <string>

#include "umni/errors.hpp"
#include "umni/score.hpp"

namespace umni {

namespace {

std::int64_t laplace(const IntMatrix& m) {
  const Eigen::Index n = m.rows();
  if (n == 0) return 1;
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  std::int64_t total = 0;
  IntMatrix minor(n - 1, n - 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (m(0, j) == 0) continue;
    for (Eigen::Index r = 1; r < n; ++r)
      for (Eigen::Index c = 0, k = 0; c < n; ++c)
        if (c != j) minor(r - 1, k++) = m(r, c);
    const std::int64_t term = m(0, j) * laplace(minor);
    total += (j % 2 == 0) ? term : -term;
  }
  return total;
}

IntMatrix drop(const IntMatrix& m, Eigen::Index row, Eigen::Index col) {
  const Eigen::Index n = m.rows();
  IntMatrix out(n - 1, n - 1);
  for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
    if (r == row) continue;
    for (Eigen::Index c = 0, cc = 0; c < n; ++c)
      if (c != col) out(rr, cc++) = m(r, c);
    ++rr;
  }
  return out;
}

// Bareiss on a fixed small buffer; used by the enumeration.
std::int64_t small_det(std::array<std::int64_t, 64>& a, int m) {
  std::int64_t sign = 1, prev = 1;
  for (int k = 0; k < m - 1; ++k) {
    if (a[k * m + k] == 0) {
      int p = k + 1;
      while (p < m && a[p * m + k] == 0) ++p;
      if (p == m) return 0;
      for (int c = 0; c < m; ++c) std::swap(a[k * m + c], a[p * m + c]);
      sign = -sign;
    }
    for (int i = k + 1; i < m; ++i)
      for (int j = k + 1; j < m; ++j)
        a[i * m + j] = (a[i * m + j] * a[k * m + k] - a[i * m + k] * a[k * m + j]) / prev;
    prev = a[k * m + k];
  }
  return sign * a[(m - 1) * m + (m - 1)];
}

std::int64_t det_of_bits(std::uint64_t bits, int m) {
  std::array<std::int64_t, 64> a{};
  for (int k = 0; k < m * m; ++k) a[k] = static_cast<std::int64_t>((bits >> k) & 1U);
  return std::abs(small_det(a, m));
}

void check_binary_order(int m) {
  if (m < 0 || m > 6) throw ArgumentError("max_binary_determinant: order must be in [0, 6]");
}

}  // namespace

std::int64_t determinant_bareiss(const IntMatrix& m) {
  if (m.rows() != m.cols()) throw ArgumentError("determinant: matrix must be square");
  const Eigen::Index n = m.rows();
  if (n == 0) return 1;
  Eigen::Matrix<__int128, Eigen::Dynamic, Eigen::Dynamic> a = m.cast<__int128>();
  __int128 prev = 1;
  int sign = 1;
  for (Eigen::Index k = 0; k < n - 1; ++k) {
    if (a(k, k) == 0) {
      Eigen::Index p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      a.row(k).swap(a.row(p));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i)
      for (Eigen::Index j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    prev = a(k, k);
  }
  return static_cast<std::int64_t>(sign * a(n - 1, n - 1));
}

std::int64_t determinant(const IntMatrix& m) {
  if (m.rows() != m.cols()) throw ArgumentError("determinant: matrix must be square");
  return m.rows() <= 8 ? laplace(m) : determinant_bareiss(m);
}

IntVector adjugate_vector(const IntMatrix& d, int i) {
  if (d.rows() != d.cols()) throw ArgumentError("adjugate_vector: matrix must be square");
  const Eigen::Index n = d.rows();
  if (i < 0 || i >= n) throw ArgumentError("adjugate_vector: index out of range");
  if (determinant(d) == 0) throw ArgumentError("adjugate_vector: singular matrix");
  IntVector w(n);
  if (n == 1) {
    w(0) = 1;
    return w;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::int64_t minor = determinant(drop(d, i, j));
    w(j) = ((i + j) % 2 == 0) ? minor : -minor;
  }
  return w;
}

std::int64_t max_binary_determinant_serial(int m) {
  check_binary_order(m);
  if (m == 0) return 1;
  const std::uint64_t total = std::uint64_t{1} << (m * m);
  std::int64_t best = 0;
  for (std::uint64_t bits = 0; bits < total; ++bits) best = std::max(best, det_of_bits(bits, m));
  return best;
}

std::int64_t max_binary_determinant(int m) {
  check_binary_order(m);
  if (m == 0) return 1;
  const auto total = static_cast<long long>(std::uint64_t{1} << (m * m));
  std::int64_t best = 0;
#pragma omp parallel for reduction(max : best) schedule(static)
  for (long long bits = 0; bits < total; ++bits)
    best = std::max(best, det_of_bits(static_cast<std::uint64_t>(bits), m));
  return best;
}

int kappa_bound(int n) {
  if (n < 1) throw ArgumentError("kappa_bound: n must be positive");
  static constexpr std::array<int, 8> table{1, 1, 1, 1, 2, 3, 5, 9};
  if (n < static_cast<int>(table.size())) return table[n];
  const double m = n - 1;
  return static_cast<int>(std::floor(2.0 * std::pow(m / 4.0, m)));
}

int kappa_bound_sparse(int n, int k) {
  if (n < 1 || k < 0) throw ArgumentError("kappa_bound_sparse: need n >= 1 and k >= 0");
  return static_cast<int>(std::floor(std::pow(2.0, k / 3.0) + 1e-12));
}

LinearGaussianSem CounterexamplePair::model_a() const {
  MatrixXd w = MatrixXd::Zero(2, 2);
  w(1, 0) = 1.0;
  return LinearGaussianSem(Dag(2, {{0, 1}}), w, VectorXd{{v1, v2}});
}

LinearGaussianSem CounterexamplePair::model_b() const {
  return LinearGaussianSem(Dag(2), MatrixXd::Zero(2, 2), VectorXd{{vbar1, vbar2}});
}

ObservationModel CounterexamplePair::transform_a() const { return ObservationModel(MatrixXd::Identity(2, 2)); }

ObservationModel CounterexamplePair::transform_b() const { return ObservationModel(MatrixXd{{a, b}, {c, d}}); }

namespace {

std::vector<EnvironmentSpec> hard_pair(double var0, double var1) {
  return {EnvironmentSpec(InterventionKind::hard, {Mechanism{0, VectorXd::Zero(2), var0, 0.0}}),
          EnvironmentSpec(InterventionKind::hard, {Mechanism{1, VectorXd::Zero(2), var1, 0.0}})};
}

}  // namespace

std::vector<EnvironmentSpec> CounterexamplePair::environments_a() const { return hard_pair(v1_star, v2_star); }
std::vector<EnvironmentSpec> CounterexamplePair::environments_b() const { return hard_pair(vbar1_star, vbar2_star); }

MatrixXd CounterexamplePair::observed_covariance_a(int k) const {
  if (k < 0 || k > 1) throw ArgumentError("observed_covariance_a: environment must be 0 or 1");
  const MatrixXd g = transform_a().transform();
  return g * analytic_latent_covariance(model_a(), environments_a()[k]) * g.transpose();
}

MatrixXd CounterexamplePair::observed_covariance_b(int k) const {
  if (k < 0 || k > 1) throw ArgumentError("observed_covariance_b: environment must be 0 or 1");
  const MatrixXd g = transform_b().transform();
  return g * analytic_latent_covariance(model_b(), environments_b()[k]) * g.transpose();
}

CounterexamplePair build_counterexample(double vbar1, double vbar1_star, double vbar2, double vbar2_star) {
  if (!(vbar1 > 0 && vbar1_star > 0 && vbar2 > 0 && vbar2_star > 0))
    throw ArgumentError("build_counterexample: variances must be positive");
  if (vbar1 == vbar1_star || vbar2 == vbar2_star)
    throw ArgumentError("build_counterexample: interventions must change the variances");
  const double ratio = (vbar1_star * vbar2_star) / (vbar1 * vbar2);
  if (std::abs(1.0 - ratio) < 1e-12)
    throw ArgumentError("build_counterexample: V1*V2 equals V1* V2*, no real solution");

  CounterexamplePair p;
  p.vbar1 = vbar1, p.vbar1_star = vbar1_star, p.vbar2 = vbar2, p.vbar2_star = vbar2_star;
  p.d = 1.0;
  const double a2 = 0.5 * (vbar2 / (4.0 * vbar1_star)) * (1.0 - ratio) * (1.0 - ratio);
  p.a = std::sqrt(a2);
  const double lin = vbar2 - vbar2_star * vbar1_star / vbar1;
  const double disc = lin * lin - 4.0 * vbar2 * a2 * vbar1_star;
  p.b = (lin + std::sqrt(disc)) / (2.0 * vbar2);
  p.c = -p.b * vbar2_star / (p.a * vbar1);

  p.v1_star = a2 * vbar1_star + p.b * p.b * vbar2;
  p.v2 = (p.c * p.c - p.a * p.c) * vbar1_star + (1.0 - p.b) * vbar2;
  p.v1 = a2 * vbar1 + p.b * p.b * vbar2_star;
  p.v2_star = p.c * p.c * vbar1 + vbar2_star;

  const std::array<std::pair<const char*, double>, 4> derived{
      {{"V1 > 0", p.v1}, {"V1* > 0", p.v1_star}, {"V2 > 0", p.v2}, {"V2* > 0", p.v2_star}}};
  for (const auto& [name, value] : derived)
    if (!(value > 0.0)) throw ConstructionError(std::string("build_counterexample: violated ") + name);
  if (p.v1 == p.v1_star) throw ConstructionError("build_counterexample: violated V1 != V1*");
  if (std::abs(p.a * p.d - p.b * p.c) < 1e-12) throw ConstructionError("build_counterexample: singular transform");

  for (int k = 0; k < 2; ++k) {
    const MatrixXd ca = p.observed_covariance_a(k);
    const MatrixXd cb = p.observed_covariance_b(k);
    if ((ca - cb).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + ca.cwiseAbs().maxCoeff()))
      throw ConstructionError("build_counterexample: environment covariances do not match");
  }
  return p;
}

std::vector<double> default_c_grid() { return {-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0}; }

RegularityReport regularity_diagnostic(const LinearGaussianSem& sem, std::span<const EnvironmentSpec> specs,
                                       const MatrixXd& probe_z, std::span<const double> c_grid, double tol) {
  if (probe_z.cols() != sem.size()) throw ArgumentError("regularity_diagnostic: probe dimension mismatch");
  std::vector<MatrixXd> lambdas;
  lambdas.reserve(probe_z.rows());
  for (Eigen::Index k = 0; k < probe_z.rows(); ++k)
    lambdas.push_back(lambda_matrix(sem, specs, probe_z.row(k).transpose()));

  RegularityReport report;
  for (int i = 0; i < sem.size(); ++i) {
    for (int j : sem.dag().parents(i)) {
      for (double c : c_grid) {
        std::vector<double> ratios;
        for (const auto& lam : lambdas) {
          if (std::abs(lam(i, i)) < tol) continue;
          ratios.push_back((lam(j, i) + c * lam(j, j)) / lam(i, i));
        }
        if (ratios.size() < 2) continue;
        ++report.triples_tested;
        double mean = 0.0;
        for (double r : ratios) mean += r;
        mean /= static_cast<double>(ratios.size());
        double var = 0.0;
        for (double r : ratios) var += (r - mean) * (r - mean);
        const double sd = std::sqrt(var / static_cast<double>(ratios.size() - 1));
        const double cv = std::abs(mean) > tol ? sd / std::abs(mean) : sd;
        if (cv < tol) report.flags.push_back({i, j, c, mean, cv});
      }
    }
  }
  return report;
}

}  // namespace umni
