#include "umni/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "umni/errors.hpp"

namespace umni {

const char* to_string(InterventionKind kind) {
  switch (kind) {
    case InterventionKind::observational: return "observational";
    case InterventionKind::soft: return "soft";
    case InterventionKind::hard: return "hard";
  }
  return "?";
}

InterventionKind intervention_kind_from_string(const std::string& s) {
  if (s == "observational") return InterventionKind::observational;
  if (s == "soft") return InterventionKind::soft;
  if (s == "hard") return InterventionKind::hard;
  throw ArgumentError("unknown intervention kind: " + s);
}

LinearGaussianSem::LinearGaussianSem(Dag dag, MatrixXd weights, VectorXd noise_vars)
    : dag_(std::move(dag)), weights_(std::move(weights)), noise_vars_(std::move(noise_vars)) {
  const int n = dag_.size();
  if (weights_.rows() != n || weights_.cols() != n || noise_vars_.size() != n)
    throw ArgumentError("LinearGaussianSem: dimension mismatch");
  for (int i = 0; i < n; ++i) {
    if (!(noise_vars_(i) > 0.0)) throw ArgumentError("LinearGaussianSem: noise variances must be positive");
    for (int j = 0; j < n; ++j)
      if (weights_(i, j) != 0.0 && !dag_.has_edge(j, i))
        throw ArgumentError("LinearGaussianSem: nonzero weight without a matching edge");
  }
}

EnvironmentSpec::EnvironmentSpec(InterventionKind kind, std::vector<Mechanism> mechanisms)
    : kind_(kind), mechanisms_(std::move(mechanisms)) {
  std::sort(mechanisms_.begin(), mechanisms_.end(),
            [](const Mechanism& a, const Mechanism& b) { return a.node < b.node; });
  for (std::size_t k = 1; k < mechanisms_.size(); ++k)
    if (mechanisms_[k].node == mechanisms_[k - 1].node) throw ArgumentError("EnvironmentSpec: duplicate target");
  if (kind_ == InterventionKind::observational && !mechanisms_.empty())
    throw ArgumentError("EnvironmentSpec: observational environment with targets");
  if (kind_ == InterventionKind::hard)
    for (const auto& m : mechanisms_)
      if (m.weights.size() > 0 && !m.weights.isZero(0.0))
        throw ArgumentError("EnvironmentSpec: hard intervention with nonzero weights");
}

std::vector<int> EnvironmentSpec::targets() const {
  std::vector<int> out;
  for (const auto& m : mechanisms_) out.push_back(m.node);
  return out;
}

bool EnvironmentSpec::targets_node(int i) const { return mechanism_for(i) != nullptr; }

const Mechanism* EnvironmentSpec::mechanism_for(int i) const {
  for (const auto& m : mechanisms_)
    if (m.node == i) return &m;
  return nullptr;
}

void EnvironmentSpec::validate(const LinearGaussianSem& sem) const {
  const int n = sem.size();
  for (const auto& m : mechanisms_) {
    if (m.node < 0 || m.node >= n) throw ArgumentError("EnvironmentSpec: target out of range");
    if (m.weights.size() != n) throw ArgumentError("EnvironmentSpec: mechanism weight row has wrong length");
    if (!(m.noise_var > 0.0)) throw ArgumentError("EnvironmentSpec: noise variance must be positive");
    for (int j = 0; j < n; ++j)
      if (m.weights(j) != 0.0 && !sem.dag().has_edge(j, m.node))
        throw ArgumentError("EnvironmentSpec: mechanism weight on a non-parent");
    const bool same = m.weights == VectorXd(sem.weights().row(m.node).transpose()) &&
                      m.noise_var == sem.noise_vars()(m.node) && m.shift == 0.0;
    if (same) throw ArgumentError("EnvironmentSpec: mechanism identical to the observational one");
  }
}

EnvironmentParameters environment_parameters(const LinearGaussianSem& sem, const EnvironmentSpec& spec) {
  EnvironmentParameters p{sem.weights(), sem.noise_vars(), VectorXd::Zero(sem.size())};
  for (const auto& m : spec.mechanisms()) {
    if (m.node < 0 || m.node >= sem.size() || m.weights.size() != sem.size())
      throw ArgumentError("environment_parameters: spec does not match the model");
    p.weights.row(m.node) = m.weights.transpose();
    p.noise_vars(m.node) = m.noise_var;
    p.shifts(m.node) = m.shift;
  }
  return p;
}

ObservationModel::ObservationModel(MatrixXd transform) : transform_(std::move(transform)) {
  if (transform_.cols() < 1 || transform_.rows() < transform_.cols())
    throw ArgumentError("ObservationModel: need d >= n >= 1");
  Eigen::JacobiSVD<MatrixXd> svd(transform_);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(s.size() - 1) < kTransformConditionFloor * s(0))
    throw ArgumentError("ObservationModel: transform is not full column rank");
  encoder_ = (transform_.transpose() * transform_).ldlt().solve(transform_.transpose());
}

LinearGaussianSem random_sem(const Dag& dag, std::uint64_t seed, const SemParameters& params) {
  const int n = dag.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> magnitude(params.weight_min, params.weight_max);
  std::uniform_real_distribution<double> variance(params.var_min, params.var_max);
  std::bernoulli_distribution sign(0.5);
  MatrixXd w = MatrixXd::Zero(n, n);
  for (auto [from, to] : dag.edges()) w(to, from) = (sign(rng) ? 1.0 : -1.0) * magnitude(rng);
  VectorXd vars(n);
  for (int i = 0; i < n; ++i) vars(i) = variance(rng);
  return LinearGaussianSem(dag, std::move(w), std::move(vars));
}

IntMatrix intervention_signature(const std::vector<EnvironmentSpec>& specs, int n) {
  IntMatrix d = IntMatrix::Zero(n, static_cast<Eigen::Index>(specs.size()));
  for (std::size_t m = 0; m < specs.size(); ++m)
    for (int i : specs[m].targets()) {
      if (i < 0 || i >= n) throw ArgumentError("intervention_signature: target out of range");
      d(i, static_cast<Eigen::Index>(m)) = 1;
    }
  return d;
}

bool check_assumption1(const IntMatrix& signature) {
  if (signature.rows() == 0 || signature.cols() < signature.rows()) return false;
  return numerical_rank(to_real(signature), 1e-9) == signature.rows();
}

Mechanism default_mechanism(const LinearGaussianSem& sem, int node, InterventionKind kind) {
  Mechanism m;
  m.node = node;
  m.noise_var = sem.noise_vars()(node) / 4.0;
  if (kind == InterventionKind::soft)
    m.weights = 0.5 * sem.weights().row(node).transpose();
  else if (kind == InterventionKind::hard)
    m.weights = VectorXd::Zero(sem.size());
  else
    throw ArgumentError("default_mechanism: observational is not an intervention");
  return m;
}

std::vector<EnvironmentSpec> interventions_from_signature(const IntMatrix& signature, InterventionKind kind,
                                                          const LinearGaussianSem& sem) {
  if (signature.rows() != sem.size()) throw ArgumentError("interventions_from_signature: row count mismatch");
  std::vector<EnvironmentSpec> out;
  for (Eigen::Index m = 0; m < signature.cols(); ++m) {
    std::vector<Mechanism> mech;
    for (int i = 0; i < sem.size(); ++i)
      if (signature(i, m) != 0) mech.push_back(default_mechanism(sem, i, kind));
    out.emplace_back(kind, std::move(mech));
  }
  return out;
}

std::vector<EnvironmentSpec> random_interventions(int n, InterventionKind kind, const LinearGaussianSem& sem,
                                                  std::uint64_t seed) {
  if (n < 1 || n != sem.size()) throw ArgumentError("random_interventions: n must match the model");
  if (kind == InterventionKind::observational)
    throw ArgumentError("random_interventions: kind must be soft or hard");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    IntMatrix d(n, n);
    for (int i = 0; i < n; ++i)
      for (int m = 0; m < n; ++m) d(i, m) = coin(rng) ? 1 : 0;
    if (!check_assumption1(d)) continue;
    std::vector<int> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(cols.begin(), cols.end(), rng);
    IntMatrix permuted(n, n);
    for (int m = 0; m < n; ++m) permuted.col(m) = d.col(cols[m]);
    return interventions_from_signature(permuted, kind, sem);
  }
  throw GenerationError("random_interventions: no full-rank signature within the retry budget");
}

MatrixXd sample_latent(const LinearGaussianSem& sem, const EnvironmentSpec& spec, Eigen::Index n_samples,
                       std::uint64_t seed) {
  if (n_samples < 1) throw ArgumentError("sample_latent: need at least one sample");
  const auto p = environment_parameters(sem, spec);
  const int n = sem.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd noise(n_samples, n);
  for (Eigen::Index s = 0; s < n_samples; ++s)
    for (int i = 0; i < n; ++i) noise(s, i) = normal(rng);

  MatrixXd z(n_samples, n);
  for (int i : sem.dag().topological_order()) {
    z.col(i) = noise.col(i) * std::sqrt(p.noise_vars(i));
    z.col(i).array() += p.shifts(i);
    for (int j = 0; j < n; ++j)
      if (p.weights(i, j) != 0.0) z.col(i) += p.weights(i, j) * z.col(j);
  }
  return z;
}

namespace {

MatrixXd inverse_i_minus_a(const MatrixXd& a) {
  const Eigen::Index n = a.rows();
  return (MatrixXd::Identity(n, n) - a).inverse();
}

}  // namespace

MatrixXd analytic_latent_covariance(const LinearGaussianSem& sem, const EnvironmentSpec& spec) {
  const auto p = environment_parameters(sem, spec);
  const MatrixXd b = inverse_i_minus_a(p.weights);
  return b * p.noise_vars.asDiagonal() * b.transpose();
}

MatrixXd analytic_latent_precision(const LinearGaussianSem& sem, const EnvironmentSpec& spec) {
  const auto p = environment_parameters(sem, spec);
  const Eigen::Index n = p.weights.rows();
  const MatrixXd ima = MatrixXd::Identity(n, n) - p.weights;
  return ima.transpose() * p.noise_vars.cwiseInverse().asDiagonal() * ima;
}

VectorXd analytic_latent_mean(const LinearGaussianSem& sem, const EnvironmentSpec& spec) {
  const auto p = environment_parameters(sem, spec);
  return inverse_i_minus_a(p.weights) * p.shifts;
}

MatrixXd mix(const ObservationModel& model, const MatrixXd& latent) {
  if (latent.cols() != model.latent_dim()) throw ArgumentError("mix: latent dimension mismatch");
  return latent * model.transform().transpose();
}

ObservationModel random_transform(int d, int n, std::uint64_t seed) {
  if (n < 1 || d < n) throw ArgumentError("random_transform: need d >= n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    MatrixXd g(d, n);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < n; ++c) g(r, c) = normal(rng);
    Eigen::JacobiSVD<MatrixXd> svd(g);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) >= kTransformConditionFloor * s(0)) return ObservationModel(std::move(g));
  }
  throw GenerationError("random_transform: no well-conditioned transform within the retry budget");
}

}  // namespace umni
