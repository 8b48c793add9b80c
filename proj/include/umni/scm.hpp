#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "umni/graph.hpp"
#include "umni/linalg.hpp"

namespace umni {

enum class InterventionKind { observational, soft, hard };

const char* to_string(InterventionKind kind);
InterventionKind intervention_kind_from_string(const std::string& s);

/// Linear-Gaussian SEM: Z_i = sum_j weights(i, j) Z_j + N_i, N_i ~ N(0, noise_vars(i)).
class LinearGaussianSem {
 public:
  LinearGaussianSem(Dag dag, MatrixXd weights, VectorXd noise_vars);

  int size() const noexcept { return dag_.size(); }
  const Dag& dag() const noexcept { return dag_; }
  const MatrixXd& weights() const noexcept { return weights_; }
  const VectorXd& noise_vars() const noexcept { return noise_vars_; }

 private:
  Dag dag_;
  MatrixXd weights_;
  VectorXd noise_vars_;
};

/// Replacement mechanism for one intervened node. `weights` is a full row of
/// length n (zero for hard interventions); `shift` is the noise mean.
struct Mechanism {
  int node = 0;
  VectorXd weights;
  double noise_var = 1.0;
  double shift = 0.0;
};

/// One environment: its intervention targets and their replacement mechanisms.
/// Mechanisms are sorted by node and targets() lists them in that order.
class EnvironmentSpec {
 public:
  EnvironmentSpec() = default;  // observational
  EnvironmentSpec(InterventionKind kind, std::vector<Mechanism> mechanisms);

  static EnvironmentSpec observational() { return {}; }

  InterventionKind kind() const noexcept { return kind_; }
  const std::vector<Mechanism>& mechanisms() const noexcept { return mechanisms_; }
  std::vector<int> targets() const;
  bool targets_node(int i) const;
  const Mechanism* mechanism_for(int i) const;

  /// Checks the environment against a model: target range, hard ⇒ zero weights, weights
  /// only on true parents, positive variance, and a mechanism that differs from
  /// the observational one. Throws ArgumentError.
  void validate(const LinearGaussianSem& sem) const;

 private:
  InterventionKind kind_ = InterventionKind::observational;
  std::vector<Mechanism> mechanisms_;
};

/// Effective parameters of the latent model inside an environment.
struct EnvironmentParameters {
  MatrixXd weights;
  VectorXd noise_vars;
  VectorXd shifts;
};
EnvironmentParameters environment_parameters(const LinearGaussianSem& sem, const EnvironmentSpec& spec);

/// d x n full-column-rank transform G with cached pseudo-inverse.
class ObservationModel {
 public:
  explicit ObservationModel(MatrixXd transform);

  const MatrixXd& transform() const noexcept { return transform_; }
  const MatrixXd& encoder() const noexcept { return encoder_; }  // G†
  Eigen::Index observed_dim() const noexcept { return transform_.rows(); }
  Eigen::Index latent_dim() const noexcept { return transform_.cols(); }

 private:
  MatrixXd transform_;
  MatrixXd encoder_;
};

/// Smallest/largest singular value ratio below which a transform is rejected.
inline constexpr double kTransformConditionFloor = 1e-6;
inline constexpr int kRetryBudget = 1000;

struct SemParameters {
  double weight_min = 0.5;
  double weight_max = 1.5;
  double var_min = 0.5;
  double var_max = 1.5;
};

/// Weights Unif(±[weight_min, weight_max]) on edges, variances Unif([var_min, var_max]).
LinearGaussianSem random_sem(const Dag& dag, std::uint64_t seed, const SemParameters& params = {});

/// n x M binary matrix, entry (i, m) = 1 iff i is a target of specs[m].
IntMatrix intervention_signature(const std::vector<EnvironmentSpec>& specs, int n);

/// True iff the signature matrix has full row rank.
bool check_assumption1(const IntMatrix& signature);

/// Soft: target weights halved. Hard: target weights zeroed. Both: variance / 4.
Mechanism default_mechanism(const LinearGaussianSem& sem, int node, InterventionKind kind);

/// n environments whose signature is a column permutation of a random full-rank
/// binary matrix. Throws GenerationError after kRetryBudget rejected draws.
std::vector<EnvironmentSpec> random_interventions(int n, InterventionKind kind, const LinearGaussianSem& sem,
                                                  std::uint64_t seed);

/// Environments with the given target sets, using default_mechanism for each target.
std::vector<EnvironmentSpec> interventions_from_signature(const IntMatrix& signature, InterventionKind kind,
                                                          const LinearGaussianSem& sem);

/// n_s x n matrix of i.i.d. latent draws in the environment.
MatrixXd sample_latent(const LinearGaussianSem& sem, const EnvironmentSpec& spec, Eigen::Index n_samples,
                       std::uint64_t seed);

/// (I - A)^{-1} Σ_N (I - A)^{-T} with the environment's weights A.
MatrixXd analytic_latent_covariance(const LinearGaussianSem& sem, const EnvironmentSpec& spec);
MatrixXd analytic_latent_precision(const LinearGaussianSem& sem, const EnvironmentSpec& spec);
VectorXd analytic_latent_mean(const LinearGaussianSem& sem, const EnvironmentSpec& spec);

/// Rows x = G z for each row z of `latent`.
MatrixXd mix(const ObservationModel& model, const MatrixXd& latent);

/// I.i.d. standard-normal d x n transform, redrawn until well conditioned.
ObservationModel random_transform(int d, int n, std::uint64_t seed);

}  // namespace umni
