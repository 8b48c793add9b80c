#pragma once

#include <functional>
#include <string>
#include <vector>

#include "umni/graph.hpp"
#include "umni/lattice.hpp"
#include "umni/linalg.hpp"
#include "umni/score.hpp"

namespace umni {

/// Dimension test for images of aggregated score differences.
///
/// The projected evaluation matrix has dimension 0 when σ₁ ≤ abs_tol·scale (scale is
/// fixed per stack, see ImageOracle::scale), otherwise the number of σ_i with
/// σ_i > rel_tol·σ₁. For the noisy rule "dim 1 iff σ₂/σ₁ < τ" set rel_tol = τ.
struct RankTest {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
};

struct ImageDim {
  int dim = 0;
  VectorXd representative;  // unit norm, unprojected; empty unless dim == 1
};

/// Evaluations of the basis score differences at fixed probe points.
/// ΔS_X(x_k)·w for all k is Σ_m w_m E_m with E_m = [Δs^m(x_1) … Δs^m(x_K)].
///
/// An optional symmetric `metric` M (d x d, injective on the span of the images)
/// moves the computation to M-coordinates: images become M·image and null rows
/// become rows·M, which leaves every dimension unchanged. With M the square root
/// of the observational covariance the singular values no longer depend on the
/// transform at all.
class ImageOracle {
 public:
  ImageOracle(const ScoreDifferenceStack& stack, const MatrixXd& probes, const MatrixXd& metric = MatrixXd());

  Eigen::Index dim() const noexcept { return dim_; }
  Eigen::Index basis_size() const noexcept { return static_cast<Eigen::Index>(evals_.size()); }
  /// max_m ‖E_m‖₂; the reference for RankTest::abs_tol.
  double scale() const noexcept { return scale_; }

  /// d x K matrix of image vectors ΔS_X(x_k)·w.
  MatrixXd image(const IntVector& w) const;

  /// Projector onto the complement of span(null_rows), in the oracle's working
  /// coordinates (the metric image when a metric is set).
  MatrixXd projector(const MatrixXd& null_rows) const;

  /// Dimension of the projection of im(ΔS_X·w) by `projector` (from projector());
  /// when it is one, the representative is the unprojected image vector with the
  /// largest projected norm.
  ImageDim projected_dim(const IntVector& w, const MatrixXd& projector, const RankTest& test) const;

 private:
  Eigen::Index dim_ = 0;
  std::vector<MatrixXd> evals_;
  MatrixXd metric_;
  double scale_ = 0.0;
};

/// Free-function form: projector built from the rows in `null_of` (may be empty).
ImageDim projected_image_dim(const ScoreDifferenceStack& stack, const IntVector& w, const MatrixXd& null_of,
                             const MatrixXd& probes, const RankTest& test);

struct TraceEntry {
  int stage = 0;
  int t = 0;
  int j = -1;  // stage 3 partner, stage 4 environment
  IntVector w;
  std::string note;
};

struct RecoveryState {
  MatrixXd encoder;           // H*, n x d
  IntMatrix mix;              // W, n x n
  std::vector<int> order;     // recovered causal order over estimated indices
  Dag graph;                  // Ĝ over estimated indices
  std::vector<int> basis;     // selected environment indices (into the interventional list)
  std::vector<TraceEntry> trace;
  std::vector<std::string> warnings;
};

/// Sufficient statistics of one environment's observations. n_samples == 0
/// marks exact (population) moments.
struct EnvironmentStats {
  VectorXd mean;
  MatrixXd cov;
  long long n_samples = 0;
};
EnvironmentStats environment_stats(const MatrixXd& x);

enum class Pipeline { soft, hard };

struct UmniOptions {
  Pipeline pipeline = Pipeline::soft;
  int kappa = 0;               // 0 → kappa_bound(n)
  RankTest rank;               // stages 2 and 3
  double basis_tol = 1e-6;     // select_basis
  double pinv_tol = kEstimatedPinvTol;
  int probes_per_dim = 5;      // probe count = probes_per_dim · n
  double u_sigma = 3.0;        // u_m ≠ u_obs threshold in pooled standard errors
  bool whiten = true;          // measure image dimensions in the observational metric
  double exact_tol = 1e-8;     // comparisons when moments are exact
  double indep_tol = 1e-6;     // zero-correlation independence surrogate
  double ci_alpha = 0.05;      // stage-4 pruning
  bool parallel_scan = false;

  static UmniOptions oracle(Pipeline p);
  static UmniOptions estimated(Pipeline p);
};

/// Exhaustive lattice scan, t = 1..n. Throws RecoveryFailure(2) when no w is found.
RecoveryState stage2_causal_order(const ImageOracle& oracle, int kappa, const RankTest& test,
                                  bool parallel_scan = false);

/// Refines W toward ancestor-only mixing and builds Ĝ (transitive-closure estimate).
RecoveryState stage3_ancestors(RecoveryState state, const ImageOracle& oracle, const RankTest& test);

/// Independence contract for stage 4: given the joint covariance of (U, Ẑ_A) with U
/// first, and the sample count (0 = exact), decide U ⊥ Ẑ_A.
using IndependenceTest = std::function<bool(const MatrixXd& joint_cov, long long n_samples)>;
IndependenceTest zero_covariance_test(double tol);

/// Removes ancestor mixing from H* rows (hard interventions). `env_stats[0]` is the
/// observational environment and env_stats[1 + b] the interventional environment b.
RecoveryState stage4_unmix(RecoveryState state, const std::vector<EnvironmentStats>& env_stats,
                           const UmniOptions& options, const IndependenceTest& indep);

/// Partial-correlation (Fisher z) pruning of non-parent ancestor edges.
Dag stage4_prune_graph(RecoveryState& state, const EnvironmentStats& observational, double alpha_level,
                       double exact_tol = 1e-8);

/// Two-sided Fisher-z p-value for a partial correlation with `cond_size`
/// conditioning variables over n_samples.
double fisher_z_pvalue(double partial_corr, long long n_samples, int cond_size);

struct UmniResult {
  Dag graph;
  MatrixXd encoder;
  MatrixXd latents;  // Ẑ for the observational samples (empty for moment-only input)
  RecoveryState state;
};

/// Stages 1–4 from explicit scores. scores[0] is observational, scores[1 + m] environment m.
UmniResult recover(const std::vector<AffineScoreFn>& scores, const std::vector<EnvironmentStats>& env_stats,
                   const MatrixXd& probes, int n, const UmniOptions& options);

/// Symmetric square root of a PSD matrix, eigenvalues below rel_tol·λ_max dropped.
MatrixXd covariance_sqrt(const MatrixXd& cov, double rel_tol);

/// End-to-end from sample matrices (observational first). Scores are Gaussian
/// plug-in estimates, n is the numerical rank of the observational covariance, and
/// probes are the first probes_per_dim·n observational rows.
UmniResult run_umni(const std::vector<MatrixXd>& env_x, const UmniOptions& options);

}  // namespace umni
