#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "umni/linalg.hpp"
#include "umni/scm.hpp"

namespace umni {

/// Exact integer determinant: cofactor expansion up to 8x8, Bareiss beyond.
std::int64_t determinant(const IntMatrix& m);
/// Bareiss fraction-free elimination (any size).
std::int64_t determinant_bareiss(const IntMatrix& m);

/// Column i of adj(D)ᵀ, so that D·w = det(D)·e_i. Throws ArgumentError if det(D) = 0.
IntVector adjugate_vector(const IntMatrix& d, int i);

/// Largest |det| over all m x m binary matrices, by enumeration. Serial reference.
std::int64_t max_binary_determinant_serial(int m);
/// Same enumeration, split across OpenMP threads.
std::int64_t max_binary_determinant(int m);

/// κ for n latent nodes: max det of (n−1)x(n−1) binary matrices. Tabulated for
/// n = 2..7 (1, 1, 2, 3, 5, 9); ⌊2(m/4)^m⌋ with m = n − 1 beyond. n = 1 → 1.
int kappa_bound(int n);
/// ⌊2^{k/3}⌋ for a basis matrix with n + k nonzeros.
int kappa_bound_sparse(int n, int k);

/// Two-node pair that agrees on both hard interventional environments
/// ({1}, {2}) yet has different graphs.
struct CounterexamplePair {
  // model A: 1 → 2 with unit weight, identity transform
  double v1 = 0, v1_star = 0, v2 = 0, v2_star = 0;
  // model B: empty graph, transform [[a, b], [c, d]]
  double vbar1 = 0, vbar1_star = 0, vbar2 = 0, vbar2_star = 0;
  double a = 0, b = 0, c = 0, d = 1;

  LinearGaussianSem model_a() const;
  LinearGaussianSem model_b() const;
  ObservationModel transform_a() const;
  ObservationModel transform_b() const;
  /// Environment k ∈ {0, 1} intervenes node k with its starred variance.
  std::vector<EnvironmentSpec> environments_a() const;
  std::vector<EnvironmentSpec> environments_b() const;
  /// Observed covariance of environment k for model A / B.
  MatrixXd observed_covariance_a(int k) const;
  MatrixXd observed_covariance_b(int k) const;
};

/// Builds the pair from (V̄₁, V̄₁*, V̄₂, V̄₂*): d = 1, a² at half its feasibility bound,
/// b from the quadratic, c from ac·V̄₁ = −b·V̄₂*, then model-A variances back-solved.
/// Throws ArgumentError when V̄₁V̄₂ = V̄₁*V̄₂* or a mechanism is unchanged;
/// ConstructionError when a derived variance is not positive.
CounterexamplePair build_counterexample(double vbar1, double vbar1_star, double vbar2, double vbar2_star);

struct RegularityFlag {
  int node = 0;    // i
  int parent = 0;  // j ∈ pa(i)
  double c = 0;
  double mean_ratio = 0;
  double coeff_variation = 0;
};

struct RegularityReport {
  int triples_tested = 0;
  std::vector<RegularityFlag> flags;
  bool clean() const noexcept { return flags.empty(); }
};

std::vector<double> default_c_grid();

/// Heuristic constancy check of (Λ_{j,i} + c·Λ_{j,j}) / Λ_{i,i} over probe points
/// (rows of probe_z), for every i, j ∈ pa(i), c in the grid. A triple is flagged when
/// the coefficient of variation across probes is below tol. Probes with
/// |Λ_{i,i}| < tol are skipped. A flag is a warning, not a proof.
RegularityReport regularity_diagnostic(const LinearGaussianSem& sem, std::span<const EnvironmentSpec> specs,
                                       const MatrixXd& probe_z, std::span<const double> c_grid, double tol);

}  // namespace umni
