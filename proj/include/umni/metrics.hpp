#pragma once

#include <optional>
#include <vector>

#include "umni/graph.hpp"
#include "umni/linalg.hpp"
#include "umni/recovery.hpp"

namespace umni {

enum class AlignmentRule {
  peeling,    // greedy, see align_permutation
  hungarian,  // optimal assignment on normalized magnitudes
};

/// Divides each row by its largest absolute entry (zero rows left as is).
MatrixXd row_sup_normalize(const MatrixXd& m);

/// perm[i] is the true latent index matched to estimated row i of the mixing
/// matrix H*·G.
///
/// Peeling: repeatedly pick, among unassigned rows, the one whose largest
/// normalized magnitude over unassigned columns takes the biggest share of that
/// row's remaining mass, and assign it to that column. Exact for any matrix that
/// is triangular up to row/column permutations (ancestor mixing) and reduces to
/// greedy argmax for near-diagonal ones. Throws AlignmentError when rank deficient.
std::vector<int> align_permutation(const MatrixXd& mixing, AlignmentRule rule = AlignmentRule::peeling);

/// Rows rearranged so that estimated row i lands at row perm[i].
MatrixXd apply_alignment(const MatrixXd& mixing, const std::vector<int>& perm);

/// Fraction of off-diagonal entries of an aligned mixing matrix with magnitude ≥ threshold.
double mixing_ratio_hard(const MatrixXd& aligned, double threshold = 0.1, bool normalize_rows = true);

/// Fraction of non-ancestor entries (j ∉ an⁺(perm[i])) with magnitude ≥ threshold.
/// nullopt when every entry is an ancestor-or-self entry.
std::optional<double> mixing_ratio_soft(const MatrixXd& mixing, const Dag& true_dag, const std::vector<int>& perm,
                                        double threshold = 0.1, bool normalize_rows = true);

struct EvaluationReport {
  int shd_value = 0;
  std::optional<double> mixing_ratio;
  std::vector<int> alignment;
  MatrixXd mixing;  // aligned, row-normalized when normalization is on
};

struct EvaluationOptions {
  double threshold = 0.1;
  bool normalize_rows = true;
  AlignmentRule rule = AlignmentRule::peeling;
};

/// Aligns, relabels Ĝ, and scores against tc(𝒢) (soft) or 𝒢 (hard).
EvaluationReport evaluate(const Dag& estimated, const MatrixXd& mixing, const Dag& true_dag, Pipeline kind,
                          const EvaluationOptions& options = {});

}  // namespace umni
