#include "umni/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umni/errors.hpp"

namespace umni {

MatrixXd row_sup_normalize(const MatrixXd& m) {
  MatrixXd out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double sup = m.row(i).cwiseAbs().maxCoeff();
    if (sup > 0.0) out.row(i) /= sup;
  }
  return out;
}

namespace {

std::vector<int> peel(const MatrixXd& w) {
  const auto n = static_cast<int>(w.rows());
  std::vector<bool> row_done(n, false), col_done(n, false);
  std::vector<int> perm(n, -1);
  for (int step = 0; step < n; ++step) {
    int best_row = -1, best_col = -1;
    double best_share = -1.0, best_mag = -1.0;
    for (int r = 0; r < n; ++r) {
      if (row_done[r]) continue;
      double mass = 0.0, top = -1.0;
      int arg = -1;
      for (int c = 0; c < n; ++c) {
        if (col_done[c]) continue;
        mass += w(r, c);
        if (w(r, c) > top) top = w(r, c), arg = c;
      }
      const double share = mass > 0.0 ? top / mass : 0.0;
      if (share > best_share || (share == best_share && top > best_mag)) {
        best_share = share, best_mag = top, best_row = r, best_col = arg;
      }
    }
    perm[best_row] = best_col;
    row_done[best_row] = true;
    col_done[best_col] = true;
  }
  return perm;
}

// Minimum-cost assignment (shortest augmenting paths with potentials).
std::vector<int> hungarian(const MatrixXd& cost) {
  const auto n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) minv[j] = cur, way[j] = j0;
        if (minv[j] < delta) delta = minv[j], j1 = j;
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> perm(n, -1);
  for (int j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

}  // namespace

std::vector<int> align_permutation(const MatrixXd& mixing, AlignmentRule rule) {
  if (mixing.rows() != mixing.cols() || mixing.rows() == 0)
    throw ArgumentError("align_permutation: mixing must be square and non-empty");
  if (!mixing.allFinite()) throw AlignmentError("align_permutation: non-finite mixing entries");
  Eigen::JacobiSVD<MatrixXd> svd(mixing);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(s.size() - 1) <= 1e-12 * s(0)) throw AlignmentError("align_permutation: rank-deficient mixing");
  const MatrixXd w = row_sup_normalize(mixing).cwiseAbs();
  return rule == AlignmentRule::peeling ? peel(w) : hungarian(-w);
}

MatrixXd apply_alignment(const MatrixXd& mixing, const std::vector<int>& perm) {
  if (static_cast<Eigen::Index>(perm.size()) != mixing.rows())
    throw ArgumentError("apply_alignment: permutation length mismatch");
  MatrixXd out(mixing.rows(), mixing.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(perm[i]) = mixing.row(static_cast<Eigen::Index>(i));
  return out;
}

double mixing_ratio_hard(const MatrixXd& aligned, double threshold, bool normalize_rows) {
  const Eigen::Index n = aligned.rows();
  if (n < 2) return 0.0;
  const MatrixXd m = normalize_rows ? row_sup_normalize(aligned) : aligned;
  int count = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && std::abs(m(i, j)) >= threshold) ++count;
  return static_cast<double>(count) / static_cast<double>(n * n - n);
}

std::optional<double> mixing_ratio_soft(const MatrixXd& mixing, const Dag& true_dag, const std::vector<int>& perm,
                                        double threshold, bool normalize_rows) {
  const int n = true_dag.size();
  if (mixing.rows() != n || mixing.cols() != n) throw ArgumentError("mixing_ratio_soft: dimension mismatch");
  MatrixXd m = apply_alignment(mixing, perm);
  if (normalize_rows) m = row_sup_normalize(m);
  int count = 0, denom = n * n;
  for (int i = 0; i < n; ++i) {
    auto anc = true_dag.ancestors(i);
    anc.push_back(i);
    denom -= static_cast<int>(anc.size());
    for (int j = 0; j < n; ++j)
      if (std::find(anc.begin(), anc.end(), j) == anc.end() && std::abs(m(i, j)) >= threshold) ++count;
  }
  if (denom == 0) return std::nullopt;
  return static_cast<double>(count) / denom;
}

EvaluationReport evaluate(const Dag& estimated, const MatrixXd& mixing, const Dag& true_dag, Pipeline kind,
                          const EvaluationOptions& options) {
  if (estimated.size() != true_dag.size() || mixing.rows() != true_dag.size())
    throw ArgumentError("evaluate: dimension mismatch");
  EvaluationReport rep;
  rep.alignment = align_permutation(mixing, options.rule);
  const Dag relabeled = relabel(estimated, rep.alignment);
  const MatrixXd aligned = apply_alignment(mixing, rep.alignment);
  rep.mixing = options.normalize_rows ? row_sup_normalize(aligned) : aligned;
  if (kind == Pipeline::soft) {
    rep.shd_value = shd(transitive_closure(true_dag), relabeled);
    rep.mixing_ratio = mixing_ratio_soft(mixing, true_dag, rep.alignment, options.threshold, options.normalize_rows);
  } else {
    rep.shd_value = shd(true_dag, relabeled);
    rep.mixing_ratio = mixing_ratio_hard(aligned, options.threshold, options.normalize_rows);
  }
  return rep;
}

}  // namespace umni
