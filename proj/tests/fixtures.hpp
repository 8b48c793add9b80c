#pragma once

// Oracle-mode inputs and stage-by-stage recovery for tests.

#include <vector>

#include "oracles.hpp"
#include "umni/graph.hpp"
#include "umni/harness.hpp"
#include "umni/recovery.hpp"
#include "umni/score.hpp"
#include "umni/theory.hpp"

namespace fixture {

using namespace umni;

struct OracleInputs {
  LinearGaussianSem sem;
  ObservationModel model;
  std::vector<EnvironmentSpec> envs;  // interventional
  std::vector<AffineScoreFn> scores;  // observational first
  std::vector<EnvironmentStats> stats;
  MatrixXd probes;
};

inline OracleInputs oracle_inputs(const LinearGaussianSem& sem, const ObservationModel& model,
                                  const std::vector<EnvironmentSpec>& envs, std::uint64_t probe_seed) {
  OracleInputs in{sem, model, envs, {}, {}, {}};
  std::vector<EnvironmentSpec> all{EnvironmentSpec::observational()};
  all.insert(all.end(), envs.begin(), envs.end());
  for (const auto& e : all) {
    in.scores.push_back(analytic_observed_score(sem, e, model));
    in.stats.push_back(oracle::exact_stats(sem, e, model));
  }
  in.probes = mix(model, sample_latent(sem, all[0], 5 * sem.size(), probe_seed));
  return in;
}

inline OracleInputs oracle_inputs(const TrialInstance& inst, std::uint64_t probe_seed) {
  return oracle_inputs(inst.sem, inst.model, inst.environments, probe_seed);
}

struct Stages {
  BasisSelection basis;
  IntMatrix d;  // signature restricted to the basis, n x n
  RecoveryState after2;
  RecoveryState after3;
};

inline Stages run_stages(const OracleInputs& in, const UmniOptions& opt) {
  const int n = in.sem.size();
  std::vector<AffineScoreFn> diffs;
  for (std::size_t m = 1; m < in.scores.size(); ++m) diffs.push_back(score_difference(in.scores[m], in.scores[0]));
  Stages s;
  s.basis = select_basis(diffs, in.probes, n, opt.basis_tol);
  const IntMatrix full = intervention_signature(in.envs, n);
  s.d.resize(n, n);
  for (int k = 0; k < n; ++k) s.d.col(k) = full.col(s.basis.indices[k]);
  const ImageOracle io(s.basis.stack, in.probes,
                       opt.whiten ? covariance_sqrt(in.stats.front().cov, opt.pinv_tol) : MatrixXd());
  s.after2 = stage2_causal_order(io, n >= 2 ? kappa_bound(n) : 1, opt.rank, opt.parallel_scan);
  s.after2.basis = s.basis.indices;
  s.after3 = stage3_ancestors(s.after2, io, opt.rank);
  return s;
}

// Residual of each unit row of H* after projection onto span{[G†]_{π_1..π_t}}.
inline double max_subspace_residual(const MatrixXd& encoder, const MatrixXd& g_pinv, const std::vector<int>& pi) {
  double worst = 0;
  for (int t = 0; t < encoder.rows(); ++t) {
    MatrixXd basis(t + 1, g_pinv.cols());
    for (int s = 0; s <= t; ++s) basis.row(s) = g_pinv.row(pi[s]);
    const VectorXd h = encoder.row(t).transpose();
    const VectorXd r = nullspace_projector(basis, g_pinv.cols()) * h;
    worst = std::max(worst, r.norm() / h.norm());
  }
  return worst;
}

// Largest row-sup-normalized |H*·G| entry outside the ancestor-or-self pattern of π_t.
inline double max_off_ancestor(const MatrixXd& mixing, const Dag& truth, const std::vector<int>& pi) {
  double worst = 0;
  for (int t = 0; t < mixing.rows(); ++t) {
    const double top = mixing.row(t).cwiseAbs().maxCoeff();
    for (int j = 0; j < mixing.cols(); ++j)
      if (j != pi[t] && !truth.is_ancestor(j, pi[t])) worst = std::max(worst, std::abs(mixing(t, j)) / top);
  }
  return worst;
}

}  // namespace fixture
