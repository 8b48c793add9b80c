#include "umni/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "umni/errors.hpp"
#include "umni/theory.hpp"

namespace umni {

UmniOptions UmniOptions::oracle(Pipeline p) {
  UmniOptions o;
  o.pipeline = p;
  o.rank = {1e-6, 1e-9};
  o.basis_tol = 1e-6;
  o.pinv_tol = kAnalyticPinvTol;
  return o;
}

UmniOptions UmniOptions::estimated(Pipeline p) {
  UmniOptions o;
  o.pipeline = p;
  o.rank = {0.025, 0.05};
  o.basis_tol = 1e-2;
  o.pinv_tol = kEstimatedPinvTol;
  return o;
}

ImageOracle::ImageOracle(const ScoreDifferenceStack& stack, const MatrixXd& probes, const MatrixXd& metric)
    : dim_(stack.dim()), metric_(metric) {
  if (probes.rows() == 0) throw ArgumentError("ImageOracle: no probe points");
  if (metric_.size() > 0 && (metric_.rows() != dim_ || metric_.cols() != dim_))
    throw ArgumentError("ImageOracle: metric must be d x d");
  evals_.reserve(stack.diffs().size());
  for (const auto& f : stack.diffs()) {
    evals_.push_back(f.evaluate(probes));
    Eigen::JacobiSVD<MatrixXd> svd(metric_.size() > 0 ? MatrixXd(metric_ * evals_.back()) : evals_.back());
    scale_ = std::max(scale_, svd.singularValues()(0));
  }
}

MatrixXd ImageOracle::image(const IntVector& w) const {
  if (w.size() != basis_size()) throw ArgumentError("ImageOracle::image: weight length mismatch");
  MatrixXd out = MatrixXd::Zero(dim_, evals_.empty() ? 0 : evals_.front().cols());
  for (Eigen::Index m = 0; m < w.size(); ++m)
    if (w(m) != 0) out += static_cast<double>(w(m)) * evals_[m];
  return out;
}

MatrixXd ImageOracle::projector(const MatrixXd& null_rows) const {
  return nullspace_projector(metric_.size() > 0 ? MatrixXd(null_rows * metric_) : null_rows, dim_);
}

ImageDim ImageOracle::projected_dim(const IntVector& w, const MatrixXd& projector, const RankTest& test) const {
  const MatrixXd img = image(w);
  const MatrixXd projected = metric_.size() > 0 ? MatrixXd(projector * (metric_ * img)) : MatrixXd(projector * img);
  Eigen::JacobiSVD<MatrixXd> svd(projected);
  const auto& s = svd.singularValues();
  ImageDim out;
  if (s.size() == 0 || !(s(0) > test.abs_tol * scale_)) return out;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > test.rel_tol * s(0)) ++out.dim;
  if (out.dim == 1) {
    Eigen::Index best = 0;
    projected.colwise().norm().maxCoeff(&best);
    out.representative = img.col(best).normalized();
  }
  return out;
}

ImageDim projected_image_dim(const ScoreDifferenceStack& stack, const IntVector& w, const MatrixXd& null_of,
                             const MatrixXd& probes, const RankTest& test) {
  if (null_of.rows() >= stack.size() && stack.size() > 0)
    throw ArgumentError("projected_image_dim: null set must have fewer than n rows");
  ImageOracle oracle(stack, probes);
  return oracle.projected_dim(w, oracle.projector(null_of), test);
}

EnvironmentStats environment_stats(const MatrixXd& x) {
  return {x.colwise().mean().transpose(), sample_covariance(x), static_cast<long long>(x.rows())};
}

RecoveryState stage2_causal_order(const ImageOracle& oracle, int kappa, const RankTest& test, bool parallel_scan) {
  const auto n = static_cast<int>(oracle.basis_size());
  const Eigen::Index d = oracle.dim();
  RecoveryState state;
  state.encoder = MatrixXd::Zero(n, d);
  state.mix = IntMatrix::Zero(n, n);
  state.graph = Dag(n);
  const SearchBox box(n, kappa);
  for (int t = 0; t < n; ++t) {
    const MatrixXd projector = oracle.projector(state.encoder.topRows(t));
    const LatticePredicate accepts = [&](const IntVector& w) {
      return oracle.projected_dim(w, projector, test).dim == 1;
    };
    const auto hit = parallel_scan ? find_first_parallel(box, accepts) : find_first_serial(box, accepts);
    if (!hit)
      throw RecoveryFailure(2, "no aggregation vector with a one-dimensional projected image at step " +
                                   std::to_string(t + 1));
    state.encoder.row(t) = oracle.projected_dim(*hit, projector, test).representative.transpose();
    state.mix.col(t) = *hit;
    state.trace.push_back({2, t, -1, *hit, ""});
  }
  state.order.resize(n);
  std::iota(state.order.begin(), state.order.end(), 0);
  return state;
}

RecoveryState stage3_ancestors(RecoveryState state, const ImageOracle& oracle, const RankTest& test) {
  const auto n = static_cast<int>(state.mix.cols());
  const Eigen::Index d = state.encoder.cols();
  state.graph = Dag(n);
  for (int t = n - 2; t >= 0; --t) {
    for (int j = t + 1; j < n; ++j) {
      if (state.graph.has_edge(t, j)) continue;
      const auto children = state.graph.children(t);
      std::vector<int> keep;
      for (int i = 0; i < j; ++i)
        if (i != t && !std::binary_search(children.begin(), children.end(), i)) keep.push_back(i);
      MatrixXd rows(static_cast<Eigen::Index>(keep.size()), d);
      for (std::size_t k = 0; k < keep.size(); ++k) rows.row(static_cast<Eigen::Index>(k)) = state.encoder.row(keep[k]);
      const MatrixXd projector = oracle.projector(rows);

      const IntVector wt = state.mix.col(t);
      const IntVector wj = state.mix.col(j);
      const auto bound = static_cast<int>(std::max(wt.cwiseAbs().sum(), wj.cwiseAbs().sum()));
      bool is_parent = true;
      for (int beta = 1; beta <= bound && is_parent; ++beta) {
        for (int a = 0; a <= bound && is_parent; ++a) {
          for (int sign : {1, -1}) {
            if (a == 0 && sign < 0) continue;
            const IntVector w = (sign * a) * wt + beta * wj;
            const ImageDim r = oracle.projected_dim(w, projector, test);
            if (r.dim == 1) {
              state.encoder.row(j) = r.representative.transpose();
              state.mix.col(j) = w;
              state.trace.push_back({3, t, j, w, "aggregated"});
              is_parent = false;
              break;
            }
          }
        }
      }
      if (is_parent) {
        for (int u : state.graph.descendants(j)) state.graph.add_edge(t, u);
        state.graph.add_edge(t, j);
        state.trace.push_back({3, t, j, IntVector(), "edge"});
      }
    }
  }
  return state;
}

IndependenceTest zero_covariance_test(double tol) {
  return [tol](const MatrixXd& joint, long long) {
    const double vu = joint(0, 0);
    if (!(vu > 0.0)) return true;
    for (Eigen::Index k = 1; k < joint.rows(); ++k) {
      const double denom = std::sqrt(vu * joint(k, k));
      if (denom > 0.0 && std::abs(joint(0, k)) / denom > tol) return false;
    }
    return true;
  };
}

namespace {

struct Regression {
  VectorXd u;   // −Cov(t, A)·Cov(A)^{-1}
  VectorXd se;  // standard errors of u (zero for exact moments)
};

MatrixXd submatrix(const MatrixXd& c, const std::vector<int>& idx) {
  MatrixXd out(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) out(a, b) = c(idx[a], idx[b]);
  return out;
}

Regression regress(const MatrixXd& cov, int t, const std::vector<int>& anc, long long n_samples) {
  const MatrixXd caa = submatrix(cov, anc);
  VectorXd cta(anc.size());
  for (std::size_t k = 0; k < anc.size(); ++k) cta(k) = cov(t, anc[k]);
  const MatrixXd inv = caa.inverse();
  if (!inv.allFinite()) throw RecoveryFailure(4, "singular ancestor covariance");
  const VectorXd beta = inv * cta;
  Regression r{-beta, VectorXd::Zero(beta.size())};
  if (n_samples > 0) {
    const double dof = static_cast<double>(n_samples) - static_cast<double>(anc.size()) - 1.0;
    const double resid = std::max(0.0, cov(t, t) - cta.dot(beta));
    for (Eigen::Index k = 0; k < beta.size(); ++k) r.se(k) = std::sqrt(resid * inv(k, k) / std::max(1.0, dof));
  }
  return r;
}

}  // namespace

RecoveryState stage4_unmix(RecoveryState state, const std::vector<EnvironmentStats>& env_stats,
                           const UmniOptions& options, const IndependenceTest& indep) {
  const auto n = static_cast<int>(state.encoder.rows());
  if (env_stats.empty()) throw ArgumentError("stage4_unmix: no observational statistics");
  for (int t = 1; t < n; ++t) {
    const auto anc = state.graph.ancestors(t);
    if (anc.empty()) continue;
    const MatrixXd& h = state.encoder;
    const MatrixXd cov_obs = h * env_stats[0].cov * h.transpose();
    const Regression obs = regress(cov_obs, t, anc, env_stats[0].n_samples);

    bool accepted = false;
    for (int m = 0; m < n && !accepted; ++m) {
      if (state.mix(m, t) == 0) continue;
      const auto env = static_cast<std::size_t>(state.basis.empty() ? m : state.basis[m]) + 1;
      if (env >= env_stats.size()) throw ArgumentError("stage4_unmix: missing environment statistics");
      const EnvironmentStats& stats = env_stats[env];
      const MatrixXd cov = h * stats.cov * h.transpose();
      const Regression r = regress(cov, t, anc, stats.n_samples);

      VectorXd a = VectorXd::Unit(n, t);
      for (std::size_t k = 0; k < anc.size(); ++k) a(anc[k]) += r.u(static_cast<Eigen::Index>(k));
      MatrixXd joint(anc.size() + 1, anc.size() + 1);
      joint(0, 0) = a.dot(cov * a);
      for (std::size_t k = 0; k < anc.size(); ++k) {
        const double c = a.dot(cov.col(anc[k]));
        joint(0, k + 1) = joint(k + 1, 0) = c;
        for (std::size_t l = 0; l < anc.size(); ++l) joint(k + 1, l + 1) = cov(anc[k], anc[l]);
      }
      if (!indep(joint, stats.n_samples)) continue;

      bool differs = false;
      const bool exact = stats.n_samples == 0 || env_stats[0].n_samples == 0;
      const double scale = 1.0 + std::max(r.u.cwiseAbs().maxCoeff(), obs.u.cwiseAbs().maxCoeff());
      for (Eigen::Index k = 0; k < r.u.size(); ++k) {
        const double gap = std::abs(r.u(k) - obs.u(k));
        const double limit = exact ? options.exact_tol * scale
                                   : options.u_sigma * std::sqrt(r.se(k) * r.se(k) + obs.se(k) * obs.se(k));
        if (gap > limit) differs = true;
      }
      if (!differs) continue;

      for (std::size_t k = 0; k < anc.size(); ++k)
        state.encoder.row(t) += r.u(static_cast<Eigen::Index>(k)) * state.encoder.row(anc[k]);
      state.trace.push_back({4, t, static_cast<int>(env) - 1, IntVector(), "unmixed"});
      accepted = true;
    }
    if (!accepted)
      throw RecoveryFailure(4, "no environment separates node " + std::to_string(t + 1) + " from its ancestors");
  }
  return state;
}

double fisher_z_pvalue(double partial_corr, long long n_samples, int cond_size) {
  const double r = std::clamp(partial_corr, -1.0 + 1e-15, 1.0 - 1e-15);
  const double dof = static_cast<double>(n_samples) - cond_size - 3.0;
  if (dof <= 0.0) return 1.0;
  const double z = std::atanh(r) * std::sqrt(dof);
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

Dag stage4_prune_graph(RecoveryState& state, const EnvironmentStats& observational, double alpha_level,
                       double exact_tol) {
  const auto n = static_cast<int>(state.encoder.rows());
  const MatrixXd cov = state.encoder * observational.cov * state.encoder.transpose();
  Dag g = state.graph;
  for (int t = 0; t < n; ++t) {
    for (int j : g.children(t)) {
      std::vector<int> idx{t, j};
      for (int p : g.parents(j))
        if (p != t) idx.push_back(p);
      const auto cond = static_cast<int>(idx.size()) - 2;
      if (cond > 0) {
        const MatrixXd css = submatrix(cov, std::vector<int>(idx.begin() + 2, idx.end()));
        Eigen::JacobiSVD<MatrixXd> svd(css);
        const auto& s = svd.singularValues();
        if (!(s(s.size() - 1) > 1e-12 * s(0))) {
          state.warnings.push_back("prune: singular conditioning covariance for edge " + std::to_string(t) + "->" +
                                   std::to_string(j) + ", skipped");
          continue;
        }
      }
      const MatrixXd p = submatrix(cov, idx).inverse();
      const double rho = -p(0, 1) / std::sqrt(p(0, 0) * p(1, 1));
      const bool independent = observational.n_samples == 0
                                   ? std::abs(rho) < exact_tol
                                   : fisher_z_pvalue(rho, observational.n_samples, cond) >= alpha_level;
      if (independent) {
        g.remove_edge(t, j);
        state.trace.push_back({4, t, j, IntVector(), "pruned"});
      }
    }
  }
  state.graph = g;
  return g;
}

UmniResult recover(const std::vector<AffineScoreFn>& scores, const std::vector<EnvironmentStats>& env_stats,
                   const MatrixXd& probes, int n, const UmniOptions& options) {
  if (scores.size() < 2) throw ArgumentError("recover: need observational and interventional scores");
  std::vector<AffineScoreFn> diffs;
  for (std::size_t m = 1; m < scores.size(); ++m) diffs.push_back(score_difference(scores[m], scores[0]));

  BasisSelection basis;
  try {
    basis = select_basis(diffs, probes, n, options.basis_tol);
  } catch (const IdentifiabilityInputError& e) {
    throw RecoveryFailure(1, e.what());
  }
  const ImageOracle oracle(basis.stack, probes,
                           options.whiten ? covariance_sqrt(env_stats.front().cov, options.pinv_tol) : MatrixXd());
  const int kappa = options.kappa > 0 ? options.kappa : (n >= 2 ? kappa_bound(n) : 1);

  RecoveryState state = stage2_causal_order(oracle, kappa, options.rank, options.parallel_scan);
  state.basis = basis.indices;
  state = stage3_ancestors(std::move(state), oracle, options.rank);
  if (options.pipeline == Pipeline::hard) {
    state = stage4_unmix(std::move(state), env_stats, options, zero_covariance_test(options.indep_tol));
    stage4_prune_graph(state, env_stats.front(), options.ci_alpha, options.exact_tol);
  }
  if (!state.encoder.allFinite()) throw RecoveryFailure(options.pipeline == Pipeline::hard ? 4 : 3, "non-finite encoder");
  UmniResult out;
  out.graph = state.graph;
  out.encoder = state.encoder;
  out.state = std::move(state);
  return out;
}

MatrixXd covariance_sqrt(const MatrixXd& cov, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (cov + cov.transpose()));
  const VectorXd& lam = eig.eigenvalues();
  const double top = lam.size() > 0 ? lam.maxCoeff() : 0.0;
  VectorXd root = VectorXd::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) > rel_tol * top) root(i) = std::sqrt(lam(i));
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

UmniResult run_umni(const std::vector<MatrixXd>& env_x, const UmniOptions& options) {
  if (env_x.size() < 2) throw ArgumentError("run_umni: need observational and interventional samples");
  const Eigen::Index d = env_x.front().cols();
  std::vector<EnvironmentStats> stats;
  std::vector<AffineScoreFn> scores;
  for (const auto& x : env_x) {
    if (x.cols() != d) throw ArgumentError("run_umni: environments disagree on the observed dimension");
    stats.push_back(environment_stats(x));
    scores.push_back(gaussian_score(stats.back().mean, stats.back().cov, options.pinv_tol));
  }
  const int n = numerical_rank(stats.front().cov, options.pinv_tol);
  if (n < 1) throw ArgumentError("run_umni: observational covariance is zero");
  const Eigen::Index k = std::min<Eigen::Index>(env_x.front().rows(), options.probes_per_dim * n);
  const MatrixXd probes = env_x.front().topRows(k);
  UmniResult out = recover(scores, stats, probes, n, options);
  out.latents = env_x.front() * out.encoder.transpose();
  return out;
}

}  // namespace umni
