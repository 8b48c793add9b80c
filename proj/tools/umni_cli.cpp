// umni: batch experiments, single traced trials, and the theory utilities.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>

#include "CLI11.hpp"
#include "umni/errors.hpp"
#include "umni/graph.hpp"
#include "umni/harness.hpp"
#include "umni/io.hpp"
#include "umni/theory.hpp"

using namespace umni;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs, n, d, n_graphs;
  std::optional<long long> n_samples;
  std::optional<double> density, rank_tau, rank_abs, basis_tol, threshold, ci_alpha;
  std::optional<std::string> kind, score_mode, alignment;
  bool raw_rows = false;
  bool no_whiten = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output prefix");
  cmd->add_option("--jobs", o.jobs, "worker threads (0 = all)");
  cmd->add_option("--n", o.n, "latent nodes");
  cmd->add_option("--d", o.d, "observed dimension");
  cmd->add_option("--n-samples", o.n_samples, "samples per environment");
  cmd->add_option("--n-graphs", o.n_graphs, "trials per batch");
  cmd->add_option("--density", o.density, "edge probability");
  cmd->add_option("--kind", o.kind, "soft | hard");
  cmd->add_option("--score-mode", o.score_mode, "oracle | estimated");
  cmd->add_option("--rank-tau", o.rank_tau, "relative rank threshold");
  cmd->add_option("--rank-abs", o.rank_abs, "absolute rank floor");
  cmd->add_option("--basis-tol", o.basis_tol, "basis selection threshold");
  cmd->add_option("--threshold", o.threshold, "mixing threshold");
  cmd->add_option("--ci-alpha", o.ci_alpha, "pruning test level");
  cmd->add_option("--alignment", o.alignment, "peeling | hungarian");
  cmd->add_flag("--raw-rows", o.raw_rows, "threshold mixing entries without row normalization");
  cmd->add_flag("--no-whiten", o.no_whiten, "measure image dimensions in raw observed coordinates");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.n) c.n = *o.n;
  if (o.d) c.d = *o.d;
  if (o.n_samples) c.n_samples = *o.n_samples;
  if (o.n_graphs) c.n_graphs = *o.n_graphs;
  if (o.density) c.density = *o.density;
  if (o.kind) c.kind = intervention_kind_from_string(*o.kind);
  if (o.score_mode) c.score_mode = score_mode_from_string(*o.score_mode);
  if (o.rank_tau) c.rank_tau = *o.rank_tau;
  if (o.rank_abs) c.rank_abs = *o.rank_abs;
  if (o.basis_tol) c.basis_tol = *o.basis_tol;
  if (o.threshold) c.mixing_threshold = *o.threshold;
  if (o.ci_alpha) c.ci_alpha = *o.ci_alpha;
  if (o.alignment) {
    if (*o.alignment == "peeling") c.alignment = AlignmentRule::peeling;
    else if (*o.alignment == "hungarian") c.alignment = AlignmentRule::hungarian;
    else throw ArgumentError("unknown alignment '" + *o.alignment + "'");
  }
  if (o.raw_rows) c.normalize_rows = false;
  if (o.no_whiten) c.whiten = false;
  c.validate();
  return c;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ArgumentError("cannot write '" + path + "'");
  return f;
}

void print_summary(const ExperimentConfig& c, const BatchSummary& s) {
  std::cout << to_string(c.kind) << " " << to_string(c.score_mode) << " n=" << c.n << " d=" << c.d
            << " n_s=" << c.n_samples << ": ok " << s.n_ok << ", failed " << s.n_failed << ", mean SHD "
            << std::setprecision(4) << s.mean_shd << ", mean mixing ratio " << s.mean_ratio << " (" << s.ratio_count
            << " trials)\n";
}

int cmd_run(const Overrides& o) {
  const ExperimentConfig c = resolve(o);
  const BatchResult r = run_batch(c);
  if (!c.out.empty()) {
    auto trials = open_out(c.out + "_trials.csv");
    write_trials_csv(trials, c, r.trials);
    auto summary = open_out(c.out + "_summary.csv");
    write_summary_csv(summary, c, r.summary);
  }
  print_summary(c, r.summary);
  return 0;
}

int cmd_trial(const Overrides& o, int index, const std::string& trace_path, const std::string& model_path) {
  const ExperimentConfig c = resolve(o);
  const std::uint64_t seed = trial_seed(c.seed, static_cast<std::uint64_t>(index));
  const TrialInstance inst = make_instance(c, seed);
  const TrialResult r = run_trial(c, seed, index, true);

  std::cout << "trial " << index << " seed " << seed << "\n";
  std::cout << "true edges:\n" << to_edge_list(inst.dag);
  if (!r.ok) {
    std::cout << "FAILED (stage " << r.failed_stage << "): " << r.error << "\n";
  } else {
    const auto& rec = *r.recovery;
    std::cout << "estimated edges:\n" << to_edge_list(rec.graph);
    std::cout << "basis environments:";
    for (int b : rec.state.basis) std::cout << ' ' << b;
    std::cout << "\nW =\n" << rec.state.mix << "\n";
    std::cout << "alignment:";
    for (int p : r.report->alignment) std::cout << ' ' << p;
    std::cout << "\naligned mixing =\n" << std::setprecision(4) << r.report->mixing << "\n";
    std::cout << "shd " << r.shd_value << ", mixing ratio ";
    if (r.mixing_ratio) std::cout << *r.mixing_ratio; else std::cout << "n/a";
    std::cout << "\n";
    for (const auto& w : rec.state.warnings) std::cout << "warning: " << w << "\n";
    if (!trace_path.empty()) open_out(trace_path) << trace_to_json(rec.state) << "\n";
  }
  if (!model_path.empty()) open_out(model_path) << model_to_json({inst.sem, inst.environments, inst.model}) << "\n";
  if (!c.out.empty()) {
    auto f = open_out(c.out + "_trials.csv");
    write_trials_csv(f, c, {r});
  }
  return r.ok ? 0 : 2;
}

int cmd_oracle_check(const Overrides& o, int count) {
  ExperimentConfig base = resolve(o);
  base.score_mode = ScoreMode::oracle;
  int failures = 0;
  for (auto kind : {InterventionKind::soft, InterventionKind::hard}) {
    int bad = 0;
    for (int i = 0; i < count; ++i) {
      ExperimentConfig c = base;
      c.kind = kind;
      c.n = 2 + i % 4;
      c.d = c.n + 1;
      const TrialResult r = run_trial(c, trial_seed(base.seed, static_cast<std::uint64_t>(i)), i);
      const bool pass = r.ok && r.shd_value == 0 && r.mixing_ratio.value_or(0.0) == 0.0;
      if (!pass) {
        ++bad;
        std::cout << "  " << to_string(kind) << " instance " << i << " (n=" << c.n << "): "
                  << (r.ok ? "shd " + std::to_string(r.shd_value) : r.error) << "\n";
      }
    }
    std::cout << to_string(kind) << ": " << count - bad << "/" << count << " exact\n";
    failures += bad;
  }
  return failures == 0 ? 0 : 1;
}

int cmd_counterexample(const std::vector<double>& vbar, const std::string& out) {
  const CounterexamplePair p = build_counterexample(vbar[0], vbar[1], vbar[2], vbar[3]);
  std::cout << std::setprecision(10);
  std::cout << "transform B: a=" << p.a << " b=" << p.b << " c=" << p.c << " d=" << p.d << "\n";
  std::cout << "model A variances: V1=" << p.v1 << " V1*=" << p.v1_star << " V2=" << p.v2 << " V2*=" << p.v2_star
            << "\n";
  for (int k = 0; k < 2; ++k) {
    const double gap = (p.observed_covariance_a(k) - p.observed_covariance_b(k)).cwiseAbs().maxCoeff();
    std::cout << "environment " << k + 1 << ": max covariance gap " << gap << "\n";
  }
  if (!out.empty()) {
    open_out(out + "_a.json") << model_to_json({p.model_a(), p.environments_a(), p.transform_a()}) << "\n";
    open_out(out + "_b.json") << model_to_json({p.model_b(), p.environments_b(), p.transform_b()}) << "\n";
  }
  return 0;
}

int cmd_kappa(int max_n, int brute_n) {
  std::cout << "n,kappa_bound,brute_force\n";
  for (int n = 2; n <= max_n; ++n) {
    std::cout << n << ',' << kappa_bound(n) << ',';
    if (n <= brute_n) std::cout << max_binary_determinant(n - 1);
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interventional causal representation learning experiments"};
  app.require_subcommand(1);

  Overrides run_o, trial_o, check_o;
  auto* run = app.add_subcommand("run", "run a batch and write per-trial and summary CSV");
  add_common(run, run_o);

  auto* trial = app.add_subcommand("trial", "run one trial with a verbose trace");
  add_common(trial, trial_o);
  int index = 0;
  std::string trace_path, model_path;
  trial->add_option("--index", index, "trial index within the batch");
  trial->add_option("--trace", trace_path, "write the recovery trace as JSON");
  trial->add_option("--dump-model", model_path, "write the generated model as JSON");

  auto* check = app.add_subcommand("oracle-check", "exact recovery with analytic scores on random instances");
  add_common(check, check_o);
  int count = 50;
  check->add_option("--count", count, "instances per intervention kind");

  auto* cex = app.add_subcommand("counterexample", "two-node pair indistinguishable from hard interventions");
  std::vector<double> vbar{1.0, 2.0, 1.0, 0.25};
  std::string cex_out;
  cex->add_option("--vbar", vbar, "V1 V1* V2 V2* of the empty-graph model")->expected(4);
  cex->add_option("--out", cex_out, "prefix for the two model JSON files");

  auto* kap = app.add_subcommand("kappa", "lattice bound table");
  int max_n = 8, brute_n = 6;
  kap->add_option("--max-n", max_n, "largest n");
  kap->add_option("--brute", brute_n, "verify by enumeration up to this n (at most 7)")->check(CLI::Range(1, 7));

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_o);
    if (*trial) return cmd_trial(trial_o, index, trace_path, model_path);
    if (*check) return cmd_oracle_check(check_o, count);
    if (*cex) return cmd_counterexample(vbar, cex_out);
    if (*kap) return cmd_kappa(max_n, brute_n);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
