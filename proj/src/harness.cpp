#include "umni/harness.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "json.hpp"
#include "umni/errors.hpp"
#include "umni/score.hpp"

namespace umni {

const char* to_string(ScoreMode m) { return m == ScoreMode::oracle ? "oracle" : "estimated"; }

ScoreMode score_mode_from_string(const std::string& s) {
  if (s == "oracle") return ScoreMode::oracle;
  if (s == "estimated") return ScoreMode::estimated;
  throw ArgumentError("unknown score mode '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ArgumentError("config: n must be positive");
  if (d < n) throw ArgumentError("config: d must be at least n");
  if (n_graphs < 1) throw ArgumentError("config: n_graphs must be positive");
  if (density < 0.0 || density > 1.0) throw ArgumentError("config: density must lie in [0, 1]");
  if (kind == InterventionKind::observational) throw ArgumentError("config: intervention kind must be soft or hard");
  if (score_mode == ScoreMode::estimated && n_samples < 2)
    throw ArgumentError("config: estimated scores need at least two samples");
  if (rank_tau < 0 || rank_abs < 0 || basis_tol < 0) throw ArgumentError("config: tolerances must be non-negative");
  if (!(mixing_threshold > 0) || !(ci_alpha > 0 && ci_alpha < 1))
    throw ArgumentError("config: mixing threshold and CI alpha must be positive");
  if (jobs < 0) throw ArgumentError("config: jobs must be non-negative");
}

UmniOptions ExperimentConfig::umni_options() const {
  const Pipeline p = kind == InterventionKind::hard ? Pipeline::hard : Pipeline::soft;
  UmniOptions o = score_mode == ScoreMode::oracle ? UmniOptions::oracle(p) : UmniOptions::estimated(p);
  if (rank_tau > 0) o.rank.rel_tol = rank_tau;
  if (rank_abs > 0) o.rank.abs_tol = rank_abs;
  if (basis_tol > 0) o.basis_tol = basis_tol;
  o.ci_alpha = ci_alpha;
  o.whiten = whiten;
  return o;
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index) { return mix_seed(master_seed + index); }

namespace {

enum Stream : std::uint64_t { kGraph = 1, kSem, kTransform, kTargets, kSamples };

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub = 0) {
  return mix_seed(seed ^ mix_seed(stream * 0x100000001b3ULL + sub));
}

EnvironmentStats exact_stats(const LinearGaussianSem& sem, const EnvironmentSpec& spec, const ObservationModel& m) {
  const MatrixXd& g = m.transform();
  return {g * analytic_latent_mean(sem, spec), g * analytic_latent_covariance(sem, spec) * g.transpose(), 0};
}

}  // namespace

TrialInstance make_instance(const ExperimentConfig& config, std::uint64_t seed) {
  Dag dag = random_dag(config.n, config.density, stream_seed(seed, kGraph));
  LinearGaussianSem sem = random_sem(dag, stream_seed(seed, kSem));
  ObservationModel model = random_transform(config.d, config.n, stream_seed(seed, kTransform));
  auto envs = random_interventions(config.n, config.kind, sem, stream_seed(seed, kTargets));
  return {std::move(dag), std::move(sem), std::move(model), std::move(envs)};
}

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t seed, int trial_index, bool keep_recovery) {
  config.validate();
  TrialResult r;
  r.trial = trial_index;
  r.seed = seed;
  try {
    const TrialInstance inst = make_instance(config, seed);
    r.true_edges = static_cast<int>(inst.dag.edge_count());
    const UmniOptions options = config.umni_options();
    const int n = config.n;

    std::vector<EnvironmentSpec> all{EnvironmentSpec::observational()};
    all.insert(all.end(), inst.environments.begin(), inst.environments.end());

    std::vector<EnvironmentStats> stats;
    std::vector<AffineScoreFn> scores;
    MatrixXd probes;
    int n_hat = n;
    if (config.score_mode == ScoreMode::oracle) {
      for (const auto& spec : all) {
        stats.push_back(exact_stats(inst.sem, spec, inst.model));
        scores.push_back(analytic_observed_score(inst.sem, spec, inst.model));
      }
      const Eigen::Index k = static_cast<Eigen::Index>(options.probes_per_dim) * n;
      probes = mix(inst.model, sample_latent(inst.sem, all[0], k, stream_seed(seed, kSamples, 0)));
    } else {
      for (std::size_t e = 0; e < all.size(); ++e) {
        const MatrixXd x = mix(inst.model, sample_latent(inst.sem, all[e], config.n_samples,
                                                         stream_seed(seed, kSamples, e)));
        stats.push_back(environment_stats(x));
        scores.push_back(gaussian_score(stats.back().mean, stats.back().cov, options.pinv_tol));
        if (e == 0) {
          n_hat = numerical_rank(stats.front().cov, options.pinv_tol);
          probes = x.topRows(std::min<Eigen::Index>(x.rows(), static_cast<Eigen::Index>(options.probes_per_dim) * n_hat));
        }
      }
      if (n_hat != n) throw RecoveryFailure(1, "observational covariance rank " + std::to_string(n_hat) + " != n");
    }

    UmniResult rec = recover(scores, stats, probes, n_hat, options);
    const Pipeline pipeline = options.pipeline;
    EvaluationOptions eopt{config.mixing_threshold, config.normalize_rows, config.alignment};
    EvaluationReport rep = evaluate(rec.graph, rec.encoder * inst.model.transform(), inst.dag, pipeline, eopt);
    r.ok = true;
    r.shd_value = rep.shd_value;
    r.mixing_ratio = rep.mixing_ratio;
    r.estimated_edges = static_cast<int>(rec.graph.edge_count());
    r.report = std::move(rep);
    if (keep_recovery) r.recovery = std::move(rec);
  } catch (const RecoveryFailure& e) {
    r.failed_stage = e.stage();
    r.error = e.what();
  } catch (const AlignmentError& e) {
    r.failed_stage = 5;
    r.error = e.what();
  } catch (const GenerationError& e) {
    r.error = e.what();
  }
  return r;
}

BatchSummary summarize(const std::vector<TrialResult>& trials) {
  BatchSummary s;
  double shd_sum = 0.0, ratio_sum = 0.0;
  for (const auto& t : trials) {
    if (!t.ok) {
      ++s.n_failed;
      continue;
    }
    ++s.n_ok;
    shd_sum += t.shd_value;
    if (t.mixing_ratio) {
      ratio_sum += *t.mixing_ratio;
      ++s.ratio_count;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.mean_shd = s.n_ok > 0 ? shd_sum / s.n_ok : nan;
  s.mean_ratio = s.ratio_count > 0 ? ratio_sum / s.ratio_count : nan;
  return s;
}

BatchResult run_batch(const ExperimentConfig& config) {
  config.validate();
  BatchResult out;
  out.trials.resize(static_cast<std::size_t>(config.n_graphs));
  const int threads = config.jobs > 0 ? config.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int i = 0; i < config.n_graphs; ++i)
    out.trials[static_cast<std::size_t>(i)] = run_trial(config, trial_seed(config.seed, static_cast<std::uint64_t>(i)), i);
  out.summary = summarize(out.trials);
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' ? ' ' : c);
  }
  return out + "\"";
}

std::string config_columns(const ExperimentConfig& c) {
  std::ostringstream os;
  os << c.n << ',' << c.d << ',' << c.n_samples << ',' << to_string(c.kind) << ',' << to_string(c.score_mode);
  return os.str();
}

}  // namespace

std::string trial_csv_header() {
  return "trial,seed,n,d,n_samples,kind,score_mode,ok,failed_stage,shd,mixing_ratio,true_edges,estimated_edges,error";
}

std::string trial_csv_row(const ExperimentConfig& config, const TrialResult& r) {
  std::ostringstream os;
  os << r.trial << ',' << r.seed << ',' << config_columns(config) << ',' << (r.ok ? 1 : 0) << ',' << r.failed_stage
     << ',';
  if (r.ok) os << r.shd_value;
  os << ',';
  if (r.ok && r.mixing_ratio) os << fmt(*r.mixing_ratio);
  os << ',' << r.true_edges << ',';
  if (r.ok) os << r.estimated_edges;
  os << ',' << quote(r.error);
  return os.str();
}

void write_trials_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<TrialResult>& trials) {
  os << kTrialCsvVersion << '\n' << trial_csv_header() << '\n';
  for (const auto& r : trials) os << trial_csv_row(config, r) << '\n';
}

std::string summary_csv_header() {
  return "n,d,n_samples,kind,score_mode,n_graphs,seed,n_ok,n_failed,mean_shd,mean_ratio,ratio_count";
}

std::string summary_csv_row(const ExperimentConfig& config, const BatchSummary& s) {
  std::ostringstream os;
  os << config_columns(config) << ',' << config.n_graphs << ',' << config.seed << ',' << s.n_ok << ',' << s.n_failed
     << ',' << fmt(s.mean_shd) << ',' << fmt(s.mean_ratio) << ',' << s.ratio_count;
  return os.str();
}

void write_summary_csv(std::ostream& os, const ExperimentConfig& config, const BatchSummary& s) {
  os << kSummaryCsvVersion << '\n' << summary_csv_header() << '\n' << summary_csv_row(config, s) << '\n';
}

using nlohmann::json;

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ArgumentError("config: top level must be an object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n") c.n = v.get<int>();
      else if (key == "d") c.d = v.get<int>();
      else if (key == "n_samples") c.n_samples = v.get<long long>();
      else if (key == "n_graphs") c.n_graphs = v.get<int>();
      else if (key == "density") c.density = v.get<double>();
      else if (key == "intervention_kind") c.kind = intervention_kind_from_string(v.get<std::string>());
      else if (key == "score_mode") c.score_mode = score_mode_from_string(v.get<std::string>());
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "rank_tau") c.rank_tau = v.get<double>();
      else if (key == "rank_abs") c.rank_abs = v.get<double>();
      else if (key == "basis_tol") c.basis_tol = v.get<double>();
      else if (key == "mixing_threshold") c.mixing_threshold = v.get<double>();
      else if (key == "ci_alpha") c.ci_alpha = v.get<double>();
      else if (key == "normalize_rows") c.normalize_rows = v.get<bool>();
      else if (key == "whiten") c.whiten = v.get<bool>();
      else if (key == "alignment") {
        const auto s = v.get<std::string>();
        if (s == "peeling") c.alignment = AlignmentRule::peeling;
        else if (s == "hungarian") c.alignment = AlignmentRule::hungarian;
        else throw ArgumentError("config: unknown alignment '" + s + "'");
      } else if (key == "jobs") c.jobs = v.get<int>();
      else if (key == "out") c.out = v.get<std::string>();
      else throw ArgumentError("config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j{{"n", c.n},
         {"d", c.d},
         {"n_samples", c.n_samples},
         {"n_graphs", c.n_graphs},
         {"density", c.density},
         {"intervention_kind", to_string(c.kind)},
         {"score_mode", to_string(c.score_mode)},
         {"seed", c.seed},
         {"rank_tau", c.rank_tau},
         {"rank_abs", c.rank_abs},
         {"basis_tol", c.basis_tol},
         {"mixing_threshold", c.mixing_threshold},
         {"ci_alpha", c.ci_alpha},
         {"normalize_rows", c.normalize_rows},
         {"whiten", c.whiten},
         {"alignment", c.alignment == AlignmentRule::peeling ? "peeling" : "hungarian"},
         {"jobs", c.jobs},
         {"out", c.out}};
  return j.dump(2);
}

}  // namespace umni
