#include "qsl/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "qsl/cmx_io.hpp"
#include "qsl/reconstruct.hpp"
#include "qsl/reshape.hpp"
#include "qsl/superop.hpp"

namespace qsl {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";
const double kNaN = std::numeric_limits<double>::quiet_NaN();

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
double number_from(const Json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

std::string to_string(TaskKind t) {
  switch (t) {
    case TaskKind::channel: return "channel";
    case TaskKind::lindbladian: return "lindbladian";
    case TaskKind::haar: return "haar";
  }
  return "channel";
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::als_n2: return "als_n2";
    case Strategy::als_p: return "als_p";
    case Strategy::als_n: return "als_n";
    case Strategy::als_i: return "als_i";
  }
  return "als_n";
}

TaskKind parse_task(const std::string& s) {
  if (s == "channel") return TaskKind::channel;
  if (s == "lindbladian") return TaskKind::lindbladian;
  if (s == "haar") return TaskKind::haar;
  throw ConfigError("unknown task '" + s + "' (expected channel, lindbladian or haar)");
}

Strategy parse_strategy(const std::string& s) {
  if (s == "als_n2") return Strategy::als_n2;
  if (s == "als_p") return Strategy::als_p;
  if (s == "als_n") return Strategy::als_n;
  if (s == "als_i") return Strategy::als_i;
  throw ConfigError("unknown strategy '" + s + "' (expected als_n2, als_p, als_n or als_i)");
}

Index ExperimentConfig::truth_rank() const {
  switch (task) {
    case TaskKind::channel: return kraus_rank;
    case TaskKind::lindbladian: return n_jumps + 2;
    case TaskKind::haar: return r_plus + r_minus;
  }
  return kraus_rank;
}

void ExperimentConfig::validate() const {
  if (n < 2) throw ConfigError("n must be at least 2");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (sweep.empty()) throw ConfigError("sweep must list at least one measurement count");
  for (Index m : sweep)
    if (m < 1) throw ConfigError("sweep values must be positive");
  if (!(sigma >= 0)) throw ConfigError("sigma must be nonnegative");
  if (!(recovery_threshold > 0)) throw ConfigError("recovery_threshold must be positive");
  if (!(subset_ratio > 0 && subset_ratio <= 1)) throw ConfigError("subset_ratio must lie in (0, 1]");
  if (!(observable_norm > 0)) throw ConfigError("observable_norm must be positive");
  switch (task) {
    case TaskKind::channel:
      if (kraus_rank < 1 || kraus_rank > n * n) throw ConfigError("kraus_rank must lie in [1, n^2]");
      break;
    case TaskKind::lindbladian:
      if (n_jumps < 1) throw ConfigError("n_jumps must be at least 1");
      break;
    case TaskKind::haar:
      if (r_plus < 0 || r_minus < 0 || r_plus + r_minus < 1 || r_plus + r_minus > n * n)
        throw ConfigError("r_plus + r_minus must lie in [1, n^2]");
      break;
  }
  if (strategy == Strategy::als_n2 && design != DesignKind::random_pairs)
    throw ConfigError("strategy als_n2 requires the random_pairs design");
  if (strategy != Strategy::als_n2 && design != DesignKind::blockwise)
    throw ConfigError("strategy " + to_string(strategy) + " requires the blockwise design");
  if (design == DesignKind::blockwise) {
    if (row < 0 || row >= n) throw ConfigError("row_index must lie in [1, n]");
    if (truth_rank() > n)
      throw ConfigError("blockwise strategies need rank <= n (rank " + std::to_string(truth_rank()) + ", n " +
                        std::to_string(n) + ")");
  }
  if (truth_rank() > n * n) throw ConfigError("rank exceeds n^2");
  SolverConfig s = solver;
  s.rank = truth_rank();
  s.validate();
}

double relative_frobenius_error(const ComplexMatrix& estimate, const ComplexMatrix& truth) {
  detail::require(estimate.rows() == truth.rows() && estimate.cols() == truth.cols(),
                  "relative_frobenius_error: shape mismatch");
  const double denom = truth.norm();
  if (denom == 0) throw NumericalError("relative_frobenius_error: truth has zero norm");
  return (estimate - truth).norm() / denom;
}

double relative_frobenius_error(const ReshapedMatrix& estimate, const ReshapedMatrix& truth) {
  return relative_frobenius_error(estimate.matrix, truth.matrix);
}

double recovery_rate(const std::vector<double>& errors, double threshold) {
  if (errors.empty()) throw ConfigError("recovery_rate: empty error list");
  if (!(threshold > 0)) throw ConfigError("recovery_rate: threshold must be positive");
  std::size_t hits = 0;
  for (double e : errors)
    if (e < threshold) ++hits;  // false for NaN
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

std::uint64_t trial_seed(std::uint64_t master, Index point, Index trial, SeedStream stream) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(point)), static_cast<std::uint64_t>(trial),
                     static_cast<std::uint64_t>(stream));
}

Superoperator make_ground_truth(const ExperimentConfig& c, std::uint64_t seed) {
  switch (c.task) {
    case TaskKind::channel: return random_channel(c.n, c.kraus_rank, seed);
    case TaskKind::lindbladian: return lindblad_canonical(random_lindbladian(c.n, c.n_jumps, seed));
    case TaskKind::haar: return signed_kraus_from_reshaped(haar_low_rank_hermitian(c.n, c.r_plus, c.r_minus, seed));
  }
  throw ConfigError("unknown task");
}

TrialRecord run_trial(const ExperimentConfig& c, Index point, Index trial) {
  using Clock = std::chrono::steady_clock;
  const Index m = c.sweep.at(static_cast<std::size_t>(point));
  TrialRecord rec;
  rec.trial = trial;
  rec.m = m;
  Clock::time_point t0;
  try {
    const Superoperator s = make_ground_truth(c, trial_seed(c.master_seed, point, trial, SeedStream::truth));
    const ReshapedMatrix truth = choi_reshape(s);
    SolverConfig sc = c.solver;
    sc.rank = c.truth_rank();
    sc.seed = trial_seed(c.master_seed, point, trial, SeedStream::solver);
    const std::uint64_t design_seed = trial_seed(c.master_seed, point, trial, SeedStream::design);
    const std::uint64_t noise_seed = trial_seed(c.master_seed, point, trial, SeedStream::noise);

    ComplexMatrix estimate;
    if (c.design == DesignKind::random_pairs) {
      const SensingDesign d = build_random_design(c.n, m, c.source, design_seed, c.observable_norm);
      const MeasurementSet ms = simulate_measurements(s, d, c.sigma, c.noise_mode, noise_seed);
      const DenseSensing op = random_pair_sensing(d);
      t0 = Clock::now();
      const SolveReport rep = nesterov_als_solve(op, ms.values.cast<Complex>(), sc);
      estimate = rep.factors.product();
      rec.iterations = rep.iterations;
      rec.restarts = rep.restarts;
    } else {
      const SensingDesign d = build_blockwise_design(c.n, m, c.source, c.row, design_seed, c.observable_norm);
      const MeasurementSet ms = simulate_measurements(s, d, c.sigma, c.noise_mode, noise_seed);
      t0 = Clock::now();
      FirstRowEstimate row;
      switch (c.strategy) {
        case Strategy::als_p: row = solve_first_row_parallel(d.observables, ms.blocks, c.n, sc); break;
        case Strategy::als_n: row = solve_first_row_joint(d.observables, ms.blocks, c.n, sc); break;
        case Strategy::als_i:
          row = solve_first_row_subset(d.observables, ms.blocks, c.n, c.subset_ratio, sc, c.row);
          break;
        case Strategy::als_n2: throw ConfigError("als_n2 requires the random_pairs design");
      }
      ReconstructOptions ro;
      ro.rtol = c.reconstruct_rtol;
      ro.anchor = c.row;
      ro.hermitize = c.hermitize;
      ro.rsvd_seed = trial_seed(c.master_seed, point, trial, SeedStream::rsvd);
      estimate = reconstruct_full(row.blocks, sc.rank, ro).matrix;
      rec.iterations = row.iterations;
      rec.restarts = row.restarts;
    }
    if (c.record_timing) rec.time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    rec.error = relative_frobenius_error(estimate, truth.matrix);
    if (!std::isfinite(rec.error)) throw NumericalError("non-finite reconstruction error");
    rec.recovered = rec.error < c.recovery_threshold;
  } catch (const NumericalError& e) {
    rec.failed = true;
    rec.failure = e.what();
    rec.error = kNaN;
    rec.recovered = false;
  }
  return rec;
}

PointResult aggregate(Index m, std::vector<TrialRecord> trials, double threshold) {
  PointResult p;
  p.m = m;
  p.trials = std::move(trials);
  std::vector<double> errors, ok_errors, times;
  for (const auto& t : p.trials) {
    errors.push_back(t.error);
    if (t.failed) {
      ++p.failures;
    } else {
      ok_errors.push_back(t.error);
      times.push_back(t.time_s);
    }
  }
  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    if (v.empty()) {
      mean = sd = kNaN;
      return;
    }
    double s = 0;
    for (double x : v) s += x;
    mean = s / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  };
  mean_std(ok_errors, p.mean_error, p.std_error);
  mean_std(times, p.mean_time, p.std_time);
  p.recovery_rate = p.trials.empty() ? 0.0 : recovery_rate(errors, threshold);
  return p;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult r;
  r.config = c;
  r.manifest = manifest_json(c);
  r.manifest_hash = sha256_hex(dump_json(r.manifest));
  for (std::size_t p = 0; p < c.sweep.size(); ++p) {
    std::vector<TrialRecord> trials;
    for (Index t = 0; t < c.trials; ++t) trials.push_back(run_trial(c, static_cast<Index>(p), t));
    r.points.push_back(aggregate(c.sweep[p], std::move(trials), c.recovery_threshold));
  }
  return r;
}

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  j["task"] = to_string(c.task);
  j["n"] = c.n;
  j["kraus_rank"] = c.kraus_rank;
  j["n_jumps"] = c.n_jumps;
  j["r_plus"] = c.r_plus;
  j["r_minus"] = c.r_minus;
  j["design"] = to_string(c.design);
  j["source"] = to_string(c.source);
  j["observable_norm"] = c.observable_norm;
  j["row_index"] = c.row + 1;
  j["sweep"] = c.sweep;
  j["sigma"] = c.sigma;
  j["noise_mode"] = to_string(c.noise_mode);
  j["strategy"] = to_string(c.strategy);
  j["subset_ratio"] = c.subset_ratio;
  j["trials"] = c.trials;
  j["solver"] = solver_config_json(c.solver);
  j["solver"].erase("rank");
  j["solver"].erase("seed");
  j["reconstruct_rtol"] = c.reconstruct_rtol;
  j["hermitize"] = c.hermitize;
  j["recovery_threshold"] = c.recovery_threshold;
  j["record_timing"] = c.record_timing;
  j["master_seed"] = c.master_seed;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const std::vector<std::string> known = {
      "name",   "task",      "n",          "kraus_rank", "n_jumps",         "r_plus",      "r_minus",
      "design", "source",    "observable_norm", "row_index", "sweep",       "sigma",       "noise_mode",
      "strategy", "subset_ratio", "trials", "solver",     "reconstruct_rtol", "hermitize", "recovery_threshold",
      "record_timing", "master_seed"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("experiment config: unknown field '" + key + "'");
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());
    c.n = j.value("n", c.n);
    c.kraus_rank = j.value("kraus_rank", c.kraus_rank);
    c.n_jumps = j.value("n_jumps", c.n_jumps);
    c.r_plus = j.value("r_plus", c.r_plus);
    c.r_minus = j.value("r_minus", c.r_minus);
    if (j.contains("design")) c.design = parse_design_kind(j.at("design").get<std::string>());
    if (j.contains("source")) c.source = parse_source(j.at("source").get<std::string>());
    c.observable_norm = j.value("observable_norm", c.observable_norm);
    c.row = j.value("row_index", c.row + 1) - 1;
    if (j.contains("sweep")) {
      if (j.at("sweep").is_array())
        c.sweep = j.at("sweep").get<std::vector<Index>>();
      else
        c.sweep = {j.at("sweep").get<Index>()};
    }
    c.sigma = j.value("sigma", c.sigma);
    if (j.contains("noise_mode")) c.noise_mode = parse_noise_mode(j.at("noise_mode").get<std::string>());
    if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy").get<std::string>());
    c.subset_ratio = j.value("subset_ratio", c.subset_ratio);
    c.trials = j.value("trials", c.trials);
    if (j.contains("solver")) c.solver = solver_config_from_json(j.at("solver"), c.solver);
    c.reconstruct_rtol = j.value("reconstruct_rtol", c.reconstruct_rtol);
    c.hermitize = j.value("hermitize", c.hermitize);
    c.recovery_threshold = j.value("recovery_threshold", c.recovery_threshold);
    c.record_timing = j.value("record_timing", c.record_timing);
    c.master_seed = j.value("master_seed", c.master_seed);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

Json manifest_json(const ExperimentConfig& c) {
  Json m;
  m["config"] = config_json(c);
  m["solver_rank"] = c.truth_rank();
  m["library_version"] = kVersion;
  m["conventions"] = {
      {"seed_derivation", "splitmix64(master, point, trial, stream); streams truth=0 design=1 noise=2 solver=3 rsvd=4"},
      {"solver", c.strategy == Strategy::als_p ? "nesterov_als per block" : "nesterov_als"},
      {"nesterov_second_iterate", "one plain sweep from the random start"},
      {"nesterov_extrapolation", "factor-wise"},
      {"restart_exit_check", "skipped on restart iterations"},
      {"initialization", "iid standard complex Gaussian factors"},
      {"divergence_guard", "loss > 1e6 x initial loss or non-finite"},
      {"blockwise_states", "four unit-trace pure states, coefficients (1, i, -(1+i)/2, -(1+i)/2)"},
      {"complex_noise", to_string(c.noise_mode)},
      {"reconstruction_lower_blocks", "K_k1 = K_1k^dagger"},
      {"reconstruct_anchor_row", "U S J^dagger"},
      {"loss_normalization", "1/(2M)"},
      {"std", "sample (n - 1)"},
      {"failed_trials", "error null, counted as non-recovered"},
  };
  return m;
}

namespace {

Json trial_json(const TrialRecord& t) {
  Json j;
  j["trial"] = t.trial;
  j["m"] = t.m;
  j["error"] = number_or_null(t.error);
  j["time_s"] = t.time_s;
  j["iterations"] = t.iterations;
  j["restarts"] = t.restarts;
  j["recovered"] = t.recovered;
  j["failed"] = t.failed;
  j["failure"] = t.failure;
  j["diamond_norm"] = t.diamond_norm ? Json(*t.diamond_norm) : Json(nullptr);
  return j;
}

TrialRecord trial_from_json(const Json& j) {
  TrialRecord t;
  t.trial = j.at("trial").get<Index>();
  t.m = j.at("m").get<Index>();
  t.error = number_from(j.at("error"));
  t.time_s = j.at("time_s").get<double>();
  t.iterations = j.at("iterations").get<Index>();
  t.restarts = j.at("restarts").get<Index>();
  t.recovered = j.at("recovered").get<bool>();
  t.failed = j.at("failed").get<bool>();
  t.failure = j.at("failure").get<std::string>();
  if (!j.at("diamond_norm").is_null()) t.diamond_norm = j.at("diamond_norm").get<double>();
  return t;
}

}  // namespace

Json result_json(const ExperimentResult& r) {
  Json j;
  j["format"] = "qsl.result";
  j["manifest"] = r.manifest;
  j["manifest_sha256"] = r.manifest_hash;
  Json points = Json::array();
  for (const auto& p : r.points) {
    Json pj;
    pj["m"] = p.m;
    pj["mean_error"] = number_or_null(p.mean_error);
    pj["std_error"] = number_or_null(p.std_error);
    pj["mean_time"] = number_or_null(p.mean_time);
    pj["std_time"] = number_or_null(p.std_time);
    pj["recovery_rate"] = p.recovery_rate;
    pj["failures"] = p.failures;
    Json trials = Json::array();
    for (const auto& t : p.trials) trials.push_back(trial_json(t));
    pj["trials"] = std::move(trials);
    points.push_back(std::move(pj));
  }
  j["points"] = std::move(points);
  return j;
}

ExperimentResult result_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", "") != "qsl.result") throw IoError("not a result file");
  ExperimentResult r;
  try {
    r.manifest = j.at("manifest");
    r.manifest_hash = j.at("manifest_sha256").get<std::string>();
    r.config = config_from_json(r.manifest.at("config"));
    for (const auto& pj : j.at("points")) {
      PointResult p;
      p.m = pj.at("m").get<Index>();
      p.mean_error = number_from(pj.at("mean_error"));
      p.std_error = number_from(pj.at("std_error"));
      p.mean_time = number_from(pj.at("mean_time"));
      p.std_time = number_from(pj.at("std_time"));
      p.recovery_rate = pj.at("recovery_rate").get<double>();
      p.failures = pj.at("failures").get<Index>();
      for (const auto& tj : pj.at("trials")) p.trials.push_back(trial_from_json(tj));
      r.points.push_back(std::move(p));
    }
  } catch (const Json::exception& e) {
    throw IoError(std::string("result file: ") + e.what());
  }
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string point_csv(const PointResult& p, const std::string& manifest_hash) {
  std::ostringstream os;
  os << "trial,m,error,time_s,iterations,recovered,manifest_sha256\n";
  double iters = 0;
  for (const auto& t : p.trials) {
    os << t.trial << ',' << t.m << ',' << format_double(t.error) << ',' << format_double(t.time_s) << ','
       << t.iterations << ',' << (t.recovered ? 1 : 0) << ',' << manifest_hash << '\n';
    iters += static_cast<double>(t.iterations);
  }
  const double mean_iters = p.trials.empty() ? 0.0 : iters / static_cast<double>(p.trials.size());
  os << "aggregate," << p.m << ',' << format_double(p.mean_error) << ',' << format_double(p.mean_time) << ','
     << format_double(mean_iters) << ',' << format_double(p.recovery_rate) << ',' << manifest_hash << '\n';
  return os.str();
}

Json figure_recipe(const ExperimentResult& r, const std::vector<std::string>& csv_files) {
  const bool random = r.config.design == DesignKind::random_pairs;
  Json data = Json::array();
  for (const auto& p : r.points)
    data.push_back({{"m", p.m},
                    {"mean_error", number_or_null(p.mean_error)},
                    {"std_error", number_or_null(p.std_error)},
                    {"recovery_rate", p.recovery_rate}});
  return Json{{"format", "qsl.figure"},
              {"manifest_sha256", r.manifest_hash},
              {"x", {{"field", "m"}, {"label", random ? "M" : "M_O"}, {"scale", "log"}}},
              {"series",
               Json::array({Json{{"y", "recovery_rate"}, {"label", "recovery rate"}, {"scale", "linear"}},
                            Json{{"y", "mean_error"},
                                 {"error_bar", "std_error"},
                                 {"label", "relative Frobenius error"},
                                 {"scale", "log"}}})},
              {"csv_files", csv_files},
              {"data", std::move(data)}};
}

std::vector<fs::path> emit_results(const ExperimentResult& r, const fs::path& stem, EmitFormat formats) {
  std::vector<fs::path> written;
  const auto f = static_cast<int>(formats);
  std::vector<std::string> csv_names;
  if (f & static_cast<int>(EmitFormat::csv)) {
    for (const auto& p : r.points) {
      fs::path out = r.points.size() == 1 ? fs::path(stem.string() + ".csv")
                                           : fs::path(stem.string() + "_m" + std::to_string(p.m) + ".csv");
      write_file_atomic(out, point_csv(p, r.manifest_hash));
      csv_names.push_back(out.filename().string());
      written.push_back(out);
    }
  }
  if (f & static_cast<int>(EmitFormat::json)) {
    const fs::path out = stem.string() + ".json";
    write_json_file(out, result_json(r));
    written.push_back(out);
    const fs::path fig = stem.string() + ".figure.json";
    write_json_file(fig, figure_recipe(r, csv_names));
    written.push_back(fig);
  }
  return written;
}

}  // namespace qsl
