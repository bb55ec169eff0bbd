#include "qsl/cli.hpp"

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <ostream>

#include "CLI11.hpp"
#include "qsl/cmx_io.hpp"
#include "qsl/harness.hpp"
#include "qsl/reconstruct.hpp"
#include "qsl/reshape.hpp"
#include "qsl/superop.hpp"

namespace qsl::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

void add_common(CLI::App* app, Common& c, bool out_required = true) {
  app->add_option("--seed", c.seed, "random seed")->capture_default_str();
  auto* o = app->add_option("--out", c.out, "output path");
  if (out_required) o->required();
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

std::string extension_stem(const std::string& path, const char* ext) {
  fs::path p(path);
  if (p.extension() == ext) p.replace_extension();
  return p.string();
}

struct SolverFlags {
  Index max_iter = 300;
  double gamma = 1e-8;
  double eta = 1.2;
  double beta = 1.0;
  std::string ls_method = "qr";

  void add(CLI::App* app) {
    app->add_option("--max-iter", max_iter)->capture_default_str();
    app->add_option("--gamma", gamma)->capture_default_str();
    app->add_option("--eta", eta)->capture_default_str();
    app->add_option("--beta", beta)->capture_default_str();
    app->add_option("--ls-method", ls_method)->check(CLI::IsMember({"qr", "normal_equations"}))->capture_default_str();
  }
  SolverConfig config(Index rank, std::uint64_t seed, int threads) const {
    SolverConfig c;
    c.rank = rank;
    c.max_iter = max_iter;
    c.gamma = gamma;
    c.eta = eta;
    c.beta = beta;
    c.ls_method = parse_ls_method(ls_method);
    c.seed = seed;
    c.threads = threads;
    c.validate();
    return c;
  }
};

ReshapedMatrix load_full_matrix(const std::string& path) {
  if (fs::path(path).extension() == ".json") return load_reshaped(path);
  ReshapedMatrix k;
  k.matrix = read_cmx(fs::path(path));
  k.dim_n = exact_sqrt(k.matrix.rows());
  if (k.dim_n < 1 || k.matrix.cols() != k.matrix.rows())
    throw DimensionError(path + ": expected an N^2 x N^2 matrix");
  return k;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-rank superoperator learning from simulated measurements", "qsl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "1.0.0");

  // generate
  Common gen_c;
  std::string task = "channel";
  Index gen_n = 4, kraus_rank = 2, n_jumps = 1, r_plus = 2, r_minus = 0;
  auto* gen = app.add_subcommand("generate", "write a random ground-truth superoperator");
  add_common(gen, gen_c);
  gen->add_option("--task", task)->check(CLI::IsMember({"channel", "lindbladian", "haar"}))->capture_default_str();
  gen->add_option("--n", gen_n, "Hilbert-space dimension")->capture_default_str();
  gen->add_option("--kraus-rank", kraus_rank)->capture_default_str();
  gen->add_option("--n-jumps", n_jumps)->capture_default_str();
  gen->add_option("--r-plus", r_plus)->capture_default_str();
  gen->add_option("--r-minus", r_minus)->capture_default_str();

  // measure
  Common meas_c;
  std::string truth_path, design_kind = "blockwise", source = "random", noise_mode = "synthetic";
  Index meas_m = 16, row_index = 1;
  double sigma = 0, observable_norm = 1.0;
  auto* meas = app.add_subcommand("measure", "build a design and simulate measurements; --out is a directory");
  add_common(meas, meas_c);
  meas->add_option("--truth", truth_path, "superoperator JSON from generate")->required();
  meas->add_option("--design", design_kind)->check(CLI::IsMember({"random_pairs", "blockwise"}))->capture_default_str();
  meas->add_option("--source", source)->check(CLI::IsMember({"pauli", "random", "pauli_basis"}))->capture_default_str();
  meas->add_option("--m", meas_m, "M (random pairs) or M_O (blockwise)")->capture_default_str();
  meas->add_option("--row", row_index, "anchor block row, 1-based")->capture_default_str();
  meas->add_option("--sigma", sigma)->capture_default_str();
  meas->add_option("--noise-mode", noise_mode)->check(CLI::IsMember({"synthetic", "physical"}))->capture_default_str();
  meas->add_option("--observable-norm", observable_norm)->capture_default_str();

  // solve
  Common solve_c;
  std::string design_path, meas_path, strategy = "als_n";
  Index solve_rank = 1;
  double ratio = 0.4;
  SolverFlags solve_flags;
  auto* solve = app.add_subcommand("solve", "run a strategy on stored data; --out is a directory");
  add_common(solve, solve_c);
  solve->add_option("--design", design_path)->required();
  solve->add_option("--measurements", meas_path)->required();
  solve->add_option("--strategy", strategy)
      ->check(CLI::IsMember({"als_n2", "als_p", "als_n", "als_i"}))
      ->capture_default_str();
  solve->add_option("--rank", solve_rank)->required();
  solve->add_option("--ratio", ratio, "subset ratio for als_i")->capture_default_str();
  solve_flags.add(solve);

  // reconstruct
  Common rec_c;
  std::string row_path;
  Index rec_rank = 1, anchor = 1;
  double rtol = -1;
  bool hermitize = false;
  auto* rec = app.add_subcommand("reconstruct", "complete the reshaped matrix from one block row");
  add_common(rec, rec_c);
  rec->add_option("--row", row_path, "N x N^2 block row (CMX1)")->required();
  rec->add_option("--rank", rec_rank)->required();
  rec->add_option("--anchor", anchor, "block-row index of the input, 1-based")->capture_default_str();
  rec->add_option("--rtol", rtol, "negative selects max(N, r) * eps")->capture_default_str();
  rec->add_flag("--hermitize", hermitize);

  // run
  Common run_c;
  std::string config_path;
  bool no_timing = false;
  bool seed_given = false;
  auto* runp = app.add_subcommand("run", "full pipeline from a JSON config; --out is a file stem");
  add_common(runp, run_c);
  runp->add_option("--config", config_path)->required();
  runp->add_flag("--no-timing", no_timing, "do not record wall times (byte-identical outputs)");

  // rip-probe
  Common rip_c;
  std::string rip_design;
  Index rip_rank = 1, samples = 1000;
  auto* rip = app.add_subcommand("rip-probe", "sampled restricted-isometry constants of a stored design");
  add_common(rip, rip_c, false);
  rip->add_option("--design", rip_design)->required();
  rip->add_option("--rank", rip_rank)->required();
  rip->add_option("--samples", samples)->capture_default_str();

  // report
  Common rep_c;
  std::vector<std::string> result_files;
  std::string rep_truth, rep_estimate;
  auto* rep = app.add_subcommand("report", "summarize result files, or score an estimate against a truth");
  add_common(rep, rep_c, false);
  rep->add_option("results", result_files, "result JSON files from run");
  rep->add_option("--truth", rep_truth, "superoperator JSON or N^2 x N^2 CMX1");
  rep->add_option("--estimate", rep_estimate, "N^2 x N^2 CMX1");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
    seed_given = runp->count("--seed") > 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      ExperimentConfig c;
      c.task = parse_task(task);
      c.n = gen_n;
      c.kraus_rank = kraus_rank;
      c.n_jumps = n_jumps;
      c.r_plus = r_plus;
      c.r_minus = r_minus;
      const Superoperator s = make_ground_truth(c, gen_c.seed);
      Json meta{{"task", task}, {"seed", gen_c.seed}, {"rank", s.rank()}};
      save_superoperator(gen_c.out, s, meta);
      out << "wrote " << gen_c.out << " (N=" << s.dim_n << ", r+=" << s.r_plus() << ", r-=" << s.r_minus() << ")\n";
    } else if (*meas) {
      const Superoperator s = load_superoperator(truth_path);
      const DesignKind kind = parse_design_kind(design_kind);
      const SensingDesign d =
          kind == DesignKind::random_pairs
              ? build_random_design(s.dim_n, meas_m, parse_source(source), derive_seed(meas_c.seed, 0),
                                    observable_norm)
              : build_blockwise_design(s.dim_n, meas_m, parse_source(source), row_index - 1,
                                       derive_seed(meas_c.seed, 0), observable_norm);
      const MeasurementSet ms =
          simulate_measurements(s, d, sigma, parse_noise_mode(noise_mode), derive_seed(meas_c.seed, 1));
      const fs::path dir(meas_c.out);
      save_design(dir / "design.json", d);
      save_measurements(dir / "measurements.json", ms);
      out << "wrote " << (dir / "design.json").string() << " and " << (dir / "measurements.json").string() << " ("
          << d.id() << ")\n";
    } else if (*solve) {
      const SensingDesign d = load_design(design_path);
      const MeasurementSet ms = load_measurements(meas_path);
      if (ms.design_ref != d.id())
        throw ConfigError("measurements were simulated for '" + ms.design_ref + "', not '" + d.id() + "'");
      const SolverConfig sc = solve_flags.config(solve_rank, solve_c.seed, solve_c.threads);
      const Strategy st = parse_strategy(strategy);
      const fs::path dir(solve_c.out);
      Json summary{{"strategy", strategy}, {"solver", solver_config_json(sc)}, {"design_ref", d.id()}};
      if (st == Strategy::als_n2) {
        if (d.kind != DesignKind::random_pairs) throw ConfigError("als_n2 needs a random_pairs design");
        const DenseSensing op = random_pair_sensing(d);
        const SolveReport r = nesterov_als_solve(op, ms.values.cast<Complex>(), sc);
        write_cmx(dir / "estimate.cmx", r.factors.product());
        write_cmx(dir / "left.cmx", r.factors.left);
        write_cmx(dir / "right.cmx", r.factors.right);
        summary["report"] = report_json(r);
        summary["estimate"] = "estimate.cmx";
      } else {
        if (d.kind != DesignKind::blockwise) throw ConfigError(strategy + " needs a blockwise design");
        FirstRowEstimate row;
        if (st == Strategy::als_p)
          row = solve_first_row_parallel(d.observables, ms.blocks, d.dim_n, sc);
        else if (st == Strategy::als_n)
          row = solve_first_row_joint(d.observables, ms.blocks, d.dim_n, sc);
        else
          row = solve_first_row_subset(d.observables, ms.blocks, d.dim_n, ratio, sc, d.row);
        write_cmx(dir / "row.cmx", row.stacked());
        summary["row"] = "row.cmx";
        summary["row_index"] = d.row + 1;
        summary["iterations"] = row.iterations;
        summary["restarts"] = row.restarts;
        summary["final_loss"] = row.final_loss;
        summary["subset"] = row.subset;
      }
      write_json_file(dir / "solve.json", summary);
      out << "wrote " << (dir / "solve.json").string() << "\n";
    } else if (*rec) {
      const ComplexMatrix row = read_cmx(fs::path(row_path));
      ReconstructOptions ro;
      ro.rtol = rtol;
      ro.anchor = anchor - 1;
      ro.hermitize = hermitize;
      ro.rsvd_seed = rec_c.seed;
      const ReshapedMatrix k = reconstruct_full(split_blocks(row), rec_rank, ro);
      write_cmx(fs::path(rec_c.out), k.matrix);
      out << "wrote " << rec_c.out << " (" << k.matrix.rows() << "x" << k.matrix.cols() << ")\n";
    } else if (*runp) {
      ExperimentConfig c = config_from_json(read_json_file(config_path));
      if (seed_given) c.master_seed = run_c.seed;
      c.solver.threads = run_c.threads;
      if (no_timing) c.record_timing = false;
      const ExperimentResult r = run_experiment(c);
      const auto files = emit_results(r, extension_stem(run_c.out, ".json"));
      for (const auto& p : r.points)
        out << "m=" << p.m << " mean_error=" << format_double(p.mean_error)
            << " std_error=" << format_double(p.std_error) << " recovery_rate=" << format_double(p.recovery_rate)
            << " mean_time=" << format_double(p.mean_time) << " failures=" << p.failures << "\n";
      for (const auto& f : files) out << "wrote " << f.string() << "\n";
    } else if (*rip) {
      const SensingDesign d = load_design(rip_design);
      const RipEstimate e = empirical_rip_probe(d, rip_rank, samples, rip_c.seed);
      const Json j{{"design_ref", d.id()}, {"rank", rip_rank}, {"samples", samples}, {"seed", rip_c.seed},
                   {"c0", e.c0},           {"c1", e.c1},        {"c", e.c},             {"delta", e.delta}};
      if (!rip_c.out.empty()) write_json_file(rip_c.out, j);
      out << "c0=" << format_double(e.c0) << " c1=" << format_double(e.c1) << " c=" << format_double(e.c)
          << " delta=" << format_double(e.delta) << "\n";
    } else if (*rep) {
      Json summary = Json::object();
      if (!rep_truth.empty() || !rep_estimate.empty()) {
        if (rep_truth.empty() || rep_estimate.empty()) throw ConfigError("--truth and --estimate go together");
        const double e = relative_frobenius_error(load_full_matrix(rep_estimate), load_full_matrix(rep_truth));
        out << "relative_frobenius_error=" << format_double(e) << "\n";
        summary["relative_frobenius_error"] = e;
      }
      if (result_files.empty() && summary.empty()) throw ConfigError("report: nothing to report");
      Json rows = Json::array();
      for (const auto& f : result_files) {
        const ExperimentResult r = result_from_json(read_json_file(f));
        for (const auto& p : r.points) {
          std::vector<double> errors;
          for (const auto& t : p.trials) errors.push_back(t.error);
          out << r.config.name << " " << to_string(r.config.strategy) << " m=" << p.m
              << " trials=" << p.trials.size() << " mean_error=" << format_double(p.mean_error)
              << " std_error=" << format_double(p.std_error)
              << " recovery_rate=" << format_double(recovery_rate(errors, r.config.recovery_threshold))
              << " mean_time=" << format_double(p.mean_time) << "\n";
          rows.push_back({{"file", f},
                          {"name", r.config.name},
                          {"strategy", to_string(r.config.strategy)},
                          {"m", p.m},
                          {"mean_error", p.mean_error},
                          {"std_error", p.std_error},
                          {"recovery_rate", p.recovery_rate},
                          {"mean_time", p.mean_time}});
        }
      }
      if (!rows.empty()) summary["points"] = rows;
      if (!rep_c.out.empty()) write_json_file(rep_c.out, summary);
    }
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace qsl::cli
