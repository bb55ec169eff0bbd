#pragma once

// Experiment orchestration: ground truth -> design -> data -> strategy ->
// reconstruction -> score, repeated over trials and sweep points, with
// deterministic per-trial seeds and JSON/CSV emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qsl/als.hpp"
#include "qsl/measurement.hpp"
#include "qsl/serialize.hpp"
#include "qsl/types.hpp"

namespace qsl {

enum class TaskKind { channel, lindbladian, haar };
enum class Strategy { als_n2, als_p, als_n, als_i };

struct ExperimentConfig {
  std::string name = "experiment";
  TaskKind task = TaskKind::channel;
  Index n = 4;
  Index kraus_rank = 2;  // channel
  Index n_jumps = 1;     // lindbladian
  Index r_plus = 2;      // haar
  Index r_minus = 0;     // haar
  DesignKind design = DesignKind::blockwise;
  ObservableSource source = ObservableSource::random;
  double observable_norm = 1.0;
  Index row = 0;
  /// M per point for random pairs, M_O for blockwise designs.
  std::vector<Index> sweep{16};
  double sigma = 0;
  NoiseMode noise_mode = NoiseMode::synthetic;
  Strategy strategy = Strategy::als_n;
  double subset_ratio = 0.4;
  Index trials = 1;
  SolverConfig solver;
  double reconstruct_rtol = -1;
  bool hermitize = false;
  double recovery_threshold = 1e-5;
  /// Wall times are recorded only when set, so that untimed runs emit identical bytes.
  bool record_timing = true;
  std::uint64_t master_seed = 0;

  /// Rank of the reshaped ground truth, which is also the solver rank.
  Index truth_rank() const;
  void validate() const;
};

struct TrialRecord {
  Index trial = 0;
  Index m = 0;
  double error = 0;  // NaN when the trial failed
  double time_s = 0;
  Index iterations = 0;
  Index restarts = 0;
  bool recovered = false;
  bool failed = false;
  std::string failure;
  std::optional<double> diamond_norm;  // reserved for externally computed values
};

struct PointResult {
  Index m = 0;
  std::vector<TrialRecord> trials;
  double mean_error = 0;
  double std_error = 0;
  double mean_time = 0;
  double std_time = 0;
  double recovery_rate = 0;
  Index failures = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  Json manifest;
  std::string manifest_hash;
  std::vector<PointResult> points;
};

/// ||K - K*||_F / ||K*||_F; throws NumericalError for a zero truth.
double relative_frobenius_error(const ReshapedMatrix& estimate, const ReshapedMatrix& truth);
double relative_frobenius_error(const ComplexMatrix& estimate, const ComplexMatrix& truth);

/// Fraction of entries strictly below threshold; NaN counts as above.
double recovery_rate(const std::vector<double>& errors, double threshold);

/// Seed for trial t, point p and a named stream.
enum class SeedStream : std::uint64_t { truth = 0, design = 1, noise = 2, solver = 3, rsvd = 4 };
std::uint64_t trial_seed(std::uint64_t master, Index point, Index trial, SeedStream stream);

Superoperator make_ground_truth(const ExperimentConfig& c, std::uint64_t seed);

/// Runs one trial of sweep point p.
TrialRecord run_trial(const ExperimentConfig& c, Index point, Index trial);
ExperimentResult run_experiment(const ExperimentConfig& c);
/// Aggregates over a set of trial records (mean, sample standard deviation, recovery rate).
PointResult aggregate(Index m, std::vector<TrialRecord> trials, double threshold);

Json manifest_json(const ExperimentConfig& c);
Json config_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const Json& j);

Json result_json(const ExperimentResult& r);
ExperimentResult result_from_json(const Json& j);

enum class EmitFormat { json = 1, csv = 2, both = 3 };

/// <stem>.json with everything, one CSV per sweep point (<stem>.csv for a
/// single point, <stem>_m<M>.csv otherwise) and <stem>.figure.json describing
/// the plot axes. Returns the files written.
std::vector<std::filesystem::path> emit_results(const ExperimentResult& r, const std::filesystem::path& stem,
                                                EmitFormat formats = EmitFormat::both);
std::string point_csv(const PointResult& p, const std::string& manifest_hash);
Json figure_recipe(const ExperimentResult& r, const std::vector<std::string>& csv_files);

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
std::string format_double(double v);

std::string to_string(TaskKind t);
std::string to_string(Strategy s);
TaskKind parse_task(const std::string& s);
Strategy parse_strategy(const std::string& s);

}  // namespace qsl
