#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stocon/algos.hpp"
#include "stocon/problems.hpp"

namespace stocon {

// Noise-quantizer build settings (exposed in configs; hedging ignores them
// and always uses its exact three-atom grid).
struct QuantConfig {
  int K = 21;
  long iterations = 200000;
  int polish_passes = 100;
  long polish_samples = 300000;
  long weight_samples = 1000000;
  double step_a = 1.0;
  double step_b = 100.0;
};

struct QknnRunConfig {
  int knn_k = 1;
  double brent_tol = 1e-5;
  int brent_multistart = 10;
  int state_points = 51;  // 1-D quantizer centers spanning each gridded axis
};

struct EvalConfig {
  int batches = 10;
  int batch_size = 10000;
};

// A fully resolved experiment: problem, algorithm, and every knob with its
// default filled in. `to_json` emits the effective config; parsing that echo
// reproduces the same RunConfig.
struct RunConfig {
  std::string problem = "semilinear";
  std::string algorithm = "hybrid_now";
  SemilinearSpec semilinear;
  LqSpec lq;
  HedgingSpec hedging;
  StorageSpec storage;
  MicrogridSpec microgrid;
  Vec constant_control;  // algorithm = "constant"
  NnConfig nn;
  TrainConfig train;
  QuantConfig quantizer;
  QknnRunConfig qknn;
  EvalConfig eval;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output_dir;  // empty disables artifact writing

  std::string to_json() const;
};

// Strict parse: unknown keys are rejected with their dotted path, and every
// present key is type-checked. Missing keys keep their defaults.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

struct RunReport {
  std::string config_json;  // effective config echo
  std::string problem;
  std::string algorithm;
  std::string param_label;  // headline parameter: gamma, d, a_in, N
  double param_value = 0.0;
  double value_mean = 0.0;
  double value_std = 0.0;
  Vec batch_means;
  std::optional<double> value_at_x0;       // value-set algorithms
  std::optional<double> oracle_std_error;  // Monte Carlo oracles
  std::optional<double> w0_star;           // hedging oracle
  Vec hedging_K;                           // hedging oracle factor table
  SolveTrace trace;
  std::vector<std::pair<std::string, double>> phase_seconds;
  std::vector<std::string> artifacts;

  double runtime_seconds() const;
  std::string to_json() const;
  // algo,problem,gamma_or_param,value_mean,value_std,runtime_s
  std::string csv_row() const;
  static std::string csv_header();
};

struct RunOutput {
  RunReport report;
  std::optional<PolicySet> policy;
  std::optional<ValueSet> value;
};

// Executes the experiment: solve (or evaluate the oracle), run the forward
// evaluation, write artifacts when output_dir is set.
RunOutput run_full(const RunConfig& cfg);
RunReport run(const RunConfig& cfg);

// Rebuilds the ControlProblem described by an effective config.
ControlProblem build_problem(const RunConfig& cfg);

void save_policy(const PolicySet& policy, const std::string& dir,
                 std::vector<std::string>* files);
PolicySet load_policy(const std::string& dir, const ControlProblem& problem);

struct RegionConfig {
  std::string run_dir;
  int time = 0;
  int axis1 = 0;
  int axis2 = 1;
  Vec axis1_points, axis2_points;
  Vec base_state;      // empty = problem.x0
  std::string output;  // empty = <run_dir>/regions.csv
};

RegionConfig parse_region_config(const std::string& text);
RegionConfig load_region_config(const std::string& path);

// Loads the policy saved under cfg.run_dir and writes the deployed-control
// slice as CSV. Returns the written path.
std::string export_regions(const RegionConfig& cfg);

}  // namespace stocon
