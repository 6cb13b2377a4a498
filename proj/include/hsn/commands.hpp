#pragma once

#include "hsn/error.hpp"
#include "hsn/haar.hpp"
#include "hsn/io.hpp"
#include "hsn/pairing_optimizer.hpp"
#include "hsn/readout.hpp"
#include "hsn/scattering.hpp"
#include "hsn/signal_lab.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsn {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

int exit_code_for(ErrorKind kind);

struct SignalSource {
  std::optional<std::string> input_path; // CSV; otherwise the generator is used
  GeneratorSpec generator = GeneratorSpec::defaults(Family::Sinusoid);
  LengthPolicy length_policy = LengthPolicy::Reject;
};

Signal load_signal(const SignalSource &source);

struct RuleSelection {
  std::optional<PairingRule> fixed; // skips the search when set
  std::vector<double> sigma_grid;   // empty: default grid
  std::vector<long long> tau_grid;  // empty: default grid
  bool per_layer = false;
};

GridConfig resolve_grid(const RuleSelection &selection, std::size_t signal_length, int depth);

// Fixed rules broadcast to every transition, or the grid optimum for signal.
std::vector<PairingRule> select_rules(const RuleSelection &selection, const Signal &signal,
                                      int depth, const ScatteringOptions &scattering,
                                      const ReadoutOptions &readout);

/// One fitted readout inside a report.
struct ExperimentResult {
  std::string label;
  ReadoutKind readout = ReadoutKind::Reconstruction;
  std::optional<double> r_squared;
  std::optional<double> r_squared_holdout;
  std::optional<double> reference_r_squared;
  std::optional<double> threshold;
  std::vector<PairingRule> rules;
  std::vector<double> beta;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
  double rmse = 0.0;
  bool rank_deficient = false;
  bool undefined_variance = false;
  std::size_t zero_theta_rows = 0;
  std::string abscissa_name; // "t" or "theta"
  std::vector<double> abscissa;
  std::vector<double> actual;
  std::vector<double> predicted;
};

struct ExperimentReport {
  std::string experiment;
  ordered_json config;
  std::vector<ExperimentResult> results;
  double runtime_seconds = 0.0;
};

ordered_json to_json(const ExperimentResult &result);
ordered_json to_json(const ExperimentReport &report);
// Pretty-printed JSON with stable key order and a trailing newline.
std::string render_report(const ExperimentReport &report);

// ---- extract ---------------------------------------------------------------

struct ExtractOptions {
  SignalSource source;
  int depth = 4;
  RuleSelection rules;
  bool use_abs = true;
  bool normalize = false;
  bool all_layers = false;
  std::string out_dir; // empty: no files
};

struct ExtractResult {
  ScatteringNetwork network;
};

// Writes features.csv (t, q0 .. q{2^J-1}) and optionally one file per layer.
ExtractResult run_extract(const ExtractOptions &options);

// ---- reconstruct -----------------------------------------------------------

struct ReconstructOptions {
  SignalSource source;
  int depth = 4;
  RuleSelection rules;
  bool intercept = false;
  std::string out_dir;
};

ordered_json config_json(const ReconstructOptions &options);
ReconstructOptions reconstruct_options_from_json(const nlohmann::json &config);

// Writes predictions.csv, interpolated.csv and report.json.
ExperimentReport run_reconstruct(const ReconstructOptions &options);

// ---- identify --------------------------------------------------------------

enum class Direction { Forward, Inverse };

const char *to_string(Direction direction);
Direction parse_direction(std::string_view name);

// How sweep rules are searched when none is fixed.
enum class RuleObjective {
  SweepFit,     // residual sum of squares of the sweep readout itself
  Reference,    // reconstruction loss of the middle realization
};

const char *to_string(RuleObjective objective);
RuleObjective parse_rule_objective(std::string_view name);

struct IdentifyOptions {
  GeneratorSpec base = GeneratorSpec::defaults(Family::Ar1);
  std::string theta_param = "phi";
  double theta_start = 0.05;
  double theta_step = 0.05;
  std::size_t theta_count = 19;
  Direction direction = Direction::Inverse;
  Transfer transfer = Transfer::Identity;
  RuleSelection rules;
  RuleObjective rule_objective = RuleObjective::SweepFit;
  int depth = 4;
  bool intercept = false;
  std::string out_dir;
};

// Family-specific sweep defaults.
IdentifyOptions default_identify_options(Family family);

ordered_json config_json(const IdentifyOptions &options);
IdentifyOptions identify_options_from_json(const nlohmann::json &config);

// Realization i uses theta_start + i * theta_step and seed base.seed + i.
ParameterSweep build_sweep(const IdentifyOptions &options, std::vector<PairingRule> &rules);

ReadoutFit fit_sweep(const IdentifyOptions &options, const ParameterSweep &sweep);

// Writes sweep.csv (theta, target, predicted) and report.json.
ExperimentReport run_identify(const IdentifyOptions &options);

// ---- benchmark -------------------------------------------------------------

struct BenchmarkOptions {
  std::uint64_t seed = 42;
  std::string out_dir;
};

struct SummaryRow {
  std::string experiment;
  std::string label;
  std::optional<double> r_squared;
  double reference_r_squared = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct BenchmarkResult {
  std::vector<ExperimentReport> reports;
  std::vector<SummaryRow> summary;
};

ExperimentReport benchmark_sinusoid(std::uint64_t seed);
ExperimentReport benchmark_exponential(std::uint64_t seed);
ExperimentReport benchmark_logistic(std::uint64_t seed);
ExperimentReport benchmark_ar1(std::uint64_t seed);

// Writes A_sinusoid.json .. D_ar1.json and summary.csv.
BenchmarkResult run_benchmark(const BenchmarkOptions &options);

// ---- command line ----------------------------------------------------------

int run_cli(int argc, const char *const *argv);

} // namespace hsn
