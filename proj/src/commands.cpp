#include "hsn/commands.hpp"

#include "hsn/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>

namespace hsn {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> to_std(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

ordered_json optional_number(const std::optional<double> &v) {
  if (v && std::isfinite(*v))
    return *v;
  return nullptr;
}

ordered_json rules_json(const std::vector<PairingRule> &rules) {
  ordered_json out = ordered_json::array();
  for (const auto &r : rules)
    out.push_back({{"sigma", r.sigma}, {"tau", r.tau}});
  return out;
}

ordered_json generator_json(const GeneratorSpec &spec) {
  return {{"family", to_string(spec.family)},
          {"beta", spec.beta},
          {"C", spec.capacity},
          {"x0", spec.x0},
          {"phi", spec.phi},
          {"input", to_string(spec.input)},
          {"noise", spec.noise_sigma},
          {"length", spec.length},
          {"seed", spec.seed}};
}

GeneratorSpec generator_from_json(const nlohmann::json &j) {
  GeneratorSpec spec = GeneratorSpec::defaults(parse_family(j.at("family").get<std::string>()));
  spec.beta = j.value("beta", spec.beta);
  spec.capacity = j.value("C", spec.capacity);
  spec.x0 = j.value("x0", spec.x0);
  spec.phi = j.value("phi", spec.phi);
  if (j.contains("input"))
    spec.input = parse_input_kind(j.at("input").get<std::string>());
  spec.noise_sigma = j.value("noise", spec.noise_sigma);
  spec.length = j.value("length", spec.length);
  spec.seed = j.value("seed", spec.seed);
  return spec;
}

ordered_json selection_json(const RuleSelection &s) {
  ordered_json out;
  if (s.fixed)
    out["fixed"] = {{"sigma", s.fixed->sigma}, {"tau", s.fixed->tau}};
  else
    out["fixed"] = nullptr;
  out["sigma_grid"] = s.sigma_grid;
  out["tau_grid"] = s.tau_grid;
  out["per_layer"] = s.per_layer;
  return out;
}

RuleSelection selection_from_json(const nlohmann::json &j) {
  RuleSelection s;
  if (j.contains("fixed") && !j.at("fixed").is_null())
    s.fixed = PairingRule{j.at("fixed").at("sigma").get<double>(),
                          j.at("fixed").at("tau").get<long long>()};
  s.sigma_grid = j.value("sigma_grid", std::vector<double>{});
  s.tau_grid = j.value("tau_grid", std::vector<long long>{});
  s.per_layer = j.value("per_layer", false);
  return s;
}

ordered_json source_json(const SignalSource &s) {
  ordered_json out;
  if (s.input_path)
    out["input"] = *s.input_path;
  else
    out["input"] = nullptr;
  out["generator"] = generator_json(s.generator);
  out["length_policy"] = to_string(s.length_policy);
  return out;
}

SignalSource source_from_json(const nlohmann::json &j) {
  SignalSource s;
  if (j.contains("input") && !j.at("input").is_null())
    s.input_path = j.at("input").get<std::string>();
  if (j.contains("generator"))
    s.generator = generator_from_json(j.at("generator"));
  if (j.contains("length_policy"))
    s.length_policy = parse_length_policy(j.at("length_policy").get<std::string>());
  return s;
}

// Accepts either a bare config or a whole report carrying one.
const nlohmann::json &unwrap_config(const nlohmann::json &j) {
  return j.contains("config") ? j.at("config") : j;
}

void fill_fit(ExperimentResult &out, const ReadoutFit &fit) {
  const FitReport &rep = fit.report;
  out.readout = fit.model.kind;
  out.r_squared = rep.r_squared;
  out.undefined_variance = !rep.r_squared.has_value();
  out.beta = to_std(fit.model.beta);
  out.intercept = fit.model.intercept;
  out.rank_deficient = rep.rank_deficient;
  out.zero_theta_rows = rep.zero_theta_rows;
  out.actual = to_std(rep.targets);
  out.predicted = to_std(rep.predictions);
  if (rep.residuals.size() > 0) {
    out.max_abs_residual = rep.residuals.cwiseAbs().maxCoeff();
    out.rmse = std::sqrt(rep.residuals.squaredNorm() / static_cast<double>(rep.residuals.size()));
  }
  for (double v : out.predicted)
    if (!std::isfinite(v))
      throw Error(ErrorKind::NonFinite, "readout produced non-finite predictions");
}

void write_report(const std::string &out_dir, const std::string &name,
                  const ExperimentReport &report) {
  write_text(fs::path(out_dir) / name, render_report(report));
}

} // namespace

int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::NonFinite ? kExitNumerical : kExitUsage;
}

ordered_json to_json(const ExperimentResult &r) {
  ordered_json out;
  out["label"] = r.label;
  out["readout"] = to_string(r.readout);
  out["r_squared"] = optional_number(r.r_squared);
  out["r_squared_holdout"] = optional_number(r.r_squared_holdout);
  if (r.reference_r_squared)
    out["reference_r_squared"] = *r.reference_r_squared;
  if (r.threshold)
    out["threshold"] = *r.threshold;
  out["rules"] = rules_json(r.rules);
  out["beta"] = r.beta;
  out["intercept"] = r.intercept;
  out["residuals"] = {{"max_abs", r.max_abs_residual}, {"rmse", r.rmse}};
  out["flags"] = {{"rank_deficient", r.rank_deficient},
                  {"undefined_variance", r.undefined_variance},
                  {"zero_theta_rows", r.zero_theta_rows}};
  out[r.abscissa_name.empty() ? "t" : r.abscissa_name] = r.abscissa;
  out["actual"] = r.actual;
  out["predicted"] = r.predicted;
  return out;
}

ordered_json to_json(const ExperimentReport &report) {
  ordered_json out;
  out["schema"] = "hsn-report/1";
  out["experiment"] = report.experiment;
  out["config"] = report.config;
  ordered_json results = ordered_json::array();
  for (const auto &r : report.results)
    results.push_back(to_json(r));
  out["results"] = std::move(results);
  out["runtime_seconds"] = report.runtime_seconds;
  return out;
}

std::string render_report(const ExperimentReport &report) {
  return to_json(report).dump(2) + "\n";
}

Signal load_signal(const SignalSource &source) {
  if (source.input_path)
    return Signal(apply_length_policy(read_signal_csv(*source.input_path), source.length_policy));
  GeneratorSpec spec = source.generator;
  if (!is_dyadic(spec.length)) {
    std::vector<double> probe(spec.length);
    spec.length = apply_length_policy(std::move(probe), source.length_policy).size();
  }
  return generate(spec).to_signal();
}

GridConfig resolve_grid(const RuleSelection &selection, std::size_t signal_length, int depth) {
  GridConfig grid = default_grid(signal_length, depth, selection.per_layer);
  if (!selection.sigma_grid.empty())
    grid.sigma_values = selection.sigma_grid;
  if (!selection.tau_grid.empty())
    grid.tau_values = selection.tau_grid;
  return grid;
}

std::vector<PairingRule> select_rules(const RuleSelection &selection, const Signal &signal,
                                      int depth, const ScatteringOptions &scattering,
                                      const ReadoutOptions &readout) {
  if (selection.fixed)
    return expand_rules(std::span(&*selection.fixed, 1), depth);
  return optimize_rules(signal, resolve_grid(selection, signal.size(), depth), scattering,
                        readout)
      .rules;
}

// ---- extract ---------------------------------------------------------------

ExtractResult run_extract(const ExtractOptions &options) {
  const Signal signal = load_signal(options.source);
  if (options.depth < 0 || options.depth > signal.log2_size())
    throw Error(ErrorKind::DepthExceedsSignal,
                "depth " + std::to_string(options.depth) + " exceeds log2 of signal length " +
                    std::to_string(signal.size()));
  const ScatteringOptions scattering{options.use_abs, options.normalize};
  const auto rules = select_rules(options.rules, signal, options.depth, scattering, {});
  ExtractResult result{propagate(signal, rules, options.depth, scattering)};

  if (!options.out_dir.empty()) {
    auto dump_layer = [&](const ScatteringLayer &layer, const fs::path &path) {
      std::vector<std::string> header{"t"};
      for (std::size_t q = 0; q < layer.cols(); ++q)
        header.push_back("q" + std::to_string(q));
      std::vector<std::vector<double>> rows(layer.rows());
      for (std::size_t n = 0; n < layer.rows(); ++n) {
        rows[n].push_back(static_cast<double>(node_domain_position(n + 1, layer.depth_index)));
        for (std::size_t q = 0; q < layer.cols(); ++q)
          rows[n].push_back(layer.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q)));
      }
      write_csv(path, header, rows);
    };
    dump_layer(result.network.top(), fs::path(options.out_dir) / "features.csv");
    if (options.all_layers)
      for (const auto &layer : result.network.layers)
        dump_layer(layer, fs::path(options.out_dir) /
                              ("features_layer" + std::to_string(layer.depth_index) + ".csv"));
  }
  return result;
}

// ---- reconstruct -----------------------------------------------------------

ordered_json config_json(const ReconstructOptions &o) {
  return {{"command", "reconstruct"},
          {"source", source_json(o.source)},
          {"depth", o.depth},
          {"rules", selection_json(o.rules)},
          {"intercept", o.intercept}};
}

ReconstructOptions reconstruct_options_from_json(const nlohmann::json &j) {
  const auto &c = unwrap_config(j);
  ReconstructOptions o;
  o.source = source_from_json(c.at("source"));
  o.depth = c.value("depth", o.depth);
  if (c.contains("rules"))
    o.rules = selection_from_json(c.at("rules"));
  o.intercept = c.value("intercept", false);
  return o;
}

ExperimentReport run_reconstruct(const ReconstructOptions &options) {
  const auto start = Clock::now();
  const Signal signal = load_signal(options.source);
  if (options.depth < 0 || options.depth > signal.log2_size())
    throw Error(ErrorKind::DepthExceedsSignal,
                "depth " + std::to_string(options.depth) + " exceeds log2 of signal length " +
                    std::to_string(signal.size()));
  const ReadoutOptions readout{options.intercept};
  const auto rules = select_rules(options.rules, signal, options.depth, {}, readout);
  const auto network = propagate(signal, rules, options.depth);
  const ReadoutFit fit = fit_reconstruction(network, signal, readout);

  ExperimentResult result;
  result.label = options.source.input_path
                     ? *options.source.input_path
                     : std::string(to_string(options.source.generator.family));
  fill_fit(result, fit);
  result.rules = rules;
  result.abscissa_name = "t";
  for (auto p : fit.report.positions)
    result.abscissa.push_back(static_cast<double>(p));
  result.r_squared_holdout =
      holdout_r_squared(reconstruction_design(network.top()), fit.report.targets, readout);

  ExperimentReport report;
  report.experiment = "reconstruct";
  report.config = config_json(options);
  report.results.push_back(result);
  report.runtime_seconds = seconds_since(start);

  if (!options.out_dir.empty()) {
    const fs::path dir(options.out_dir);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < result.abscissa.size(); ++i)
      rows.push_back({result.abscissa[i], result.actual[i], result.predicted[i]});
    write_csv(dir / "predictions.csv", std::vector<std::string>{"t", "actual", "predicted"}, rows);

    const auto nodes = predict_reconstruction(fit.model, network);
    const Signal dense = interpolate(nodes, signal.size());
    rows.clear();
    for (std::size_t t = 1; t <= signal.size(); ++t)
      rows.push_back({static_cast<double>(t), signal.at_position(t), dense.at_position(t)});
    write_csv(dir / "interpolated.csv", std::vector<std::string>{"t", "actual", "interpolated"},
              rows);
    write_report(options.out_dir, "report.json", report);
  }
  return report;
}

// ---- identify --------------------------------------------------------------

const char *to_string(Direction direction) {
  return direction == Direction::Forward ? "forward" : "inverse";
}

Direction parse_direction(std::string_view name) {
  if (name == "forward") return Direction::Forward;
  if (name == "inverse") return Direction::Inverse;
  throw Error(ErrorKind::Usage, "unknown direction '" + std::string(name) + "'");
}

IdentifyOptions default_identify_options(Family family) {
  IdentifyOptions o;
  o.base = GeneratorSpec::defaults(family);
  switch (family) {
  case Family::Sinusoid:
    o.theta_param = "beta";
    o.theta_start = -6.0;
    o.theta_step = 1.0;
    o.theta_count = 13;
    break;
  case Family::Exponential:
    o.theta_param = "beta";
    o.theta_start = -3.0;
    o.theta_step = 0.5;
    o.theta_count = 13;
    break;
  case Family::Logistic:
    o.theta_param = "beta";
    o.theta_start = 0.001;
    o.theta_step = 0.0005;
    o.theta_count = 19;
    break;
  case Family::Ar1:
    o.theta_param = "phi";
    o.theta_start = 0.05;
    o.theta_step = 0.05;
    o.theta_count = 19;
    break;
  }
  return o;
}

ordered_json config_json(const IdentifyOptions &o) {
  return {{"command", "identify"},
          {"generator", generator_json(o.base)},
          {"theta_param", o.theta_param},
          {"theta_start", o.theta_start},
          {"theta_step", o.theta_step},
          {"theta_count", o.theta_count},
          {"direction", to_string(o.direction)},
          {"transfer", to_string(o.transfer)},
          {"rules", selection_json(o.rules)},
          {"rule_objective", to_string(o.rule_objective)},
          {"depth", o.depth},
          {"intercept", o.intercept}};
}

IdentifyOptions identify_options_from_json(const nlohmann::json &j) {
  const auto &c = unwrap_config(j);
  IdentifyOptions o;
  o.base = generator_from_json(c.at("generator"));
  o.theta_param = c.value("theta_param", o.theta_param);
  o.theta_start = c.value("theta_start", o.theta_start);
  o.theta_step = c.value("theta_step", o.theta_step);
  o.theta_count = c.value("theta_count", o.theta_count);
  if (c.contains("direction"))
    o.direction = parse_direction(c.at("direction").get<std::string>());
  if (c.contains("transfer"))
    o.transfer = parse_transfer(c.at("transfer").get<std::string>());
  if (c.contains("rules"))
    o.rules = selection_from_json(c.at("rules"));
  if (c.contains("rule_objective"))
    o.rule_objective = parse_rule_objective(c.at("rule_objective").get<std::string>());
  o.depth = c.value("depth", o.depth);
  o.intercept = c.value("intercept", false);
  return o;
}

const char *to_string(RuleObjective objective) {
  return objective == RuleObjective::SweepFit ? "sweep-fit" : "reference";
}

RuleObjective parse_rule_objective(std::string_view name) {
  if (name == "sweep-fit") return RuleObjective::SweepFit;
  if (name == "reference") return RuleObjective::Reference;
  throw Error(ErrorKind::Usage, "unknown rule objective '" + std::string(name) +
                                    "' (expected sweep-fit or reference)");
}

ReadoutFit fit_sweep(const IdentifyOptions &options, const ParameterSweep &sweep) {
  const ReadoutOptions readout{options.intercept};
  return options.direction == Direction::Forward
             ? fit_parameter_forward(sweep, options.transfer, readout)
             : fit_parameter_inverse(sweep, options.transfer, readout);
}

ParameterSweep build_sweep(const IdentifyOptions &options, std::vector<PairingRule> &rules) {
  if (options.theta_count < 2)
    throw Error(ErrorKind::Usage, "a parameter sweep needs at least two theta values");
  if (!(options.theta_step != 0.0) || !std::isfinite(options.theta_step))
    throw Error(ErrorKind::Usage, "theta step must be non-zero");
  std::vector<double> thetas(options.theta_count);
  std::vector<Signal> realizations;
  realizations.reserve(options.theta_count);
  for (std::size_t i = 0; i < options.theta_count; ++i) {
    thetas[i] = options.theta_start + static_cast<double>(i) * options.theta_step;
    GeneratorSpec spec = options.base;
    set_parameter(spec, options.theta_param, thetas[i]);
    spec.seed = options.base.seed + i;
    const Trajectory trajectory = generate(spec);
    if (!trajectory.finite)
      throw Error(ErrorKind::NonFinite, std::string("realization ") + options.theta_param + "=" +
                                            format_double(thetas[i]) + " diverged");
    realizations.push_back(trajectory.to_signal());
  }
  const Signal &reference = realizations[realizations.size() / 2];
  if (options.depth < 0 || options.depth > reference.log2_size())
    throw Error(ErrorKind::DepthExceedsSignal,
                "depth " + std::to_string(options.depth) + " exceeds log2 of signal length " +
                    std::to_string(reference.size()));

  if (options.rules.fixed || options.rule_objective == RuleObjective::Reference) {
    rules = select_rules(options.rules, reference, options.depth, {}, {});
  } else {
    const GridConfig grid = resolve_grid(options.rules, reference.size(), options.depth);
    rules = grid_search(grid, reference.size(),
                        [&](std::span<const PairingRule> trial, int depth) {
                          try {
                            const auto sweep = make_sweep(thetas, realizations, trial, depth);
                            return fit_sweep(options, sweep).report.residuals.squaredNorm();
                          } catch (const Error &e) {
                            if (e.kind() == ErrorKind::DegenerateRule)
                              return std::numeric_limits<double>::infinity();
                            throw;
                          }
                        })
                .rules;
  }
  return make_sweep(std::move(thetas), std::move(realizations), rules, options.depth);
}

ExperimentReport run_identify(const IdentifyOptions &options) {
  const auto start = Clock::now();
  std::vector<PairingRule> rules;
  const ParameterSweep sweep = build_sweep(options, rules);
  const ReadoutOptions readout{options.intercept};
  const ReadoutFit fit = fit_sweep(options, sweep);

  ExperimentResult result;
  result.label = std::string(to_string(options.base.family)) + " " + to_string(options.direction);
  fill_fit(result, fit);
  result.rules = rules;
  result.abscissa_name = "theta";
  result.abscissa = sweep.theta_values;
  result.r_squared_holdout = holdout_r_squared(
      parameter_design(sweep, fit.model.kind, options.transfer), fit.report.targets, readout);

  ExperimentReport report;
  report.experiment = "identify";
  report.config = config_json(options);
  report.results.push_back(result);
  report.runtime_seconds = seconds_since(start);

  if (!options.out_dir.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < result.abscissa.size(); ++i)
      rows.push_back({result.abscissa[i], result.actual[i], result.predicted[i]});
    write_csv(fs::path(options.out_dir) / "sweep.csv",
              std::vector<std::string>{"theta", "target", "predicted"}, rows);
    write_report(options.out_dir, "report.json", report);
  }
  return report;
}

// ---- benchmark -------------------------------------------------------------

namespace {

void annotate(ExperimentResult &r, double reference, double threshold) {
  r.reference_r_squared = reference;
  r.threshold = threshold;
}

ExperimentReport reconstruction_series(const std::string &id, Family family,
                                       const std::vector<double> &betas, std::uint64_t seed,
                                       bool intercept, double reference, double threshold) {
  const auto start = Clock::now();
  ExperimentReport report;
  report.experiment = id;
  report.config = {{"seed", seed}, {"runs", ordered_json::array()}};
  for (double beta : betas) {
    ReconstructOptions o;
    o.source.generator = GeneratorSpec::defaults(family);
    o.source.generator.beta = beta;
    o.source.generator.seed = seed;
    o.intercept = intercept;
    report.config["runs"].push_back(config_json(o));
    ExperimentResult r = run_reconstruct(o).results.front();
    r.label = "beta=" + format_double(beta);
    annotate(r, reference, threshold);
    report.results.push_back(std::move(r));
  }
  report.runtime_seconds = seconds_since(start);
  return report;
}

} // namespace

ExperimentReport benchmark_sinusoid(std::uint64_t seed) {
  return reconstruction_series("A_sinusoid", Family::Sinusoid, {-6, -4, -2, -1, 1, 2, 4, 6}, seed,
                               false, 0.99, 0.99);
}

ExperimentReport benchmark_exponential(std::uint64_t seed) {
  // A constant offset is essential for exp(beta t / 3600); see README.
  return reconstruction_series("B_exponential", Family::Exponential, {-3, -1, 1, 3}, seed, true,
                               0.99, 0.99);
}

ExperimentReport benchmark_logistic(std::uint64_t seed) {
  const auto start = Clock::now();
  ExperimentReport report;
  report.experiment = "C_logistic";

  ReconstructOptions series;
  series.source.generator = GeneratorSpec::defaults(Family::Logistic);
  series.source.generator.seed = seed;
  ExperimentResult ts = run_reconstruct(series).results.front();
  ts.label = "timeseries";
  annotate(ts, 0.9611, 0.90);

  IdentifyOptions state = default_identify_options(Family::Logistic);
  state.base.seed = seed;
  state.direction = Direction::Forward;
  ExperimentResult st = run_identify(state).results.front();
  st.label = "state";
  annotate(st, 0.915, 0.85);

  report.config = {{"seed", seed}, {"runs", {config_json(series), config_json(state)}}};
  report.results = {std::move(ts), std::move(st)};
  report.runtime_seconds = seconds_since(start);
  return report;
}

ExperimentReport benchmark_ar1(std::uint64_t seed) {
  const auto start = Clock::now();
  ExperimentReport report;
  report.experiment = "D_ar1";
  report.config = {{"seed", seed}, {"runs", ordered_json::array()}};
  for (InputKind input : {InputKind::Step, InputKind::Pulse}) {
    IdentifyOptions o = default_identify_options(Family::Ar1);
    o.base.input = input;
    o.base.seed = seed;
    o.direction = Direction::Inverse;
    report.config["runs"].push_back(config_json(o));
    ExperimentResult r = run_identify(o).results.front();
    r.label = to_string(input);
    annotate(r, 0.9663, 0.90);
    report.results.push_back(std::move(r));
  }
  report.runtime_seconds = seconds_since(start);
  return report;
}

BenchmarkResult run_benchmark(const BenchmarkOptions &options) {
  BenchmarkResult out;
  out.reports.push_back(benchmark_sinusoid(options.seed));
  out.reports.push_back(benchmark_exponential(options.seed));
  out.reports.push_back(benchmark_logistic(options.seed));
  out.reports.push_back(benchmark_ar1(options.seed));

  for (const auto &report : out.reports)
    for (const auto &r : report.results) {
      SummaryRow row;
      row.experiment = report.experiment;
      row.label = r.label;
      row.r_squared = r.r_squared;
      row.reference_r_squared = r.reference_r_squared.value_or(0.0);
      row.threshold = r.threshold.value_or(0.0);
      row.pass = r.r_squared && *r.r_squared >= row.threshold;
      out.summary.push_back(row);
    }

  if (!options.out_dir.empty()) {
    for (const auto &report : out.reports)
      write_report(options.out_dir, report.experiment + ".json", report);
    std::string csv = "experiment,label,r_squared,reference_r_squared,threshold,pass\n";
    for (const auto &row : out.summary)
      csv += row.experiment + "," + row.label + "," +
             (row.r_squared ? format_double(*row.r_squared) : std::string("nan")) + "," +
             format_double(row.reference_r_squared) + "," + format_double(row.threshold) + "," +
             (row.pass ? "1" : "0") + "\n";
    write_text(fs::path(options.out_dir) / "summary.csv", csv);
  }
  return out;
}

} // namespace hsn
