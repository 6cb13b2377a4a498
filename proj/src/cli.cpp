#include "hsn/commands.hpp"
#include "hsn/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace hsn {

namespace {

struct CommonFlags {
  std::string input;
  std::string family = "sinusoid";
  std::vector<std::string> params;
  int depth = 4;
  std::vector<double> sigma_grid;
  std::vector<long long> tau_grid;
  std::optional<double> sigma;
  std::optional<long long> tau;
  bool per_layer = false;
  bool pad = false;
  bool truncate = false;
  std::uint64_t seed = 42;
  std::string out = ".";
};

void add_source_flags(CLI::App *app, CommonFlags &f) {
  app->add_option("--input", f.input, "CSV file with one sample per row (last column is used)");
  app->add_option("--family", f.family, "Generator family: sinusoid, exponential, logistic, ar1");
  app->add_option("--param", f.params, "Generator parameter K=V (beta, C, x0, phi, input, noise, length)");
  app->add_flag("--pad", f.pad, "Zero-pad non-dyadic input to the next power of two");
  app->add_flag("--truncate", f.truncate, "Truncate non-dyadic input to the previous power of two");
}

void add_rule_flags(CLI::App *app, CommonFlags &f) {
  app->add_option("--depth", f.depth, "Number of scattering layers J")->capture_default_str();
  app->add_option("--sigma-grid", f.sigma_grid, "Candidate sigma values")->delimiter(',');
  app->add_option("--tau-grid", f.tau_grid, "Candidate tau values")->delimiter(',');
  app->add_option("--sigma", f.sigma, "Fixed sigma (skips the rule search)");
  app->add_option("--tau", f.tau, "Fixed tau (skips the rule search)");
  app->add_flag("--per-layer", f.per_layer, "Search one rule per transition greedily");
}

void add_output_flags(CLI::App *app, CommonFlags &f) {
  app->add_option("--seed", f.seed, "Random seed for noisy generators")->capture_default_str();
  app->add_option("--out", f.out, "Output directory")->capture_default_str();
}

void apply_params(GeneratorSpec &spec, const std::vector<std::string> &params) {
  for (const auto &p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorKind::Usage, "--param expects K=V, got '" + p + "'");
    set_parameter(spec, std::string_view(p).substr(0, eq), std::string_view(p).substr(eq + 1));
  }
}

SignalSource make_source(const CommonFlags &f) {
  if (f.pad && f.truncate)
    throw Error(ErrorKind::Usage, "--pad and --truncate are mutually exclusive");
  SignalSource s;
  if (!f.input.empty())
    s.input_path = f.input;
  s.generator = GeneratorSpec::defaults(parse_family(f.family));
  s.generator.seed = f.seed;
  apply_params(s.generator, f.params);
  s.length_policy = f.pad ? LengthPolicy::Pad : f.truncate ? LengthPolicy::Truncate
                                                           : LengthPolicy::Reject;
  return s;
}

RuleSelection make_selection(const CommonFlags &f) {
  RuleSelection s;
  if (f.sigma || f.tau)
    s.fixed = PairingRule{f.sigma.value_or(0.0), f.tau.value_or(1)};
  s.sigma_grid = f.sigma_grid;
  s.tau_grid = f.tau_grid;
  s.per_layer = f.per_layer;
  return s;
}

void print_result(const ExperimentResult &r) {
  std::cout << r.label << ": r_squared="
            << (r.r_squared ? format_double(*r.r_squared) : std::string("undefined"));
  if (r.r_squared_holdout)
    std::cout << " holdout=" << format_double(*r.r_squared_holdout);
  if (r.rank_deficient)
    std::cout << " [rank-deficient]";
  std::cout << "\n";
}

} // namespace

int run_cli(int argc, const char *const *argv) {
  CLI::App app{"Haar scattering network features, reconstruction and identification"};
  app.require_subcommand(1);

  CommonFlags ef;
  bool no_abs = false;
  bool normalize = false;
  bool all_layers = false;
  auto *extract = app.add_subcommand("extract", "Dump top-layer scattering features as CSV");
  add_source_flags(extract, ef);
  add_rule_flags(extract, ef);
  add_output_flags(extract, ef);
  extract->add_flag("--no-abs", no_abs, "Keep signed differences (linear cascade)");
  extract->add_flag("--normalize", normalize, "Scale pair sums/differences by 2^(-1/2)");
  extract->add_flag("--all-layers", all_layers, "Also write features_layer<j>.csv for every layer");

  CommonFlags rf;
  bool r_intercept = false;
  std::string r_config;
  auto *reconstruct = app.add_subcommand("reconstruct", "Fit the reconstruction readout");
  add_source_flags(reconstruct, rf);
  add_rule_flags(reconstruct, rf);
  add_output_flags(reconstruct, rf);
  reconstruct->add_flag("--intercept", r_intercept, "Add a constant column to the readout");
  reconstruct->add_option("--config", r_config, "Re-run from a report or config JSON file");

  CommonFlags idf;
  idf.family = "ar1";
  bool i_intercept = false;
  std::string i_config;
  std::string direction = "inverse";
  std::string transfer = "identity";
  std::string rule_objective = "sweep-fit";
  std::string theta_param;
  std::optional<double> theta_start;
  std::optional<double> theta_step;
  std::optional<std::size_t> theta_count;
  auto *identify = app.add_subcommand("identify", "Fit a parameter-sweep readout");
  identify->add_option("--family", idf.family, "Generator family")->capture_default_str();
  identify->add_option("--param", idf.params, "Fixed generator parameter K=V");
  add_rule_flags(identify, idf);
  add_output_flags(identify, idf);
  identify->add_option("--theta-param", theta_param, "Swept parameter (default beta, or phi for ar1)");
  identify->add_option("--theta-start", theta_start, "First theta value");
  identify->add_option("--theta-step", theta_step, "Theta step");
  identify->add_option("--theta-count", theta_count, "Number of theta values");
  identify->add_option("--direction", direction, "forward (predict x(N/2)) or inverse (predict theta)")
      ->capture_default_str();
  identify->add_option("--transfer", transfer, "identity, abs or log1p")->capture_default_str();
  identify->add_option("--rule-objective", rule_objective,
                       "sweep-fit (readout residual) or reference (middle realization reconstruction)")
      ->capture_default_str();
  identify->add_flag("--intercept", i_intercept, "Add a constant column to the readout");
  identify->add_option("--config", i_config, "Re-run from a report or config JSON file");

  std::uint64_t b_seed = 42;
  std::string b_out = ".";
  auto *benchmark = app.add_subcommand("benchmark", "Run the four reference experiments");
  benchmark->add_option("--seed", b_seed, "Base seed")->capture_default_str();
  benchmark->add_option("--out", b_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*extract) {
      ExtractOptions o;
      o.source = make_source(ef);
      o.depth = ef.depth;
      o.rules = make_selection(ef);
      o.use_abs = !no_abs;
      o.normalize = normalize;
      o.all_layers = all_layers;
      o.out_dir = ef.out;
      const auto result = run_extract(o);
      const auto &top = result.network.top();
      std::cout << "wrote " << top.rows() << " nodes x " << top.cols() << " features\n";
    } else if (*reconstruct) {
      ReconstructOptions o;
      if (!r_config.empty()) {
        o = reconstruct_options_from_json(nlohmann::json::parse(read_text(r_config)));
      } else {
        o.source = make_source(rf);
        o.depth = rf.depth;
        o.rules = make_selection(rf);
        o.intercept = r_intercept;
      }
      o.out_dir = rf.out;
      print_result(run_reconstruct(o).results.front());
    } else if (*identify) {
      IdentifyOptions o;
      if (!i_config.empty()) {
        o = identify_options_from_json(nlohmann::json::parse(read_text(i_config)));
      } else {
        o = default_identify_options(parse_family(idf.family));
        o.base.seed = idf.seed;
        apply_params(o.base, idf.params);
        if (!theta_param.empty())
          o.theta_param = theta_param;
        o.theta_start = theta_start.value_or(o.theta_start);
        o.theta_step = theta_step.value_or(o.theta_step);
        o.theta_count = theta_count.value_or(o.theta_count);
        o.direction = parse_direction(direction);
        o.transfer = parse_transfer(transfer);
        o.rules = make_selection(idf);
        o.rule_objective = parse_rule_objective(rule_objective);
        o.depth = idf.depth;
        o.intercept = i_intercept;
      }
      o.out_dir = idf.out;
      print_result(run_identify(o).results.front());
    } else if (*benchmark) {
      const auto result = run_benchmark({b_seed, b_out});
      for (const auto &row : result.summary)
        std::cout << row.experiment << " " << row.label << " r_squared="
                  << (row.r_squared ? format_double(*row.r_squared) : std::string("undefined"))
                  << " reference=" << format_double(row.reference_r_squared)
                  << (row.pass ? " PASS" : " FAIL") << "\n";
    }
  } catch (const Error &e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

} // namespace hsn
