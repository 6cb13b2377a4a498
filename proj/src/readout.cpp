#include "hsn/readout.hpp"

#include "hsn/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace hsn {

const char *to_string(ReadoutKind kind) {
  switch (kind) {
  case ReadoutKind::Reconstruction: return "reconstruction";
  case ReadoutKind::ForwardParameter: return "forward-parameter";
  case ReadoutKind::InverseParameter: return "inverse-parameter";
  }
  return "unknown";
}

const char *to_string(Transfer transfer) {
  switch (transfer) {
  case Transfer::Identity: return "identity";
  case Transfer::Abs: return "abs";
  case Transfer::Log1p: return "log1p";
  }
  return "unknown";
}

Transfer parse_transfer(std::string_view name) {
  if (name == "identity") return Transfer::Identity;
  if (name == "abs") return Transfer::Abs;
  if (name == "log1p") return Transfer::Log1p;
  throw Error(ErrorKind::Usage, "unknown transfer function '" + std::string(name) +
                                    "' (expected identity, abs or log1p)");
}

double apply_transfer(Transfer transfer, double value) {
  switch (transfer) {
  case Transfer::Identity: return value;
  case Transfer::Abs: return std::abs(value);
  case Transfer::Log1p: return std::log1p(std::abs(value));
  }
  return value;
}

LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd &design,
                                         const Eigen::VectorXd &targets) {
  if (design.rows() == 0 || design.cols() == 0)
    throw Error(ErrorKind::Dimension, "least squares needs a non-empty design");
  if (design.rows() != targets.size())
    throw Error(ErrorKind::Dimension,
                "design has " + std::to_string(design.rows()) + " rows but " +
                    std::to_string(targets.size()) + " targets");
  if (!design.allFinite() || !targets.allFinite())
    throw Error(ErrorKind::NonFinite, "least squares input is not finite");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  return {cod.solve(targets), cod.rank()};
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.size() < 2)
    throw Error(ErrorKind::Dimension,
                "r_squared needs two equal-length vectors of at least 2 values");
  double mean = 0.0;
  for (double a : actual)
    mean += a;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double r = actual[i] - predicted[i];
    const double c = actual[i] - mean;
    ss_res += r * r;
    ss_tot += c * c;
  }
  if (!std::isfinite(ss_res) || !std::isfinite(ss_tot))
    throw Error(ErrorKind::NonFinite, "r_squared input is not finite");
  if (ss_tot == 0.0)
    throw Error(ErrorKind::UndefinedVariance,
                "r_squared is undefined for constant targets");
  return 1.0 - ss_res / ss_tot;
}

double r_squared(const Eigen::VectorXd &actual, const Eigen::VectorXd &predicted) {
  return r_squared(std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())),
                   std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())));
}

std::size_t node_domain_position(std::size_t n, int layer_index) {
  if (n < 1)
    throw Error(ErrorKind::Domain, "node indices are 1-based");
  return ((n - 1) << layer_index) + 1;
}

Eigen::MatrixXd reconstruction_design(const ScatteringLayer &layer) {
  Eigen::MatrixXd design = layer.values;
  for (Eigen::Index n = 0; n < design.rows(); ++n)
    design.row(n) *= static_cast<double>(
        node_domain_position(static_cast<std::size_t>(n) + 1, layer.depth_index));
  return design;
}

namespace {

struct LinearFit {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  Eigen::Index rank = 0;
  Eigen::VectorXd predictions;
};

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd &design) {
  Eigen::MatrixXd out(design.rows(), design.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(design.cols()) = design;
  return out;
}

LinearFit fit_linear(const Eigen::MatrixXd &design, const Eigen::VectorXd &targets,
                     const ReadoutOptions &options) {
  LinearFit fit;
  if (options.intercept) {
    const Eigen::MatrixXd augmented = with_intercept(design);
    auto solution = solve_least_squares(augmented, targets);
    fit.intercept = solution.coefficients(0);
    fit.beta = solution.coefficients.tail(design.cols());
    fit.rank = solution.rank;
  } else {
    auto solution = solve_least_squares(design, targets);
    fit.beta = std::move(solution.coefficients);
    fit.rank = solution.rank;
  }
  fit.predictions = design * fit.beta;
  fit.predictions.array() += fit.intercept;
  return fit;
}

FitReport make_report(const Eigen::VectorXd &targets, const LinearFit &fit,
                      Eigen::Index columns) {
  FitReport report;
  report.targets = targets;
  report.predictions = fit.predictions;
  report.residuals = targets - fit.predictions;
  report.rank = fit.rank;
  report.rank_deficient = fit.rank < columns;
  try {
    report.r_squared = r_squared(targets, fit.predictions);
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::UndefinedVariance && e.kind() != ErrorKind::Dimension)
      throw;
  }
  return report;
}

} // namespace

Eigen::MatrixXd parameter_design(const ParameterSweep &sweep, ReadoutKind kind,
                                 Transfer transfer) {
  Eigen::MatrixXd design = sweep.averaged_features.unaryExpr(
      [transfer](double v) { return apply_transfer(transfer, v); });
  if (kind == ReadoutKind::ForwardParameter)
    for (Eigen::Index i = 0; i < design.rows(); ++i)
      design.row(i) *= sweep.theta_values[static_cast<std::size_t>(i)];
  return design;
}

namespace {

ReadoutFit fit_parameter(const ParameterSweep &sweep, ReadoutKind kind,
                         Transfer transfer, const ReadoutOptions &options,
                         const Eigen::VectorXd &targets) {
  if (sweep.theta_values.empty())
    throw Error(ErrorKind::Dimension, "parameter sweep is empty");
  const Eigen::MatrixXd design = parameter_design(sweep, kind, transfer);
  const LinearFit fit = fit_linear(design, targets, options);

  ReadoutFit out;
  out.model.beta = fit.beta;
  out.model.intercept = fit.intercept;
  out.model.has_intercept = options.intercept;
  out.model.depth = static_cast<int>(std::bit_width(
                        static_cast<std::size_t>(design.cols()))) - 1;
  out.model.kind = kind;
  out.model.transfer = transfer;
  out.report = make_report(targets, fit, design.cols() + (options.intercept ? 1 : 0));
  if (kind == ReadoutKind::ForwardParameter)
    out.report.zero_theta_rows = static_cast<std::size_t>(
        std::count(sweep.theta_values.begin(), sweep.theta_values.end(), 0.0));
  return out;
}

} // namespace

ReadoutFit fit_reconstruction(const ScatteringNetwork &network, const Signal &signal,
                              const ReadoutOptions &options) {
  const ScatteringLayer &top = network.top();
  if (top.signal_length() != signal.size())
    throw Error(ErrorKind::Dimension, "network was not built on a signal of this length");
  const Eigen::MatrixXd design = reconstruction_design(top);

  ReadoutFit out;
  std::vector<std::size_t> positions(top.rows());
  Eigen::VectorXd targets(design.rows());
  for (std::size_t n = 0; n < top.rows(); ++n) {
    positions[n] = node_domain_position(n + 1, top.depth_index);
    targets(static_cast<Eigen::Index>(n)) = signal.at_position(positions[n]);
  }
  const LinearFit fit = fit_linear(design, targets, options);
  out.model.beta = fit.beta;
  out.model.intercept = fit.intercept;
  out.model.has_intercept = options.intercept;
  out.model.depth = network.depth;
  out.model.kind = ReadoutKind::Reconstruction;
  out.report = make_report(targets, fit, design.cols() + (options.intercept ? 1 : 0));
  out.report.positions = std::move(positions);
  return out;
}

std::vector<NodeValue> predict_reconstruction(const ReadoutModel &model,
                                              const ScatteringNetwork &network) {
  const ScatteringLayer &top = network.top();
  if (model.depth != network.depth ||
      static_cast<std::size_t>(model.beta.size()) != top.cols())
    throw Error(ErrorKind::Dimension,
                "readout model (depth " + std::to_string(model.depth) + ", " +
                    std::to_string(model.beta.size()) +
                    " features) does not match network (depth " +
                    std::to_string(network.depth) + ", " + std::to_string(top.cols()) +
                    " features)");
  const Eigen::VectorXd values =
      (reconstruction_design(top) * model.beta).array() + model.intercept;
  std::vector<NodeValue> out(top.rows());
  for (std::size_t n = 0; n < top.rows(); ++n)
    out[n] = {node_domain_position(n + 1, top.depth_index),
              values(static_cast<Eigen::Index>(n))};
  return out;
}

Signal interpolate(std::span<const NodeValue> nodes, std::size_t length) {
  if (nodes.empty())
    throw Error(ErrorKind::Dimension, "interpolation needs at least one node");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].position < 1 || nodes[i].position > length)
      throw Error(ErrorKind::Domain, "node position " + std::to_string(nodes[i].position) +
                                         " outside [1, " + std::to_string(length) + "]");
    if (i > 0 && nodes[i].position <= nodes[i - 1].position)
      throw Error(ErrorKind::Domain, "node positions must be strictly increasing");
  }
  std::vector<double> out(length);
  std::size_t seg = 0;
  for (std::size_t t = 1; t <= length; ++t) {
    if (t <= nodes.front().position) {
      out[t - 1] = nodes.front().value;
    } else if (t >= nodes.back().position) {
      out[t - 1] = nodes.back().value;
    } else {
      while (nodes[seg + 1].position < t)
        ++seg;
      const auto &lo = nodes[seg];
      const auto &hi = nodes[seg + 1];
      const double w = static_cast<double>(t - lo.position) /
                       static_cast<double>(hi.position - lo.position);
      out[t - 1] = lo.value + w * (hi.value - lo.value);
    }
  }
  return Signal(std::move(out));
}

ParameterSweep make_sweep(std::vector<double> theta_values,
                          std::vector<Signal> realizations,
                          std::span<const PairingRule> rules, int depth,
                          const ScatteringOptions &options) {
  if (theta_values.empty())
    throw Error(ErrorKind::Dimension, "parameter sweep needs at least one theta");
  if (theta_values.size() != realizations.size())
    throw Error(ErrorKind::Dimension, "one realization per theta is required");
  const std::size_t length = realizations.front().size();
  for (const auto &r : realizations)
    if (r.size() != length)
      throw Error(ErrorKind::Dimension, "all realizations must share one length");
  if (theta_values.size() >= 2) {
    const double step = theta_values[1] - theta_values[0];
    double scale = std::abs(step);
    for (double th : theta_values)
      scale = std::max(scale, std::abs(th));
    for (std::size_t i = 1; i < theta_values.size(); ++i) {
      const double d = theta_values[i] - theta_values[i - 1];
      if (d == 0.0 || (d > 0) != (step > 0) || std::abs(d - step) > 1e-9 * scale)
        throw Error(ErrorKind::Usage,
                    "theta values must be strictly monotone with a constant step");
    }
  }

  ParameterSweep sweep;
  sweep.theta_values = std::move(theta_values);
  sweep.realizations = std::move(realizations);
  for (std::size_t i = 0; i < sweep.realizations.size(); ++i) {
    const auto network = propagate(sweep.realizations[i], rules, depth, options);
    const Eigen::VectorXd avg = average_features(network.top());
    if (i == 0)
      sweep.averaged_features.resize(static_cast<Eigen::Index>(sweep.realizations.size()),
                                     avg.size());
    sweep.averaged_features.row(static_cast<Eigen::Index>(i)) = avg.transpose();
  }
  return sweep;
}

ParameterSweep subset(const ParameterSweep &sweep, std::span<const std::size_t> indices) {
  ParameterSweep out;
  out.averaged_features.resize(static_cast<Eigen::Index>(indices.size()),
                               sweep.averaged_features.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= sweep.theta_values.size())
      throw Error(ErrorKind::Dimension, "sweep subset index out of range");
    out.theta_values.push_back(sweep.theta_values[i]);
    out.realizations.push_back(sweep.realizations[i]);
    out.averaged_features.row(static_cast<Eigen::Index>(k)) =
        sweep.averaged_features.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

Eigen::VectorXd midpoint_targets(const ParameterSweep &sweep) {
  Eigen::VectorXd targets(static_cast<Eigen::Index>(sweep.realizations.size()));
  for (std::size_t i = 0; i < sweep.realizations.size(); ++i) {
    const Signal &r = sweep.realizations[i];
    targets(static_cast<Eigen::Index>(i)) = r.at_position(r.size() / 2);
  }
  return targets;
}

ReadoutFit fit_parameter_forward(const ParameterSweep &sweep, Transfer transfer,
                                 const ReadoutOptions &options) {
  return fit_parameter(sweep, ReadoutKind::ForwardParameter, transfer, options,
                       midpoint_targets(sweep));
}

ReadoutFit fit_parameter_inverse(const ParameterSweep &sweep, Transfer transfer,
                                 const ReadoutOptions &options) {
  const Eigen::VectorXd targets = Eigen::Map<const Eigen::VectorXd>(
      sweep.theta_values.data(), static_cast<Eigen::Index>(sweep.theta_values.size()));
  return fit_parameter(sweep, ReadoutKind::InverseParameter, transfer, options, targets);
}

Eigen::VectorXd predict_parameter(const ReadoutModel &model, const ParameterSweep &sweep) {
  if (model.kind == ReadoutKind::Reconstruction)
    throw Error(ErrorKind::Usage, "reconstruction models do not map parameters");
  if (model.beta.size() != sweep.averaged_features.cols())
    throw Error(ErrorKind::Dimension, "model and sweep feature counts differ");
  Eigen::VectorXd out = parameter_design(sweep, model.kind, model.transfer) * model.beta;
  out.array() += model.intercept;
  return out;
}

std::optional<double> holdout_r_squared(const Eigen::MatrixXd &design,
                                        const Eigen::VectorXd &targets,
                                        const ReadoutOptions &options) {
  const Eigen::Index rows = design.rows();
  const Eigen::Index train_rows = (rows + 1) / 2;
  const Eigen::Index test_rows = rows / 2;
  if (test_rows < 2)
    return std::nullopt;
  Eigen::MatrixXd train(train_rows, design.cols());
  Eigen::MatrixXd test(test_rows, design.cols());
  Eigen::VectorXd train_y(train_rows);
  Eigen::VectorXd test_y(test_rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (i % 2 == 0) {
      train.row(i / 2) = design.row(i);
      train_y(i / 2) = targets(i);
    } else {
      test.row(i / 2) = design.row(i);
      test_y(i / 2) = targets(i);
    }
  }
  const LinearFit fit = fit_linear(train, train_y, options);
  Eigen::VectorXd predicted = test * fit.beta;
  predicted.array() += fit.intercept;
  try {
    return r_squared(test_y, predicted);
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::UndefinedVariance)
      return std::nullopt;
    throw;
  }
}

} // namespace hsn
