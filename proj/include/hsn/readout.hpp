#pragma once

#include "hsn/haar.hpp"
#include "hsn/scattering.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hsn {

enum class ReadoutKind { Reconstruction, ForwardParameter, InverseParameter };

// Elementwise map applied to averaged features before a parameter fit.
enum class Transfer { Identity, Abs, Log1p };

const char *to_string(ReadoutKind kind);
const char *to_string(Transfer transfer);
Transfer parse_transfer(std::string_view name);
double apply_transfer(Transfer transfer, double value);

struct ReadoutOptions {
  // Adds a constant column to the design. Neither readout form has one.
  bool intercept = false;
};

struct ReadoutModel {
  Eigen::VectorXd beta; // one coefficient per feature of the fitted layer
  double intercept = 0.0;
  bool has_intercept = false;
  int depth = 0;
  ReadoutKind kind = ReadoutKind::Reconstruction;
  Transfer transfer = Transfer::Identity;
};

struct FitReport {
  // Empty when the targets have zero variance.
  std::optional<double> r_squared;
  Eigen::VectorXd targets;
  Eigen::VectorXd predictions;
  Eigen::VectorXd residuals; // targets - predictions
  // Domain positions of the targets (reconstruction fits only).
  std::vector<std::size_t> positions;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
  std::size_t zero_theta_rows = 0;
};

struct ReadoutFit {
  ReadoutModel model;
  FitReport report;
};

struct LeastSquaresSolution {
  Eigen::VectorXd coefficients;
  Eigen::Index rank = 0;
};

/// Minimum-norm least-squares solution via complete orthogonal decomposition.
LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd &design,
                                         const Eigen::VectorXd &targets);

double r_squared(std::span<const double> actual, std::span<const double> predicted);
double r_squared(const Eigen::VectorXd &actual, const Eigen::VectorXd &predicted);

// 1-based node n of layer j sits at domain position (n - 1) * 2^j + 1.
std::size_t node_domain_position(std::size_t n, int layer_index);

// Row n holds t_n * S_j(n, k).
Eigen::MatrixXd reconstruction_design(const ScatteringLayer &layer);

ReadoutFit fit_reconstruction(const ScatteringNetwork &network,
                              const Signal &signal,
                              const ReadoutOptions &options = {});

struct NodeValue {
  std::size_t position;
  double value;
};

std::vector<NodeValue> predict_reconstruction(const ReadoutModel &model,
                                              const ScatteringNetwork &network);

/// Piecewise-linear interpolation through node values, held constant outside
/// the first and last node positions.
Signal interpolate(std::span<const NodeValue> nodes, std::size_t length);

struct ParameterSweep {
  std::vector<double> theta_values;
  std::vector<Signal> realizations;
  // One row of node-averaged top-layer features per theta.
  Eigen::MatrixXd averaged_features;
};

// Builds the averaged-feature matrix for each realization under fixed rules.
ParameterSweep make_sweep(std::vector<double> theta_values,
                          std::vector<Signal> realizations,
                          std::span<const PairingRule> rules, int depth,
                          const ScatteringOptions &options = {});

ParameterSweep subset(const ParameterSweep &sweep,
                      std::span<const std::size_t> indices);

// Sample x(N/2) (1-based) of every realization.
Eigen::VectorXd midpoint_targets(const ParameterSweep &sweep);

// Forward rows are theta_i * f(F_ik); inverse rows are f(F_ik).
Eigen::MatrixXd parameter_design(const ParameterSweep &sweep, ReadoutKind kind,
                                 Transfer transfer);

ReadoutFit fit_parameter_forward(const ParameterSweep &sweep,
                                 Transfer transfer = Transfer::Identity,
                                 const ReadoutOptions &options = {});

ReadoutFit fit_parameter_inverse(const ParameterSweep &sweep,
                                 Transfer transfer = Transfer::Identity,
                                 const ReadoutOptions &options = {});

// Applies a forward or inverse model to a sweep's features.
Eigen::VectorXd predict_parameter(const ReadoutModel &model,
                                  const ParameterSweep &sweep);

/// Fits on even-indexed rows and scores R^2 on the odd-indexed rows.
/// Empty when there are too few rows or the held-out targets are constant.
std::optional<double> holdout_r_squared(const Eigen::MatrixXd &design,
                                        const Eigen::VectorXd &targets,
                                        const ReadoutOptions &options = {});

} // namespace hsn
