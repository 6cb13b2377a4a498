#include "hsn/scattering.hpp"

#include "hsn/error.hpp"

#include <cmath>
#include <string>

namespace hsn {

PairSum scatter_pair(double alpha, double beta) noexcept {
  return {alpha + beta, std::abs(alpha - beta)};
}

MaxMin recover_max_min(double sum, double absdiff) {
  if (!(absdiff >= 0.0))
    throw Error(ErrorKind::Domain, "absolute difference must be non-negative");
  return {(sum + absdiff) / 2.0, (sum - absdiff) / 2.0};
}

std::size_t partner_offset(const PairingRule &rule, std::size_t row_count,
                           int layer_index, std::size_t signal_length) {
  if (row_count == 0)
    throw Error(ErrorKind::Dimension, "pairing needs at least one node");
  // llround rounds half away from zero.
  const long long scaled = std::llround(std::ldexp(
      static_cast<double>(signal_length) * rule.sigma, 1 - layer_index));
  const auto rows = static_cast<long long>(row_count);
  long long offset = (scaled % rows + rule.tau % rows) % rows;
  if (offset < 0)
    offset += rows;
  return static_cast<std::size_t>(offset);
}

std::vector<NodePair> pairing_indices(const PairingRule &rule,
                                      std::size_t row_count, int layer_index,
                                      std::size_t signal_length) {
  if (row_count % 2 != 0)
    throw Error(ErrorKind::DyadicLength,
                "pairing needs an even node count, got " + std::to_string(row_count));
  const std::size_t offset =
      partner_offset(rule, row_count, layer_index, signal_length);
  if (offset == 0)
    throw Error(ErrorKind::DegenerateRule,
                "rule (sigma=" + std::to_string(rule.sigma) +
                    ", tau=" + std::to_string(rule.tau) + ") pairs every node of layer " +
                    std::to_string(layer_index) + " (" + std::to_string(row_count) +
                    " rows) with itself");
  std::vector<NodePair> pairs(row_count);
  for (std::size_t n = 0; n < row_count; ++n)
    pairs[n] = {n, (n + offset) % row_count};
  return pairs;
}

ScatteringLayer build_layer(const ScatteringLayer &prev, const PairingRule &rule,
                            const ScatteringOptions &options) {
  const std::size_t rows = prev.rows();
  if (rows < 2 || rows % 2 != 0)
    throw Error(ErrorKind::DyadicLength,
                "layer " + std::to_string(prev.depth_index) + " has " +
                    std::to_string(rows) + " rows; need an even count >= 2");
  const auto pairs =
      pairing_indices(rule, rows, prev.depth_index, prev.signal_length());

  const double scale = options.normalize ? 1.0 / std::sqrt(2.0) : 1.0;
  const Eigen::Index out_rows = static_cast<Eigen::Index>(rows / 2);
  const Eigen::Index in_cols = prev.values.cols();

  ScatteringLayer next;
  next.depth_index = prev.depth_index + 1;
  next.values.resize(out_rows, 2 * in_cols);
  for (Eigen::Index n = 0; n < out_rows; ++n) {
    const auto a = static_cast<Eigen::Index>(pairs[static_cast<std::size_t>(n)].a);
    const auto b = static_cast<Eigen::Index>(pairs[static_cast<std::size_t>(n)].b);
    for (Eigen::Index q = 0; q < in_cols; ++q) {
      const double x = prev.values(a, q);
      const double y = prev.values(b, q);
      const double diff = x - y;
      next.values(n, 2 * q) = scale * (x + y);
      next.values(n, 2 * q + 1) = scale * (options.use_abs ? std::abs(diff) : diff);
    }
  }
  return next;
}

std::vector<PairingRule> expand_rules(std::span<const PairingRule> rules,
                                      int depth) {
  if (depth < 0)
    throw Error(ErrorKind::Usage, "depth must be non-negative");
  if (depth == 0)
    return {};
  if (rules.size() == 1)
    return std::vector<PairingRule>(static_cast<std::size_t>(depth), rules[0]);
  if (rules.size() != static_cast<std::size_t>(depth))
    throw Error(ErrorKind::Usage,
                "expected one pairing rule or one per transition (" +
                    std::to_string(depth) + "), got " + std::to_string(rules.size()));
  return {rules.begin(), rules.end()};
}

ScatteringLayer input_layer(const Signal &signal) {
  ScatteringLayer layer;
  layer.depth_index = 0;
  layer.values = Eigen::Map<const Eigen::VectorXd>(
      signal.samples().data(), static_cast<Eigen::Index>(signal.size()));
  return layer;
}

ScatteringNetwork propagate(const Signal &signal,
                            std::span<const PairingRule> rules, int depth,
                            const ScatteringOptions &options) {
  if (depth > signal.log2_size())
    throw Error(ErrorKind::DepthExceedsSignal,
                "depth " + std::to_string(depth) + " exceeds log2 of signal length " +
                    std::to_string(signal.size()));
  ScatteringNetwork network;
  network.depth = depth;
  network.rules = expand_rules(rules, depth);
  network.layers.reserve(static_cast<std::size_t>(depth) + 1);
  network.layers.push_back(input_layer(signal));
  for (const auto &rule : network.rules)
    network.layers.push_back(build_layer(network.layers.back(), rule, options));
  return network;
}

Eigen::VectorXd average_features(const ScatteringLayer &layer) {
  if (layer.values.size() == 0)
    throw Error(ErrorKind::Dimension, "cannot average an empty layer");
  return layer.values.colwise().mean().transpose();
}

} // namespace hsn
