#pragma once

#include "hsn/haar.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace hsn {

/// Node pairing for one layer transition: node n is paired with
/// b_n = n + round(2^(1-j) * N * sigma) + tau (mod row count), where N is the
/// original signal length and j the index of the layer being consumed.
struct PairingRule {
  double sigma = 0.0;
  long long tau = 1;

  friend bool operator==(const PairingRule &, const PairingRule &) = default;
};

struct NodePair {
  std::size_t a;
  std::size_t b;

  friend bool operator==(const NodePair &, const NodePair &) = default;
};

struct ScatteringOptions {
  // Off reproduces the purely linear sum/difference cascade.
  bool use_abs = true;
  // Scale sums and differences by 2^(-1/2) like the orthonormal Haar step.
  bool normalize = false;
};

/// Layer S_j: rows are nodes n, columns are features q.
struct ScatteringLayer {
  Eigen::MatrixXd values;
  int depth_index = 0;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
  // Length of the signal the cascade started from.
  std::size_t signal_length() const noexcept { return rows() << depth_index; }
};

struct ScatteringNetwork {
  std::vector<ScatteringLayer> layers; // j = 0 .. depth
  std::vector<PairingRule> rules;      // one per transition j -> j+1
  int depth = 0;

  const ScatteringLayer &top() const { return layers.back(); }
};

struct PairSum {
  double sum;
  double absdiff;
};

struct MaxMin {
  double max;
  double min;
};

PairSum scatter_pair(double alpha, double beta) noexcept;

// Throws ErrorKind::Domain for a negative absdiff.
MaxMin recover_max_min(double sum, double absdiff);

// Partner offset reduced into [0, row_count). Zero means self-pairing.
std::size_t partner_offset(const PairingRule &rule, std::size_t row_count,
                           int layer_index, std::size_t signal_length);

std::vector<NodePair> pairing_indices(const PairingRule &rule,
                                      std::size_t row_count, int layer_index,
                                      std::size_t signal_length);

ScatteringLayer build_layer(const ScatteringLayer &prev, const PairingRule &rule,
                            const ScatteringOptions &options = {});

// Expands a single rule to every transition; otherwise requires one per
// transition.
std::vector<PairingRule> expand_rules(std::span<const PairingRule> rules,
                                      int depth);

ScatteringLayer input_layer(const Signal &signal);

ScatteringNetwork propagate(const Signal &signal,
                            std::span<const PairingRule> rules, int depth,
                            const ScatteringOptions &options = {});

// Column means over nodes.
Eigen::VectorXd average_features(const ScatteringLayer &layer);

} // namespace hsn
