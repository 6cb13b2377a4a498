#pragma once

#include "hsn/haar.hpp"
#include "hsn/readout.hpp"
#include "hsn/scattering.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace hsn {

struct GridConfig {
  std::vector<double> sigma_values{0.0};
  std::vector<long long> tau_values;
  int depth = 4;
  // Search each transition greedily instead of one rule shared by all.
  bool per_layer = false;
};

/// sigma = {0}, tau = 1 .. min(R - 1, 64), where R is the row count of the
/// smallest layer a rule must pair (the input length in per-layer mode, since
/// degenerate offsets are skipped per transition there).
GridConfig default_grid(std::size_t signal_length, int depth, bool per_layer = false);

struct TraceEntry {
  int transition; // -1 for a rule shared by every transition
  double sigma;
  long long tau;
  double loss;
};

struct OptimizationResult {
  std::vector<PairingRule> rules; // one per transition
  double loss = 0.0;
  std::optional<double> r_squared;
  std::vector<TraceEntry> trace;
};

/// Sum of squared residuals of the reconstruction readout at the top-layer
/// node positions. Degenerate rules yield +infinity.
double reconstruction_loss(const Signal &signal, std::span<const PairingRule> rules,
                           int depth, const ScatteringOptions &scattering = {},
                           const ReadoutOptions &readout = {});

// Loss of a full rule list for a cascade of the given depth; +inf excludes it.
using RuleLoss = std::function<double(std::span<const PairingRule> rules, int depth)>;

/// Exhaustive grid search over any rule loss for signals of signal_length.
/// Ties go to the first candidate in grid order (sigma ascending, then tau
/// ascending). Candidates that pair some node with itself are skipped. In
/// per-layer mode transition j is chosen by loss(rules, j + 1) with earlier
/// transitions frozen. r_squared is left empty.
OptimizationResult grid_search(const GridConfig &grid, std::size_t signal_length,
                               const RuleLoss &loss);

/// grid_search over reconstruction_loss, with the R^2 of the winning rules. Ties go to the first candidate in grid order
/// (sigma ascending, then tau ascending). In per-layer mode transition j is
/// chosen by the loss at depth j + 1 with earlier transitions frozen.
OptimizationResult optimize_rules(const Signal &signal, const GridConfig &grid,
                                  const ScatteringOptions &scattering = {},
                                  const ReadoutOptions &readout = {});

} // namespace hsn
