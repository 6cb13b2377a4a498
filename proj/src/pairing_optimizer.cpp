#include "hsn/pairing_optimizer.hpp"

#include "hsn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hsn {

namespace {

template <typename T> std::vector<T> sorted_unique(std::vector<T> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

bool feasible_everywhere(const PairingRule &rule, std::size_t signal_length, int depth) {
  for (int j = 0; j < depth; ++j)
    if (partner_offset(rule, signal_length >> j, j, signal_length) == 0)
      return false;
  return true;
}

double not_nan(double loss) {
  return std::isnan(loss) ? std::numeric_limits<double>::infinity() : loss;
}

} // namespace

GridConfig default_grid(std::size_t signal_length, int depth, bool per_layer) {
  GridConfig grid;
  grid.depth = depth;
  grid.per_layer = per_layer;
  const std::size_t rows =
      (per_layer || depth <= 1) ? signal_length : signal_length >> (depth - 1);
  const auto max_tau = static_cast<long long>(std::min<std::size_t>(rows - 1, 64));
  for (long long tau = 1; tau <= max_tau; ++tau)
    grid.tau_values.push_back(tau);
  return grid;
}

double reconstruction_loss(const Signal &signal, std::span<const PairingRule> rules,
                           int depth, const ScatteringOptions &scattering,
                           const ReadoutOptions &readout) {
  try {
    const auto network = propagate(signal, rules, depth, scattering);
    const auto fit = fit_reconstruction(network, signal, readout);
    return fit.report.residuals.squaredNorm();
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::DegenerateRule)
      return std::numeric_limits<double>::infinity();
    throw;
  }
}

OptimizationResult grid_search(const GridConfig &grid, std::size_t signal_length,
                               const RuleLoss &loss) {
  if (grid.sigma_values.empty() || grid.tau_values.empty())
    throw Error(ErrorKind::Usage, "sigma and tau candidate lists must be non-empty");
  if (grid.depth < 0 || grid.depth > floor_log2(signal_length))
    throw Error(ErrorKind::DepthExceedsSignal,
                "depth " + std::to_string(grid.depth) + " exceeds log2 of signal length " +
                    std::to_string(signal_length));
  const auto sigmas = sorted_unique(grid.sigma_values);
  const auto taus = sorted_unique(grid.tau_values);

  OptimizationResult result;
  if (grid.depth == 0) {
    result.loss = loss({}, 0);
  } else if (!grid.per_layer) {
    std::optional<PairingRule> best;
    double best_loss = std::numeric_limits<double>::infinity();
    for (double sigma : sigmas)
      for (long long tau : taus) {
        const PairingRule rule{sigma, tau};
        if (!feasible_everywhere(rule, signal_length, grid.depth))
          continue;
        const double value = not_nan(loss(std::span(&rule, 1), grid.depth));
        result.trace.push_back({-1, sigma, tau, value});
        if (!best || value < best_loss) {
          best = rule;
          best_loss = value;
        }
      }
    if (!best)
      throw Error(ErrorKind::NoFeasibleRule,
                  "every grid candidate pairs some layer's nodes with themselves");
    result.rules.assign(static_cast<std::size_t>(grid.depth), *best);
    result.loss = best_loss;
  } else {
    for (int j = 0; j < grid.depth; ++j) {
      std::optional<PairingRule> best;
      double best_loss = std::numeric_limits<double>::infinity();
      std::vector<PairingRule> trial = result.rules;
      trial.emplace_back();
      for (double sigma : sigmas)
        for (long long tau : taus) {
          const PairingRule rule{sigma, tau};
          if (partner_offset(rule, signal_length >> j, j, signal_length) == 0)
            continue;
          trial.back() = rule;
          const double value = not_nan(loss(trial, j + 1));
          result.trace.push_back({j, sigma, tau, value});
          if (!best || value < best_loss) {
            best = rule;
            best_loss = value;
          }
        }
      if (!best)
        throw Error(ErrorKind::NoFeasibleRule,
                    "no grid candidate is feasible for transition " + std::to_string(j));
      result.rules.push_back(*best);
      result.loss = best_loss;
    }
  }
  return result;
}

OptimizationResult optimize_rules(const Signal &signal, const GridConfig &grid,
                                  const ScatteringOptions &scattering,
                                  const ReadoutOptions &readout) {
  OptimizationResult result =
      grid_search(grid, signal.size(), [&](std::span<const PairingRule> rules, int depth) {
        return reconstruction_loss(signal, rules, depth, scattering, readout);
      });
  const auto network = propagate(signal, result.rules, grid.depth, scattering);
  result.r_squared = fit_reconstruction(network, signal, readout).report.r_squared;
  return result;
}

} // namespace hsn
