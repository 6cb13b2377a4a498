#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hsn {

bool is_dyadic(std::size_t n) noexcept;

// floor(log2(n)) for n >= 1.
int floor_log2(std::size_t n) noexcept;

/// A finite real-valued sample vector of length 2^d, d >= 1.
///
/// Samples are stored 0-based; the domain position of sample i is t = i + 1,
/// so a length-2^d signal covers t in [1, 2^d].
class Signal {
public:
  explicit Signal(std::vector<double> samples);

  std::size_t size() const noexcept { return samples_.size(); }
  int log2_size() const noexcept { return floor_log2(samples_.size()); }
  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double> &vector() const noexcept { return samples_; }

  double operator[](std::size_t i) const { return samples_[i]; }
  // 1-based domain position.
  double at_position(std::size_t t) const;

private:
  std::vector<double> samples_;
};

struct HaarStep {
  std::vector<double> approx;
  std::vector<double> detail;
};

/// Full orthonormal Haar decomposition, coarse to fine.
///
/// details[n] holds the level-n detail coefficients (length 2^n), so
/// details.front() is the single coarsest coefficient and details.back() is
/// the output of the first analysis step. approx holds the single remaining
/// scale coefficient.
struct HaarPyramid {
  std::vector<double> approx;
  std::vector<std::vector<double>> details;

  std::size_t coefficient_count() const noexcept;
  // approx followed by details from coarse to fine.
  std::vector<double> flatten() const;
};

HaarStep haar_step(std::span<const double> values);
HaarPyramid haar_forward(const Signal &signal);
Signal haar_inverse(const HaarPyramid &pyramid);

} // namespace hsn
