#include "hsn/haar.hpp"

#include "hsn/error.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace hsn {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

} // namespace

bool is_dyadic(std::size_t n) noexcept { return n >= 2 && std::has_single_bit(n); }

int floor_log2(std::size_t n) noexcept {
  return n == 0 ? -1 : static_cast<int>(std::bit_width(n)) - 1;
}

Signal::Signal(std::vector<double> samples) : samples_(std::move(samples)) {
  if (!is_dyadic(samples_.size()))
    throw Error(ErrorKind::DyadicLength,
                "signal length " + std::to_string(samples_.size()) +
                    " is not a power of two >= 2");
  for (std::size_t i = 0; i < samples_.size(); ++i)
    if (!std::isfinite(samples_[i]))
      throw Error(ErrorKind::NonFinite,
                  "signal sample " + std::to_string(i) + " is not finite");
}

double Signal::at_position(std::size_t t) const {
  if (t < 1 || t > samples_.size())
    throw Error(ErrorKind::Domain, "domain position " + std::to_string(t) +
                                       " outside [1, " +
                                       std::to_string(samples_.size()) + "]");
  return samples_[t - 1];
}

std::size_t HaarPyramid::coefficient_count() const noexcept {
  std::size_t n = approx.size();
  for (const auto &level : details)
    n += level.size();
  return n;
}

std::vector<double> HaarPyramid::flatten() const {
  std::vector<double> out(approx);
  for (const auto &level : details)
    out.insert(out.end(), level.begin(), level.end());
  return out;
}

HaarStep haar_step(std::span<const double> values) {
  if (values.empty() || values.size() % 2 != 0)
    throw Error(ErrorKind::DyadicLength,
                "haar_step needs a non-empty even-length input, got " +
                    std::to_string(values.size()));
  const std::size_t half = values.size() / 2;
  HaarStep out;
  out.approx.resize(half);
  out.detail.resize(half);
  for (std::size_t k = 0; k < half; ++k) {
    out.approx[k] = kInvSqrt2 * (values[2 * k] + values[2 * k + 1]);
    out.detail[k] = kInvSqrt2 * (values[2 * k] - values[2 * k + 1]);
  }
  return out;
}

HaarPyramid haar_forward(const Signal &signal) {
  const int levels = signal.log2_size();
  HaarPyramid pyramid;
  pyramid.details.resize(static_cast<std::size_t>(levels));

  std::vector<double> current = signal.vector();
  for (int level = levels - 1; level >= 0; --level) {
    HaarStep step = haar_step(current);
    pyramid.details[static_cast<std::size_t>(level)] = std::move(step.detail);
    current = std::move(step.approx);
  }
  pyramid.approx = std::move(current);
  return pyramid;
}

Signal haar_inverse(const HaarPyramid &pyramid) {
  if (pyramid.approx.size() != 1 || pyramid.details.empty())
    throw Error(ErrorKind::MalformedPyramid,
                "pyramid needs one scale coefficient and at least one level");
  std::vector<double> current = pyramid.approx;
  for (std::size_t level = 0; level < pyramid.details.size(); ++level) {
    const auto &detail = pyramid.details[level];
    if (detail.size() != (std::size_t{1} << level))
      throw Error(ErrorKind::MalformedPyramid,
                  "detail level " + std::to_string(level) + " has " +
                      std::to_string(detail.size()) + " coefficients, expected " +
                      std::to_string(std::size_t{1} << level));
    std::vector<double> next(2 * current.size());
    for (std::size_t k = 0; k < current.size(); ++k) {
      next[2 * k] = kInvSqrt2 * (current[k] + detail[k]);
      next[2 * k + 1] = kInvSqrt2 * (current[k] - detail[k]);
    }
    current = std::move(next);
  }
  return Signal(std::move(current));
}

} // namespace hsn
