#include "hsn/signal_lab.hpp"

#include "hsn/error.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace hsn {

namespace {

void require_dyadic(std::size_t length) {
  if (!is_dyadic(length))
    throw Error(ErrorKind::DyadicLength,
                "generator length " + std::to_string(length) + " is not a power of two >= 2");
}

double parse_double(std::string_view key, std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorKind::Usage,
                "parameter " + std::string(key) + ": '" + std::string(text) + "' is not a number");
  return value;
}

std::uint64_t parse_u64(std::string_view key, std::string_view text) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorKind::Usage, "parameter " + std::string(key) + ": '" +
                                      std::string(text) + "' is not an unsigned integer");
  return value;
}

} // namespace

const char *to_string(Family family) {
  switch (family) {
  case Family::Sinusoid: return "sinusoid";
  case Family::Exponential: return "exponential";
  case Family::Logistic: return "logistic";
  case Family::Ar1: return "ar1";
  }
  return "unknown";
}

const char *to_string(InputKind kind) {
  switch (kind) {
  case InputKind::None: return "none";
  case InputKind::Step: return "step";
  case InputKind::Pulse: return "pulse";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "sinusoid") return Family::Sinusoid;
  if (name == "exponential") return Family::Exponential;
  if (name == "logistic") return Family::Logistic;
  if (name == "ar1") return Family::Ar1;
  throw Error(ErrorKind::Usage, "unknown family '" + std::string(name) +
                                    "' (expected sinusoid, exponential, logistic or ar1)");
}

InputKind parse_input_kind(std::string_view name) {
  if (name == "none") return InputKind::None;
  if (name == "step") return InputKind::Step;
  if (name == "pulse") return InputKind::Pulse;
  throw Error(ErrorKind::Usage,
              "unknown input kind '" + std::string(name) + "' (expected none, step or pulse)");
}

double GaussianNoise::uniform_open() {
  // 53 random bits mapped to (0, 1].
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianNoise::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

GeneratorSpec GeneratorSpec::defaults(Family family) {
  GeneratorSpec spec;
  spec.family = family;
  switch (family) {
  case Family::Sinusoid:
  case Family::Exponential:
    spec.beta = 1.0;
    break;
  case Family::Logistic:
    spec.beta = 0.005;
    spec.noise_sigma = 2.0;
    break;
  case Family::Ar1:
    spec.phi = 0.5;
    spec.noise_sigma = 0.1;
    break;
  }
  return spec;
}

void validate(const GeneratorSpec &spec) {
  require_dyadic(spec.length);
  if (!(spec.noise_sigma >= 0.0))
    throw Error(ErrorKind::Usage, "noise sigma must be >= 0");
  if (spec.family == Family::Logistic) {
    if (!(spec.capacity > 0.0))
      throw Error(ErrorKind::Usage, "logistic capacity C must be > 0");
    if (!(spec.x0 >= 0.0 && spec.x0 <= spec.capacity))
      throw Error(ErrorKind::Usage, "logistic x0 must lie in [0, C]");
  }
}

void set_parameter(GeneratorSpec &spec, std::string_view key, double value) {
  if (key == "beta") spec.beta = value;
  else if (key == "C" || key == "capacity") spec.capacity = value;
  else if (key == "x0") spec.x0 = value;
  else if (key == "phi") spec.phi = value;
  else if (key == "noise" || key == "noise_sigma") spec.noise_sigma = value;
  else
    throw Error(ErrorKind::Usage, "unknown numeric generator parameter '" + std::string(key) + "'");
}

void set_parameter(GeneratorSpec &spec, std::string_view key, std::string_view value) {
  if (key == "input") spec.input = parse_input_kind(value);
  else if (key == "length") spec.length = static_cast<std::size_t>(parse_u64(key, value));
  else if (key == "seed") spec.seed = parse_u64(key, value);
  else set_parameter(spec, key, parse_double(key, value));
}

Signal gen_sinusoid(double beta, std::size_t length) {
  require_dyadic(length);
  std::vector<double> samples(length);
  for (std::size_t t = 1; t <= length; ++t)
    samples[t - 1] = std::sin(beta * 2.0 * std::numbers::pi * static_cast<double>(t) / 3600.0);
  return Signal(std::move(samples));
}

Signal gen_exponential(double beta, std::size_t length) {
  require_dyadic(length);
  std::vector<double> samples(length);
  for (std::size_t t = 1; t <= length; ++t)
    samples[t - 1] = std::exp(beta * static_cast<double>(t) / 3600.0);
  return Signal(std::move(samples));
}

Trajectory gen_logistic(double beta, double capacity, double x0, double noise_sigma,
                        std::size_t length, std::uint64_t seed) {
  GeneratorSpec spec = GeneratorSpec::defaults(Family::Logistic);
  spec.beta = beta;
  spec.capacity = capacity;
  spec.x0 = x0;
  spec.noise_sigma = noise_sigma;
  spec.length = length;
  validate(spec);

  GaussianNoise noise(seed);
  Trajectory out;
  out.samples.resize(length);
  out.samples[0] = x0;
  for (std::size_t i = 1; i < length; ++i) {
    const double prev = out.samples[i - 1];
    const double eps = noise_sigma > 0.0 ? noise_sigma * noise.next() : 0.0;
    out.samples[i] = prev + (beta / capacity) * prev * (capacity - prev) + eps;
  }
  for (double v : out.samples)
    out.finite = out.finite && std::isfinite(v);
  return out;
}

Trajectory gen_ar1(double phi, InputKind input, double noise_sigma, std::size_t length,
                   std::uint64_t seed) {
  require_dyadic(length);
  if (!(noise_sigma >= 0.0))
    throw Error(ErrorKind::Usage, "noise sigma must be >= 0");
  GaussianNoise noise(seed);
  Trajectory out;
  out.stationary = std::abs(phi) < 1.0;
  out.samples.resize(length);
  double prev = 0.0;
  for (std::size_t t = 1; t <= length; ++t) {
    double u = 0.0;
    if (input == InputKind::Step || (input == InputKind::Pulse && t == 1))
      u = 1.0;
    const double eps = noise_sigma > 0.0 ? noise_sigma * noise.next() : 0.0;
    prev = phi * prev + u + eps;
    out.samples[t - 1] = prev;
  }
  for (double v : out.samples)
    out.finite = out.finite && std::isfinite(v);
  return out;
}

Trajectory generate(const GeneratorSpec &spec) {
  validate(spec);
  switch (spec.family) {
  case Family::Sinusoid:
    return {gen_sinusoid(spec.beta, spec.length).vector(), true, true};
  case Family::Exponential: {
    Trajectory out;
    out.samples.resize(spec.length);
    for (std::size_t t = 1; t <= spec.length; ++t)
      out.samples[t - 1] = std::exp(spec.beta * static_cast<double>(t) / 3600.0);
    for (double v : out.samples)
      out.finite = out.finite && std::isfinite(v);
    return out;
  }
  case Family::Logistic:
    return gen_logistic(spec.beta, spec.capacity, spec.x0, spec.noise_sigma, spec.length,
                        spec.seed);
  case Family::Ar1:
    return gen_ar1(spec.phi, spec.input, spec.noise_sigma, spec.length, spec.seed);
  }
  throw Error(ErrorKind::Usage, "unknown family");
}

} // namespace hsn
