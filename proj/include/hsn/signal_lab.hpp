#pragma once

#include "hsn/haar.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace hsn {

enum class Family { Sinusoid, Exponential, Logistic, Ar1 };
enum class InputKind { None, Step, Pulse };

const char *to_string(Family family);
const char *to_string(InputKind kind);
Family parse_family(std::string_view name);
InputKind parse_input_kind(std::string_view name);

/// Seeded standard normal variates: mt19937_64 (fully specified by the
/// standard) feeding a Box-Muller transform, so streams match across
/// platforms and standard libraries.
class GaussianNoise {
public:
  explicit GaussianNoise(std::uint64_t seed) : engine_(seed) {}

  double next();

private:
  double uniform_open();

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Flat description of one generated realization. Fields that a family does
/// not use are ignored by it.
struct GeneratorSpec {
  Family family = Family::Sinusoid;
  double beta = 1.0;
  double capacity = 1000.0; // logistic C
  double x0 = 50.0;         // logistic initial state
  double phi = 0.5;
  InputKind input = InputKind::Step;
  double noise_sigma = 0.0;
  std::size_t length = 1024;
  std::uint64_t seed = 42;

  static GeneratorSpec defaults(Family family);
};

// Throws ErrorKind::Usage / DyadicLength on invalid combinations.
void validate(const GeneratorSpec &spec);

// Sets a named parameter from text: beta, C, x0, phi, input, noise, length, seed.
void set_parameter(GeneratorSpec &spec, std::string_view key, std::string_view value);
void set_parameter(GeneratorSpec &spec, std::string_view key, double value);

struct Trajectory {
  std::vector<double> samples;
  bool finite = true;
  bool stationary = true;

  // Throws ErrorKind::NonFinite for divergent trajectories.
  Signal to_signal() const { return Signal(samples); }
};

Signal gen_sinusoid(double beta, std::size_t length);
Signal gen_exponential(double beta, std::size_t length);

// x(1) = x0, x(t) = x(t-1) + (beta/C) x(t-1) (C - x(t-1)) + eps(t).
Trajectory gen_logistic(double beta, double capacity, double x0, double noise_sigma,
                        std::size_t length, std::uint64_t seed);

// x(0) = 0, x(t) = phi x(t-1) + u(t) + eps(t) for t = 1 .. length.
Trajectory gen_ar1(double phi, InputKind input, double noise_sigma, std::size_t length,
                   std::uint64_t seed);

Trajectory generate(const GeneratorSpec &spec);

} // namespace hsn
