#include "hsn/error.hpp"

namespace hsn {

const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::DyadicLength: return "dyadic-length";
  case ErrorKind::MalformedPyramid: return "malformed-pyramid";
  case ErrorKind::Domain: return "domain";
  case ErrorKind::DegenerateRule: return "degenerate-rule";
  case ErrorKind::DepthExceedsSignal: return "depth-exceeds-signal";
  case ErrorKind::NoFeasibleRule: return "no-feasible-rule";
  case ErrorKind::Dimension: return "dimension";
  case ErrorKind::UndefinedVariance: return "undefined-variance";
  case ErrorKind::NonFinite: return "non-finite";
  case ErrorKind::Usage: return "usage";
  case ErrorKind::Io: return "io";
  }
  return "unknown";
}

} // namespace hsn
