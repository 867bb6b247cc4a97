#include "mmls/error.hpp"

namespace mmls {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Configuration:
      return "configuration";
    case ErrorKind::InsufficientSamples:
      return "insufficient-samples";
    case ErrorKind::RankDeficient:
      return "rank-deficient";
    case ErrorKind::ZeroWeight:
      return "zero-weight";
    case ErrorKind::NoSamplesInSupport:
      return "no-samples-in-support";
    case ErrorKind::NotConverged:
      return "not-converged";
    case ErrorKind::SearchRadiusExceeded:
      return "search-radius-exceeded";
  }
  return "unknown";
}

}  // namespace mmls
