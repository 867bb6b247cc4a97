#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mmls {

/// Failure categories shared by the fitting stages. Callers inspect `kind`
/// to decide whether enlarging the weight support can help.
enum class ErrorKind {
  Configuration,
  InsufficientSamples,
  RankDeficient,
  ZeroWeight,
  NoSamplesInSupport,
  NotConverged,
  SearchRadiusExceeded,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Context attached to numerical failures.
struct ErrorContext {
  std::size_t support_count = 0;  // samples with strictly positive weight
  std::size_t required = 0;       // minimal count for a well-posed solve
  double rcond = 0.0;             // condition estimate of the weighted design
  int iterations = 0;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, ErrorContext ctx = {})
      : std::runtime_error(what), kind_(kind), ctx_(ctx) {}

  ErrorKind kind() const noexcept { return kind_; }
  const ErrorContext& context() const noexcept { return ctx_; }

  /// True for failures that a wider weight support may resolve.
  bool support_related() const noexcept {
    return kind_ == ErrorKind::InsufficientSamples || kind_ == ErrorKind::RankDeficient ||
           kind_ == ErrorKind::NoSamplesInSupport;
  }

 private:
  ErrorKind kind_;
  ErrorContext ctx_;
};

}  // namespace mmls
