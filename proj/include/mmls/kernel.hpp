#pragma once

#include <string_view>

namespace mmls {

enum class WeightFamily { TruncatedExp, Gaussian, InterpolatorySingular };

std::string_view to_string(WeightFamily family) noexcept;
/// Accepts "truncated-exp", "gaussian", "interpolatory"; throws Configuration otherwise.
WeightFamily parse_weight_family(std::string_view name);

/// Radial weight applied to ambient distances.
///
/// TruncatedExp is the compactly supported C-infinity family
/// exp(-t^2 / (t - k h)^2) on [0, k h). Gaussian is exp(-t^2 / h^2) with
/// unbounded support. InterpolatorySingular evaluates 1 / (t^2 + eps_reg)
/// on [0, k h), a regularized stand-in for a weight that blows up at zero.
struct WeightSpec {
  WeightFamily family = WeightFamily::TruncatedExp;
  double k = 3.0;
  double h = 1.0;
  /// Negative means "use the default (1e-8 h)^2".
  double eps_reg = -1.0;

  double support_radius() const noexcept { return k * h; }
  double effective_eps_reg() const noexcept;
  /// Throws Error(Configuration) when k, h or eps_reg are not positive and finite.
  void validate() const;
};

/// Weight at distance t >= 0. Nonnegative, finite, non-increasing in t.
double weight_eval(double t, const WeightSpec& spec);

namespace detail {
/// Unchecked evaluation for hot loops; the caller has validated `spec`.
double weight_value(double t, const WeightSpec& spec) noexcept;
}  // namespace detail

}  // namespace mmls
