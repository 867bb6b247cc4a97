#include "mmls/kernel.hpp"

#include <cmath>
#include <string>

#include "mmls/error.hpp"

namespace mmls {

std::string_view to_string(WeightFamily family) noexcept {
  switch (family) {
    case WeightFamily::TruncatedExp:
      return "truncated-exp";
    case WeightFamily::Gaussian:
      return "gaussian";
    case WeightFamily::InterpolatorySingular:
      return "interpolatory";
  }
  return "unknown";
}

WeightFamily parse_weight_family(std::string_view name) {
  if (name == "truncated-exp" || name == "truncexp") return WeightFamily::TruncatedExp;
  if (name == "gaussian") return WeightFamily::Gaussian;
  if (name == "interpolatory" || name == "singular") return WeightFamily::InterpolatorySingular;
  throw Error(ErrorKind::Configuration, "unknown weight family '" + std::string(name) + "'");
}

double WeightSpec::effective_eps_reg() const noexcept {
  if (eps_reg > 0.0) return eps_reg;
  const double s = 1e-8 * h;
  return s * s;
}

void WeightSpec::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(k)) throw Error(ErrorKind::Configuration, "weight support multiplier k must be positive");
  if (!ok(h)) throw Error(ErrorKind::Configuration, "weight bandwidth h must be positive");
  if (!ok(effective_eps_reg()))
    throw Error(ErrorKind::Configuration, "weight regularizer eps_reg must be positive");
}

namespace detail {

double weight_value(double t, const WeightSpec& spec) noexcept {
  const double support = spec.support_radius();
  switch (spec.family) {
    case WeightFamily::TruncatedExp: {
      if (t >= support) return 0.0;
      const double gap = t - support;
      return std::exp(-(t * t) / (gap * gap));
    }
    case WeightFamily::Gaussian:
      return std::exp(-(t * t) / (spec.h * spec.h));
    case WeightFamily::InterpolatorySingular:
      if (t >= support) return 0.0;
      return 1.0 / (t * t + spec.effective_eps_reg());
  }
  return 0.0;
}

}  // namespace detail

double weight_eval(double t, const WeightSpec& spec) {
  spec.validate();
  if (!(t >= 0.0)) throw Error(ErrorKind::Configuration, "weight argument must be nonnegative");
  return detail::weight_value(t, spec);
}

}  // namespace mmls
