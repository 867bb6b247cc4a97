#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmls/error.hpp"
#include "mmls/frame.hpp"
#include "mmls/kernel.hpp"
#include "mmls/polybasis.hpp"
#include "mmls/sample_set.hpp"
#include "mmls/types.hpp"

namespace mmls {

/// Settings for the two-stage approximation.
///
/// Support sizing: when both `k` and `h` are set the support radius is k h.
/// Otherwise it adapts per query to hold about support_factor * max(J, d + 1)
/// samples (J the basis size) and is widened by `enlarge_factor` up to
/// `max_enlarge` times when a stage runs out of samples or rank. A fixed `k`
/// with an automatic `h` uses the sample set's fill-distance estimate as h.
struct ApproxConfig {
  int d = 1;
  int m = 1;
  WeightFamily family = WeightFamily::TruncatedExp;
  std::optional<double> k;
  std::optional<double> h;
  double eps_reg = -1.0;
  FrameSearchConfig frame;
  bool interpolatory = false;
  double support_factor = 3.0;
  double enlarge_factor = 1.5;
  int max_enlarge = 5;
  double rcond = 1e-10;

  /// Interpolatory flag or singular weight family.
  bool interpolating() const noexcept {
    return interpolatory || family == WeightFamily::InterpolatorySingular;
  }
  bool adaptive_support() const noexcept { return !(k && h); }
  void validate() const;
};

/// Everything the query produced, for diagnostics and the harness.
struct LocalFit {
  Vector value;
  FrameResult frame;
  WeightSpec weight;       // the weight actually used
  bool exact_hit = false;  // interpolatory shortcut at a sample
  int enlargements = 0;
};

/// psi~(r) = p_r(0): frame search, projection of the in-support samples to
/// chart coordinates, then a degree-m weighted fit with theta(||r_i - q||).
Vector approximate(const Eigen::Ref<const Vector>& r, const SampleSet& samples, const ApproxConfig& cfg);

/// M-MLS projection of r onto the approximating manifold: the same
/// procedure with the ambient coordinates of the samples as targets.
Vector project_point(const Eigen::Ref<const Vector>& r, const SampleSet& samples, const ApproxConfig& cfg);

/// Full diagnostics. `project` selects the point projection target.
LocalFit fit_local(const Eigen::Ref<const Vector>& r, const SampleSet& samples, const ApproxConfig& cfg,
                   bool project = false);

/// Resolved weight for query r before any enlargement.
WeightSpec resolve_weight(const Eigen::Ref<const Vector>& r, const SampleSet& samples,
                          const ApproxConfig& cfg, std::span<const double> dist2_to_r);

struct QueryStatus {
  bool ok = true;
  std::optional<ErrorKind> kind;
  std::string message;
};

struct BatchResult {
  RowMatrix values;  // Q x value_dim; NaN rows for failed queries
  std::vector<QueryStatus> status;

  std::size_t failures() const;
};

/// Query i runs with frame seed cfg.frame.seed + i. Failures are recorded
/// per query and never abort the batch. OpenMP-parallel over queries.
BatchResult approximate_batch(const RowMatrix& queries, const SampleSet& samples, const ApproxConfig& cfg);
BatchResult project_batch(const RowMatrix& queries, const SampleSet& samples, const ApproxConfig& cfg);

/// Single-threaded reference for approximate_batch; results are bitwise equal.
BatchResult approximate_batch_serial(const RowMatrix& queries, const SampleSet& samples,
                                     const ApproxConfig& cfg);
BatchResult project_batch_serial(const RowMatrix& queries, const SampleSet& samples, const ApproxConfig& cfg);

}  // namespace mmls
