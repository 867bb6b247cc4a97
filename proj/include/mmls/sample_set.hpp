#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mmls/types.hpp"

namespace mmls {

/// Fill-distance proxy computed from the samples alone.
struct SamplingStats {
  double h_est = 0.0;      // max over samples of the nearest-other-sample distance
  double knn_mean = 0.0;   // mean nearest-other-sample distance
  Index N = 0;
};

/// Ambient points paired with target values. Immutable once constructed;
/// safe to share between concurrent queries.
class SampleSet {
 public:
  /// Throws Error(Configuration) on empty input, misaligned rows, or
  /// non-finite entries.
  SampleSet(RowMatrix points, RowMatrix values);

  Index size() const noexcept { return points_.rows(); }
  Index ambient_dim() const noexcept { return points_.cols(); }
  Index value_dim() const noexcept { return values_.cols(); }

  const RowMatrix& points() const noexcept { return points_; }
  const RowMatrix& values() const noexcept { return values_; }

  /// Copy with row i removed (leave-one-out folds).
  SampleSet without(Index i) const;
  SampleSet subset(std::span<const Index> rows) const;
  /// Same points with different targets.
  SampleSet with_values(RowMatrix values) const;

  /// Computed on first use, O(N^2 n); thread-safe.
  const SamplingStats& sampling_stats() const;

 private:
  struct Cache;
  RowMatrix points_;
  RowMatrix values_;
  std::shared_ptr<Cache> cache_;
};

/// h_est = max_i min_{j != i} ||x_i - x_j||; knn_mean is the mean of the inner minima.
SamplingStats estimate_fill_distance(const RowMatrix& points);

}  // namespace mmls
