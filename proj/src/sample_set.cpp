#include "mmls/sample_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "mmls/distance.hpp"
#include "mmls/error.hpp"

namespace mmls {

struct SampleSet::Cache {
  std::once_flag once;
  SamplingStats stats;
};

SampleSet::SampleSet(RowMatrix points, RowMatrix values)
    : points_(std::move(points)), values_(std::move(values)), cache_(std::make_shared<Cache>()) {
  if (points_.rows() < 1 || points_.cols() < 1)
    throw Error(ErrorKind::Configuration, "sample set needs at least one point of dimension >= 1");
  if (values_.rows() != points_.rows())
    throw Error(ErrorKind::Configuration, "sample points and values are not row-aligned");
  if (values_.cols() < 1) throw Error(ErrorKind::Configuration, "sample values need dimension >= 1");
  if (!points_.allFinite() || !values_.allFinite())
    throw Error(ErrorKind::Configuration, "sample set contains non-finite entries");
}

SampleSet SampleSet::without(Index i) const {
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(size()));
  for (Index j = 0; j < size(); ++j)
    if (j != i) rows.push_back(j);
  return subset(rows);
}

SampleSet SampleSet::subset(std::span<const Index> rows) const {
  RowMatrix p(static_cast<Index>(rows.size()), ambient_dim());
  RowMatrix v(static_cast<Index>(rows.size()), value_dim());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    p.row(static_cast<Index>(j)) = points_.row(rows[j]);
    v.row(static_cast<Index>(j)) = values_.row(rows[j]);
  }
  return SampleSet(std::move(p), std::move(v));
}

SampleSet SampleSet::with_values(RowMatrix values) const { return SampleSet(points_, std::move(values)); }

const SamplingStats& SampleSet::sampling_stats() const {
  std::call_once(cache_->once, [this] { cache_->stats = estimate_fill_distance(points_); });
  return cache_->stats;
}

SamplingStats estimate_fill_distance(const RowMatrix& points) {
  SamplingStats stats;
  stats.N = points.rows();
  if (stats.N < 2) return stats;
  std::vector<double> d2(static_cast<std::size_t>(stats.N));
  double worst = 0.0;
  double total = 0.0;
  for (Index i = 0; i < stats.N; ++i) {
    squared_distances(points, points.row(i).transpose(), d2);
    d2[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
    const double nearest = std::sqrt(*std::min_element(d2.begin(), d2.end()));
    worst = std::max(worst, nearest);
    total += nearest;
  }
  stats.h_est = worst;
  stats.knn_mean = total / static_cast<double>(stats.N);
  return stats;
}

}  // namespace mmls
