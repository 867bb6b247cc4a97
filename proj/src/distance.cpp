#include "mmls/distance.hpp"

#include <cassert>
#include <cstddef>

namespace mmls {

namespace {

inline double row_distance2(const double* row, const double* x, Index n) noexcept {
  double acc = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double diff = row[j] - x[j];
    acc += diff * diff;
  }
  return acc;
}

// Below this many multiply-adds the OpenMP fork costs more than it saves.
constexpr Index kParallelWork = 1 << 18;

}  // namespace

void squared_distances_serial(const RowMatrix& points, const Eigen::Ref<const Vector>& x,
                              std::span<double> out) {
  assert(static_cast<Index>(out.size()) == points.rows());
  assert(x.size() == points.cols());
  const Index n = points.cols();
  const Vector xs = x;
  for (Index i = 0; i < points.rows(); ++i) out[i] = row_distance2(points.row(i).data(), xs.data(), n);
}

void squared_distances(const RowMatrix& points, const Eigen::Ref<const Vector>& x,
                       std::span<double> out) {
  assert(static_cast<Index>(out.size()) == points.rows());
  assert(x.size() == points.cols());
  const Index rows = points.rows();
  const Index n = points.cols();
  const Vector xs = x;
  const double* base = points.data();
  double* dst = out.data();
#pragma omp parallel for schedule(static) if (rows * n >= kParallelWork)
  for (Index i = 0; i < rows; ++i) dst[i] = row_distance2(base + i * n, xs.data(), n);
}

void squared_distances(const RowMatrix& points, std::span<const Index> rows,
                       const Eigen::Ref<const Vector>& x, std::span<double> out) {
  assert(out.size() == rows.size());
  const Index n = points.cols();
  const Vector xs = x;
  const Index count = static_cast<Index>(rows.size());
  const double* base = points.data();
#pragma omp parallel for schedule(static) if (count * n >= kParallelWork)
  for (Index j = 0; j < count; ++j) out[j] = row_distance2(base + rows[j] * n, xs.data(), n);
}

}  // namespace mmls
