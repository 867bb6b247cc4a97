#pragma once

#include <span>

#include "mmls/types.hpp"

namespace mmls {

/// out[i] = ||points.row(i) - x||^2. Parallel over rows when the matrix is
/// large enough to amortize thread start-up; results are bitwise identical
/// to squared_distances_serial because each row is reduced by one thread.
void squared_distances(const RowMatrix& points, const Eigen::Ref<const Vector>& x,
                       std::span<double> out);

/// Reference implementation kept for tests and benchmarks.
void squared_distances_serial(const RowMatrix& points, const Eigen::Ref<const Vector>& x,
                              std::span<double> out);

/// squared distances for a subset of rows; out[j] belongs to rows[j].
void squared_distances(const RowMatrix& points, std::span<const Index> rows,
                       const Eigen::Ref<const Vector>& x, std::span<double> out);

}  // namespace mmls
