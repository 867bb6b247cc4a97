#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mmls/error.hpp"
#include "mmls/kernel.hpp"
#include "mmls/sample_set.hpp"
#include "mmls/types.hpp"

namespace mmls {

/// Local chart: origin q and an n x d orthonormal basis U. The affine space
/// is q + span(U).
struct AffineFrame {
  Vector origin;
  Matrix basis;

  Index ambient_dim() const noexcept { return origin.size(); }
  Index dim() const noexcept { return basis.cols(); }
};

enum class FrameInit { RandomOrthonormal, WeightedPCA };

struct FrameSearchConfig {
  FrameInit init = FrameInit::RandomOrthonormal;
  std::uint64_t seed = 0;
  /// Convergence threshold on ||q_{j+1} - q_j|| as a fraction of h.
  double tol_q = 1e-10;
  int max_iter = 100;
  /// Largest admissible ||r - q||; infinity disables the check.
  double mu = std::numeric_limits<double>::infinity();

  void validate() const;
};

/// Iteration diagnostics.
struct FrameTrace {
  std::vector<double> steps;  // ||q_j - q_{j-1}|| per iteration
  int iterations = 0;
  bool converged = false;
  double tolerance = 0.0;  // absolute threshold actually used
};

struct FrameResult {
  AffineFrame frame;
  FrameTrace trace;
  /// Indices of every sample with ||r_i - q|| inside the weight support,
  /// evaluated at the returned origin.
  std::vector<Index> neighborhood;
};

/// Raised when max_iter is exhausted; carries the last iterate.
class FrameNotConverged : public Error {
 public:
  FrameNotConverged(const std::string& what, FrameResult last)
      : Error(ErrorKind::NotConverged, what, {last.neighborhood.size(), 0, 0.0, last.trace.iterations}),
        last_(std::move(last)) {}
  const FrameResult& last() const noexcept { return last_; }

 private:
  FrameResult last_;
};

/// Finds (q, U) with r - q orthogonal to span(U) by alternating a weighted
/// linear fit of the samples over the current chart with re-projection of r.
///
/// Weights are theta(||r_i - q||) around the current origin, starting from
/// q = r. Errors: NoSamplesInSupport (fewer than d + 1 weighted samples),
/// RankDeficient (the fitted tangent directions collapse), FrameNotConverged,
/// SearchRadiusExceeded (||r - q|| > mu).
FrameResult find_local_frame(const Eigen::Ref<const Vector>& r, const SampleSet& samples,
                             const WeightSpec& weight, int d, const FrameSearchConfig& cfg);

/// Same as above with ||r_i - r||^2 already computed for every sample.
FrameResult find_local_frame(const Eigen::Ref<const Vector>& r, const SampleSet& samples,
                             const WeightSpec& weight, int d, const FrameSearchConfig& cfg,
                             std::span<const double> dist2_to_r);

/// sum_i ||(I - U U^T)(r_i - q)||^2 theta(||r_i - q||).
double frame_cost(const AffineFrame& frame, const SampleSet& samples, const WeightSpec& weight);

/// Row i is U^T (points.row(i) - q).
Matrix project_to_frame(const RowMatrix& points, const AffineFrame& frame);

/// Modified Gram-Schmidt with one reorthogonalization pass. Each output
/// column has its largest-magnitude entry positive. Throws RankDeficient if
/// a column loses more than (1 - 1e-10) of its norm to the previous ones.
Matrix orthonormalize(const Eigen::Ref<const Matrix>& vectors);

}  // namespace mmls
