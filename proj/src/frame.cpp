#include "mmls/frame.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mmls/distance.hpp"
#include "mmls/polybasis.hpp"

namespace mmls {

namespace {

// Past 40 h the Gaussian underflows to exactly zero in double precision.
constexpr double kGaussianCutoff = 40.0;

double support_cutoff(const WeightSpec& w) {
  return w.family == WeightFamily::Gaussian ? kGaussianCutoff * w.h : w.support_radius();
}

// Support rows of `candidates` around `center` and their weights.
struct WeightedSupport {
  std::vector<Index> rows;
  std::vector<double> weights;
};

WeightedSupport weigh(const RowMatrix& points, const std::vector<Index>& candidates,
                      const Vector& center, const WeightSpec& weight) {
  std::vector<double> d2(candidates.size());
  squared_distances(points, candidates, center, d2);
  WeightedSupport s;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const double w = detail::weight_value(std::sqrt(d2[j]), weight);
    if (w > 0.0) {
      s.rows.push_back(candidates[j]);
      s.weights.push_back(w);
    }
  }
  return s;
}

Matrix offsets(const RowMatrix& points, const std::vector<Index>& rows, const Vector& origin) {
  Matrix out(static_cast<Index>(rows.size()), points.cols());
  for (std::size_t j = 0; j < rows.size(); ++j)
    out.row(static_cast<Index>(j)) = points.row(rows[j]) - origin.transpose();
  return out;
}

Matrix random_basis(Index n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix V(n, d);
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < n; ++r) V(r, c) = normal(rng);
  return orthonormalize(V);
}

// Leading d principal directions of the weighted, weight-centered support.
// Works through the |S| x |S| Gram matrix so the cost is linear in n.
Matrix weighted_pca_basis(const RowMatrix& points, const WeightedSupport& s, int d) {
  const Index count = static_cast<Index>(s.rows.size());
  const Vector w = Eigen::Map<const Vector>(s.weights.data(), count);
  Vector mean = Vector::Zero(points.cols());
  for (Index j = 0; j < count; ++j) mean += w(j) * points.row(s.rows[static_cast<std::size_t>(j)]).transpose();
  mean /= w.sum();
  Matrix A = offsets(points, s.rows, mean);
  A = w.cwiseSqrt().asDiagonal() * A;
  const Matrix gram = A * A.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  // Eigenvalues ascend; take the last d.
  const Matrix top = eig.eigenvectors().rightCols(d);
  return orthonormalize(A.transpose() * top);
}

}  // namespace

void FrameSearchConfig::validate() const {
  if (!(tol_q > 0.0)) throw Error(ErrorKind::Configuration, "frame tolerance tol_q must be positive");
  if (max_iter < 1) throw Error(ErrorKind::Configuration, "frame max_iter must be >= 1");
  if (!(mu > 0.0)) throw Error(ErrorKind::Configuration, "frame search radius mu must be positive");
}

Matrix orthonormalize(const Eigen::Ref<const Matrix>& vectors) {
  Matrix Q = vectors;
  for (Index k = 0; k < Q.cols(); ++k) {
    const double original = Q.col(k).norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Index j = 0; j < k; ++j) Q.col(k) -= Q.col(j).dot(Q.col(k)) * Q.col(j);
    const double remaining = Q.col(k).norm();
    if (!(original > 0.0) || !(remaining > 1e-10 * original)) {
      throw Error(ErrorKind::RankDeficient,
                  "basis vector " + std::to_string(k) + " is linearly dependent on the previous ones");
    }
    Q.col(k) /= remaining;
    Index arg = 0;
    Q.col(k).cwiseAbs().maxCoeff(&arg);
    if (Q(arg, k) < 0.0) Q.col(k) = -Q.col(k);
  }
  return Q;
}

Matrix project_to_frame(const RowMatrix& points, const AffineFrame& frame) {
  return (points.rowwise() - frame.origin.transpose()) * frame.basis;
}

double frame_cost(const AffineFrame& frame, const SampleSet& samples, const WeightSpec& weight) {
  weight.validate();
  const RowMatrix shifted = samples.points().rowwise() - frame.origin.transpose();
  const Matrix tangent = shifted * frame.basis;
  double cost = 0.0;
  for (Index i = 0; i < shifted.rows(); ++i) {
    const double total2 = shifted.row(i).squaredNorm();
    const double w = detail::weight_value(std::sqrt(total2), weight);
    if (w == 0.0) continue;
    const double normal2 = (shifted.row(i) - tangent.row(i) * frame.basis.transpose()).squaredNorm();
    cost += normal2 * w;
  }
  return cost;
}

FrameResult find_local_frame(const Eigen::Ref<const Vector>& r, const SampleSet& samples,
                             const WeightSpec& weight, int d, const FrameSearchConfig& cfg) {
  std::vector<double> d2(static_cast<std::size_t>(samples.size()));
  if (r.size() == samples.ambient_dim()) squared_distances(samples.points(), r, d2);
  return find_local_frame(r, samples, weight, d, cfg, d2);
}

FrameResult find_local_frame(const Eigen::Ref<const Vector>& r_in, const SampleSet& samples,
                             const WeightSpec& weight, int d, const FrameSearchConfig& cfg,
                             std::span<const double> dist2_to_r) {
  weight.validate();
  cfg.validate();
  const Index n = samples.ambient_dim();
  if (r_in.size() != n) throw Error(ErrorKind::Configuration, "query dimension does not match the samples");
  if (d < 1 || d >= n)
    throw Error(ErrorKind::Configuration, "intrinsic dimension must satisfy 1 <= d < n");
  if (static_cast<Index>(dist2_to_r.size()) != samples.size())
    throw Error(ErrorKind::Configuration, "distance buffer does not match the sample count");

  const Vector r = r_in;
  const RowMatrix& points = samples.points();
  const double cutoff = support_cutoff(weight);
  const double tol = std::max(cfg.tol_q * weight.h, 64.0 * std::numeric_limits<double>::epsilon() *
                                                        std::max(1.0, r.norm()));

  // Every sample within `cutoff` of q lies within cutoff + ||q - r|| of r, so
  // the candidate ball only needs rebuilding when q drifts past `slack`.
  double slack = cutoff;
  std::vector<Index> candidates;
  auto collect = [&] {
    candidates.clear();
    const double radius = cutoff + slack;
    const double radius2 = radius * radius;
    for (Index i = 0; i < samples.size(); ++i)
      if (dist2_to_r[static_cast<std::size_t>(i)] < radius2) candidates.push_back(i);
  };
  collect();

  FrameResult result;
  result.trace.tolerance = tol;
  Vector q = r;

  WeightedSupport support = weigh(points, candidates, q, weight);
  if (static_cast<int>(support.rows.size()) < d + 1) {
    throw Error(ErrorKind::NoSamplesInSupport,
                "only " + std::to_string(support.rows.size()) + " samples inside the weight support",
                {support.rows.size(), static_cast<std::size_t>(d + 1), 0.0, 0});
  }
  Matrix U = cfg.init == FrameInit::WeightedPCA ? weighted_pca_basis(points, support, d)
                                                : random_basis(n, d, cfg.seed);

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    if (iter > 1) {
      const double drift = (q - r).norm();
      if (drift > slack) {
        slack = 2.0 * drift;
        collect();
      }
      support = weigh(points, candidates, q, weight);
      if (static_cast<int>(support.rows.size()) < d + 1) {
        throw Error(ErrorKind::NoSamplesInSupport,
                    "weight support around the frame origin emptied during iteration",
                    {support.rows.size(), static_cast<std::size_t>(d + 1), 0.0, iter});
      }
    }

    // Linear vector-valued fit of the samples over the current chart.
    WlsProblem lin;
    lin.Y = offsets(points, support.rows, q);
    lin.X = lin.Y * U;
    lin.w = Eigen::Map<const Vector>(support.weights.data(), static_cast<Index>(support.weights.size()));
    const PolyModel ell = wls_fit(lin, 1);

    const Vector q_tmp = q + ell.coeffs.row(0).transpose();
    U = orthonormalize(ell.coeffs.bottomRows(d).transpose());
    const Vector q_next = q_tmp + U * (U.transpose() * (r - q_tmp));

    const double step = (q_next - q).norm();
    q = q_next;
    result.trace.steps.push_back(step);
    result.trace.iterations = iter;
    if (step < tol) {
      result.trace.converged = true;
      break;
    }
  }

  const double drift = (q - r).norm();
  if (drift > slack) {
    slack = 2.0 * drift;
    collect();
  }
  result.frame.origin = q;
  result.frame.basis = U;
  result.neighborhood = weigh(points, candidates, q, weight).rows;

  if (!result.trace.converged) {
    throw FrameNotConverged("frame search did not converge in " + std::to_string(cfg.max_iter) +
                                " iterations",
                            std::move(result));
  }
  if (drift > cfg.mu) {
    throw Error(ErrorKind::SearchRadiusExceeded,
                "frame origin is farther than mu from the query",
                {result.neighborhood.size(), 0, 0.0, result.trace.iterations});
  }
  return result;
}

}  // namespace mmls
