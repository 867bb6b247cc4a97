#include <gtest/gtest.h>

#include <Eigen/QR>
#include <cmath>
#include <numbers>
#include <random>

#include "mmls/datasets.hpp"
#include "mmls/error.hpp"
#include "mmls/frame.hpp"
#include "test_util.hpp"

using namespace mmls;
using test_util::random_orthonormal;
using test_util::random_vector;
using test_util::subspace_distance;

namespace {

struct AffineData {
  Vector origin;
  Matrix basis;
  SampleSet samples;
};

AffineData affine_samples(Index n, int d, Index N, std::mt19937_64& rng) {
  const Vector origin = random_vector(n, rng);
  const Matrix basis = random_orthonormal(n, d, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RowMatrix pts(N, n);
  for (Index i = 0; i < N; ++i) {
    Vector c(d);
    for (int j = 0; j < d; ++j) c(j) = u(rng);
    pts.row(i) = (origin + basis * c).transpose();
  }
  return {origin, basis, SampleSet(pts, RowMatrix::Zero(N, 1))};
}

WeightSpec broad() { return {WeightFamily::TruncatedExp, 4.0, 1.0, -1.0}; }

SampleSet circle_samples(double spacing, double phase) {
  const Index N = static_cast<Index>(std::round(2.0 * std::numbers::pi / spacing));
  RowMatrix pts(N, 2);
  for (Index i = 0; i < N; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(N);
    pts.row(i) << std::cos(a), std::sin(a);
  }
  return SampleSet(pts, RowMatrix::Zero(N, 1));
}

SampleSet sphere_samples() {
  return datasets::gen_sphere_grid(30, datasets::NoiseModel::clean()).samples;
}

}  // namespace

TEST(Frame, QueryOnAffineSubspace) {
  std::mt19937_64 rng(1);
  for (auto init : {FrameInit::RandomOrthonormal, FrameInit::WeightedPCA}) {
    const AffineData a = affine_samples(5, 2, 60, rng);
    const Vector r = a.origin + a.basis * Vector::Constant(2, 0.1);
    FrameSearchConfig cfg;
    cfg.init = init;
    const FrameResult f = find_local_frame(r, a.samples, broad(), 2, cfg);
    EXPECT_LT((f.frame.origin - r).norm(), 1e-8);
    EXPECT_LT(subspace_distance(f.frame.basis, a.basis), 1e-8);
    EXPECT_TRUE(f.trace.converged);
  }
}

TEST(Frame, QueryOffAffineSubspaceProjects) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const AffineData a = affine_samples(6, 3, 80, rng);
    const Vector r = a.origin + random_vector(6, rng, 0.3);
    const Vector proj = a.origin + a.basis * (a.basis.transpose() * (r - a.origin));
    FrameSearchConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const FrameResult f = find_local_frame(r, a.samples, broad(), 3, cfg);
    EXPECT_LT((f.frame.origin - proj).norm(), 1e-8);
    EXPECT_LT(subspace_distance(f.frame.basis, a.basis), 1e-8);
  }
}

TEST(Frame, CircleOriginErrorIsQuadraticInSpacing) {
  Vector r(2);
  r << 1.2, 0.0;
  double prev_q = 0.0;
  for (double h : {0.04, 0.02, 0.01}) {
    const SampleSet s = circle_samples(h, 0.37 * h);
    const WeightSpec w{WeightFamily::TruncatedExp, 25.0, h, -1.0};
    const FrameResult f = find_local_frame(r, s, w, 1, FrameSearchConfig{});
    const double q_err = (f.frame.origin - Vector::Unit(2, 0)).norm();
    const double u_err = std::abs(f.frame.basis(0, 0));
    EXPECT_LT(q_err, 200.0 * h * h) << "h=" << h;
    // Uniform sampling makes the tangent nearly exact; O(h) is a loose bound.
    EXPECT_LT(u_err, h) << "h=" << h;
    if (prev_q > 0.0) {
      EXPECT_LT(q_err, 0.35 * prev_q) << "h=" << h;
    }
    prev_q = q_err;
  }
}

TEST(Frame, OrthogonalityAndTrace) {
  const SampleSet s = sphere_samples();
  const WeightSpec w{WeightFamily::TruncatedExp, 4.0, 0.1, -1.0};
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Vector p = random_vector(3, rng).normalized();
    const Vector r = (1.0 + std::uniform_real_distribution<double>(-0.1, 0.1)(rng)) * p;
    FrameSearchConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const FrameResult f = find_local_frame(r, s, w, 2, cfg);
    const Vector off = r - f.frame.origin;
    EXPECT_LT((f.frame.basis.transpose() * off).norm() / std::max(off.norm(), w.h), 1e-8);
    EXPECT_LT((f.frame.basis.transpose() * f.frame.basis - Matrix::Identity(2, 2)).norm(), 1e-13);
    ASSERT_FALSE(f.trace.steps.empty());
    EXPECT_TRUE(f.trace.converged);
    EXPECT_LT(f.trace.steps.back(), f.trace.tolerance);
    EXPECT_EQ(f.trace.iterations, static_cast<int>(f.trace.steps.size()));
    for (Index i : f.neighborhood)
      EXPECT_LT((s.points().row(i).transpose() - f.frame.origin).norm(), w.support_radius());
  }
}

TEST(Frame, RigidMotionEquivariance) {
  const SampleSet s = sphere_samples();
  const WeightSpec w{WeightFamily::TruncatedExp, 4.0, 0.1, -1.0};
  std::mt19937_64 rng(4);
  FrameSearchConfig cfg;
  cfg.init = FrameInit::WeightedPCA;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix R = test_util::random_rotation(3, rng);
    const Vector t = random_vector(3, rng, 5.0);
    RowMatrix moved = (s.points() * R.transpose()).rowwise() + t.transpose();
    const SampleSet s2(moved, s.values());
    const Vector r = 1.05 * random_vector(3, rng).normalized();
    const FrameResult a = find_local_frame(r, s, w, 2, cfg);
    const FrameResult b = find_local_frame(R * r + t, s2, w, 2, cfg);
    EXPECT_LT((b.frame.origin - (R * a.frame.origin + t)).norm(), 1e-8);
    EXPECT_LT(subspace_distance(b.frame.basis, R * a.frame.basis), 1e-8);
  }
}

TEST(Frame, IdempotentAlongTheNormal) {
  const SampleSet s = sphere_samples();
  const WeightSpec w{WeightFamily::TruncatedExp, 4.0, 0.1, -1.0};
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector r = 1.08 * random_vector(3, rng).normalized();
    const FrameResult a = find_local_frame(r, s, w, 2, FrameSearchConfig{});
    const Vector off = r - a.frame.origin;
    const Vector r2 = a.frame.origin + 0.4 * off;
    const FrameResult b = find_local_frame(r2, s, w, 2, FrameSearchConfig{});
    EXPECT_LT((b.frame.origin - a.frame.origin).norm(), 1e-8);
    EXPECT_LT(subspace_distance(b.frame.basis, a.frame.basis), 1e-8);
  }
}

TEST(Frame, RandomInitAgreesWithPca) {
  const SampleSet s = sphere_samples();
  const WeightSpec w{WeightFamily::TruncatedExp, 4.0, 0.1, -1.0};
  Vector r(3);
  r << 0.3, -0.5, 0.9;
  FrameSearchConfig pca;
  pca.init = FrameInit::WeightedPCA;
  const FrameResult ref = find_local_frame(r, s, w, 2, pca);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FrameSearchConfig cfg;
    cfg.seed = seed;
    const FrameResult f = find_local_frame(r, s, w, 2, cfg);
    EXPECT_LT((f.frame.origin - ref.frame.origin).norm(), 1e-8);
  }
}

TEST(Frame, ErrorsCarryDiagnostics) {
  const SampleSet s = sphere_samples();
  const WeightSpec w{WeightFamily::TruncatedExp, 4.0, 0.1, -1.0};
  try {
    find_local_frame(Vector::Constant(3, 10.0), s, w, 2, FrameSearchConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoSamplesInSupport);
  }
  Vector r(3);
  r << 0.0, 0.0, 1.2;
  FrameSearchConfig capped;
  capped.mu = 0.05;
  try {
    find_local_frame(r, s, w, 2, capped);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SearchRadiusExceeded);
  }
  FrameSearchConfig once;
  once.max_iter = 1;
  r << 0.3, 0.4, 1.1;
  try {
    find_local_frame(r, s, w, 2, once);
    FAIL();
  } catch (const FrameNotConverged& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotConverged);
    EXPECT_EQ(e.last().trace.iterations, 1);
    EXPECT_FALSE(e.last().trace.converged);
    EXPECT_EQ(e.last().frame.origin.size(), 3);
  }
  EXPECT_THROW(find_local_frame(r, s, w, 3, FrameSearchConfig{}), Error);
}

TEST(FrameCost, HandComputedSums) {
  AffineFrame f{Vector::Zero(2), Matrix::Identity(2, 1)};
  RowMatrix on(3, 2);
  on << 0.1, 0, -0.2, 0, 0.5, 0;
  const WeightSpec w{WeightFamily::TruncatedExp, 2.0, 1.0, -1.0};
  EXPECT_EQ(frame_cost(f, SampleSet(on, RowMatrix::Zero(3, 1)), w), 0.0);

  RowMatrix one(1, 2);
  one << 0.0, 0.5;
  EXPECT_NEAR(frame_cost(f, SampleSet(one, RowMatrix::Zero(1, 1)), w), weight_eval(0.5, w) * 0.25, 1e-16);

  RowMatrix three(3, 2);
  three << 1.0, 1.0, 0.5, -0.5, 3.0, 0.1;
  // Residuals 1, 0.5, 0.1 at distances sqrt(2), sqrt(0.5), >2 (outside the support).
  const double expected = std::exp(-2.0 / std::pow(std::sqrt(2.0) - 2.0, 2)) * 1.0 +
                          std::exp(-0.5 / std::pow(std::sqrt(0.5) - 2.0, 2)) * 0.25;
  EXPECT_NEAR(frame_cost(f, SampleSet(three, RowMatrix::Zero(3, 1)), w), expected, 1e-15);
}

TEST(ProjectToFrame, CoordinatesMatchLeastSquares) {
  std::mt19937_64 rng(6);
  AffineFrame f{random_vector(3, rng), random_orthonormal(3, 2, rng)};
  RowMatrix pts(3, 3);
  pts.row(0) = f.origin.transpose();
  pts.row(1) = (f.origin + 2.0 * f.basis.col(0)).transpose();
  pts.row(2) = random_vector(3, rng).transpose();
  const Matrix c = project_to_frame(pts, f);
  EXPECT_LT(c.row(0).norm(), 1e-15);
  EXPECT_NEAR(c(1, 0), 2.0, 1e-14);
  EXPECT_NEAR(c(1, 1), 0.0, 1e-14);
  const Vector ls = f.basis.colPivHouseholderQr().solve(pts.row(2).transpose() - f.origin);
  EXPECT_LT((c.row(2).transpose() - ls).norm(), 1e-13);
}

TEST(Orthonormalize, SignConventionAndRank) {
  Matrix v(3, 2);
  v << -2, 1, 0, 1, 0, 0;
  const Matrix q = orthonormalize(v);
  EXPECT_LT((q.transpose() * q - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(q(0, 0), 1.0);
  EXPECT_GT(q(1, 1), 0.0);
  for (Index c = 0; c < 2; ++c) {
    Index idx;
    q.col(c).cwiseAbs().maxCoeff(&idx);
    EXPECT_GT(q(idx, c), 0.0);
  }
  Matrix dep(3, 2);
  dep << 1, 2, 1, 2, 1, 2;
  try {
    orthonormalize(dep);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
}
