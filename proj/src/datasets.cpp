#include "mmls/datasets.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mmls/error.hpp"

namespace mmls::datasets {

namespace {

constexpr double kPi = std::numbers::pi;

// Applies domain noise row by row and value noise to a single column set.
SampleSet perturb(const RowMatrix& clean_points, const RowMatrix& clean_values, const NoiseModel& noise) {
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix points = clean_points;
  RowMatrix values = clean_values;
  for (Index i = 0; i < points.rows(); ++i) {
    const double s = noise.sigma_domain ? noise.sigma_domain(clean_points.row(i).transpose()) : 0.0;
    for (Index j = 0; j < points.cols(); ++j) {
      const double eta = normal(rng);
      points(i, j) += s * eta;
    }
    for (Index j = 0; j < values.cols(); ++j) {
      const double eps = normal(rng);
      values(i, j) += noise.sigma_target * eps;
    }
  }
  return SampleSet(std::move(points), std::move(values));
}

}  // namespace

NoiseModel NoiseModel::constant(double domain, double target, std::uint64_t seed) {
  NoiseModel m;
  if (domain != 0.0) m.sigma_domain = [domain](const Vector&) { return domain; };
  m.sigma_target = target;
  m.seed = seed;
  return m;
}

Vector helix_point(double t) {
  Vector p(3);
  p << std::sin(t), std::cos(t), t;
  return p;
}

Generated gen_helix(Index N, const NoiseModel& noise, double t_min, double t_max) {
  if (N < 2) throw Error(ErrorKind::Configuration, "helix needs N >= 2");
  RowMatrix pts(N, 3), vals(N, 1), params(N, 1);
  for (Index i = 0; i < N; ++i) {
    const double t = t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(N - 1);
    pts.row(i) = helix_point(t).transpose();
    vals(i, 0) = t;
    params(i, 0) = t;
  }
  SampleSet s = perturb(pts, vals, noise);
  return {std::move(s), std::move(pts), std::move(vals), std::move(params)};
}

Vector sphere_point(double phi, double theta) {
  Vector p(3);
  p << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
  return p;
}

Generated gen_sphere_grid(int g, const NoiseModel& noise) {
  if (g < 2) throw Error(ErrorKind::Configuration, "sphere grid needs g >= 2");
  const Index N = static_cast<Index>(g) * g;
  RowMatrix pts(N, 3), vals(N, 2);
  Index row = 0;
  for (int i = 0; i < g; ++i) {
    const double theta = kPi * (i + 0.5) / g;
    for (int j = 0; j < g; ++j, ++row) {
      const double phi = 2.0 * kPi * j / g;
      pts.row(row) = sphere_point(phi, theta).transpose();
      vals(row, 0) = phi;
      vals(row, 1) = theta;
    }
  }
  SampleSet s = perturb(pts, vals, noise);
  RowMatrix params = vals;
  return {std::move(s), std::move(pts), std::move(vals), std::move(params)};
}

Generated sphere_patch_queries(Index count, double phi_min, double phi_max, double theta_min,
                               double theta_max, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::Configuration, "query count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double z_hi = std::cos(theta_min);
  const double z_lo = std::cos(theta_max);
  RowMatrix pts(count, 3), vals(count, 2);
  for (Index i = 0; i < count; ++i) {
    const double phi = phi_min + (phi_max - phi_min) * uni(rng);
    const double theta = std::acos(z_lo + (z_hi - z_lo) * uni(rng));
    pts.row(i) = sphere_point(phi, theta).transpose();
    vals(i, 0) = phi;
    vals(i, 1) = theta;
  }
  SampleSet s(pts, vals);
  RowMatrix params = vals;
  return {std::move(s), std::move(pts), std::move(vals), std::move(params)};
}

Vector klein_point(double u, double v) {
  Vector p(4);
  const double a = 2.0 * std::cos(v) + 1.0;
  p << a * std::cos(u), a * std::sin(u), 2.0 * std::sin(v) * std::cos(0.5 * u),
      2.0 * std::sin(v) * std::sin(0.5 * u);
  return p;
}

double klein_target(double u, double v) {
  const double c = std::cos(2.0 * v);
  const double du = u - kPi;
  const double dv = v - kPi;
  return 7.0 * std::sin(4.0 * u) + 5.0 * c * c + 6.0 * std::exp(-32.0 * (du * du + dv * dv));
}

namespace {

void draw_klein_params(Index count, std::mt19937_64& rng, RowMatrix& pts, RowMatrix& vals, RowMatrix& params) {
  std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
  pts.resize(count, 4);
  vals.resize(count, 1);
  params.resize(count, 2);
  for (Index i = 0; i < count; ++i) {
    const double u = uni(rng);
    const double v = uni(rng);
    params(i, 0) = u;
    params(i, 1) = v;
    pts.row(i) = klein_point(u, v).transpose();
    vals(i, 0) = klein_target(u, v);
  }
}

}  // namespace

KleinSet gen_klein(Index N, double sigma_r, double snrdb, std::uint64_t seed) {
  if (N < 1) throw Error(ErrorKind::Configuration, "Klein sample needs N >= 1");
  if (!(sigma_r >= 0.0)) throw Error(ErrorKind::Configuration, "sigma_r must be >= 0");
  std::mt19937_64 rng(seed);
  RowMatrix pts, vals, params;
  draw_klein_params(N, rng, pts, vals, params);

  KleinSet out{{SampleSet(pts, vals), pts, vals, params}, 0.0};
  if (std::isfinite(snrdb) && N >= 2) {
    const double mean = vals.col(0).mean();
    const double var = (vals.col(0).array() - mean).square().sum() / static_cast<double>(N - 1);
    out.sigma0 = std::sqrt(var / std::pow(10.0, snrdb / 10.0));
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix noisy_pts = pts;
  RowMatrix noisy_vals = vals;
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < 4; ++j) noisy_pts(i, j) += sigma_r * normal(rng);
    const double u = params(i, 0);
    const double v = params(i, 1);
    const double local = out.sigma0 * (1.0 + 0.1 * std::cos(u) + 0.1 * std::sin(v));
    noisy_vals(i, 0) += local * normal(rng);
  }
  out.data.samples = SampleSet(std::move(noisy_pts), std::move(noisy_vals));
  return out;
}

Generated klein_queries(Index count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::Configuration, "query count must be >= 1");
  std::mt19937_64 rng(seed);
  RowMatrix pts, vals, params;
  draw_klein_params(count, rng, pts, vals, params);
  SampleSet s(pts, vals);
  return {std::move(s), std::move(pts), std::move(vals), std::move(params)};
}

Generated gen_circle_arc(Index N, double a_min, double a_max, double radius) {
  if (N < 2) throw Error(ErrorKind::Configuration, "circle arc needs N >= 2");
  RowMatrix pts(N, 2), vals(N, 1);
  for (Index i = 0; i < N; ++i) {
    const double a = a_min + (a_max - a_min) * static_cast<double>(i) / static_cast<double>(N - 1);
    pts(i, 0) = radius * std::cos(a);
    pts(i, 1) = radius * std::sin(a);
    vals(i, 0) = a;
  }
  SampleSet s(pts, vals);
  RowMatrix params = vals;
  return {std::move(s), std::move(pts), std::move(vals), std::move(params)};
}

Embedding make_embedding(Index n, Index n_target, std::uint64_t seed) {
  if (n < 1 || n_target < n) throw Error(ErrorKind::Configuration, "embedding needs 1 <= n <= n_target");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(n_target, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n_target; ++r) G(r, c) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Embedding e;
  e.basis = qr.householderQ() * Matrix::Identity(n_target, n);
  return e;
}

SampleSet embed_high_dim(const SampleSet& samples, Index n_target, std::uint64_t seed) {
  const Embedding e = make_embedding(samples.ambient_dim(), n_target, seed);
  return SampleSet(e.apply(samples.points()), samples.values());
}

}  // namespace mmls::datasets
