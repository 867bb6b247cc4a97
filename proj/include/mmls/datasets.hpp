#pragma once

#include <cstdint>
#include <functional>
#include <numbers>

#include "mmls/sample_set.hpp"
#include "mmls/types.hpp"

namespace mmls::datasets {

/// Gaussian perturbations. sigma_domain maps a clean point to the standard
/// deviation of the isotropic noise added to it; sigma_target is the value
/// noise standard deviation.
struct NoiseModel {
  std::function<double(const Vector&)> sigma_domain;  // empty means 0
  double sigma_target = 0.0;
  std::uint64_t seed = 0;

  static NoiseModel clean() { return {}; }
  static NoiseModel constant(double domain, double target, std::uint64_t seed);
};

/// Samples plus the clean manifold points and exact target values they came from.
struct Generated {
  SampleSet samples;
  RowMatrix clean_points;
  RowMatrix clean_values;
  RowMatrix params;  // generator parameters per row (t, (phi, theta), (u, v), ...)
};

Vector helix_point(double t);

/// x = sin t, y = cos t, z = t on equispaced t over [t_min, t_max]; psi = z
/// of the clean point.
Generated gen_helix(Index N, const NoiseModel& noise, double t_min = -2.0 * std::numbers::pi,
                    double t_max = 2.0 * std::numbers::pi);

/// Unit sphere with theta the polar angle from +z and phi the azimuth:
/// (sin theta cos phi, sin theta sin phi, cos theta).
Vector sphere_point(double phi, double theta);

/// g x g grid: phi_j = 2 pi j / g, theta_i = pi (i + 1/2) / g (cell centers,
/// so no sample sits on a pole). Targets are (phi, theta).
Generated gen_sphere_grid(int g, const NoiseModel& noise);

/// Uniform random sphere points with phi in [phi_min, phi_max] and theta in
/// [theta_min, theta_max] (area-uniform inside the patch). Targets (phi, theta).
Generated sphere_patch_queries(Index count, double phi_min, double phi_max, double theta_min,
                               double theta_max, std::uint64_t seed);

Vector klein_point(double u, double v);
/// 7 sin 4u + 5 cos^2 2v + 6 exp(-32((u - pi)^2 + (v - pi)^2)).
double klein_target(double u, double v);

struct KleinSet {
  Generated data;
  double sigma0 = 0.0;
};

/// (u, v) uniform on [0, 2 pi)^2, r_i = p_i + sigma_r eta, value noise
/// sigma0 (1 + 0.1 cos u + 0.1 sin v) eps. sigma0 is solved from snrdb with
/// the unbiased sample variance of the clean targets; snrdb = +inf gives
/// clean values.
KleinSet gen_klein(Index N, double sigma_r, double snrdb, std::uint64_t seed);

/// Clean Klein bottle points for testing.
Generated klein_queries(Index count, std::uint64_t seed);

/// Points (cos a, sin a) * radius on equispaced angles in [a_min, a_max];
/// the target is the angle.
Generated gen_circle_arc(Index N, double a_min, double a_max, double radius = 1.0);

/// Linear isometry R^n -> R^n_target with orthonormal columns.
struct Embedding {
  Matrix basis;  // n_target x n

  RowMatrix apply(const RowMatrix& points) const { return points * basis.transpose(); }
  Vector apply(const Vector& point) const { return basis * point; }
};

Embedding make_embedding(Index n, Index n_target, std::uint64_t seed);

/// Samples mapped through make_embedding(n, n_target, seed); values unchanged.
SampleSet embed_high_dim(const SampleSet& samples, Index n_target, std::uint64_t seed);

}  // namespace mmls::datasets
