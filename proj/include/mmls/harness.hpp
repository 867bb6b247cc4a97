#pragma once

#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "mmls/approximator.hpp"
#include "mmls/datasets.hpp"

namespace mmls::harness {

/// Least-squares slope through the origin of the points
/// (log(h_i / h_j), log(e_i / e_j)) over every unordered pair i < j.
struct SlopeFit {
  std::vector<std::pair<double, double>> pairs;
  double slope = 0.0;
  double stderr_slope = 0.0;
  double ci_low = 0.0;  // slope -/+ 1.96 standard errors
  double ci_high = 0.0;
};

SlopeFit fit_pairwise_slope(const std::vector<double>& h, const std::vector<double>& err);

struct ConvergenceOptions {
  int m = 1;
  std::vector<int> grid_sizes{20, 30, 40, 50};  // N = g^2
  Index queries = 200;
  std::uint64_t seed = 0;
  ApproxConfig base = default_sphere_config();
  // Held-out queries come from this patch, which keeps every support clear of
  // the phi seam and the poles at the coarsest grid.
  double phi_min = 0.5 * std::numbers::pi;
  double phi_max = 1.5 * std::numbers::pi;
  double theta_min = 0.25 * std::numbers::pi;
  double theta_max = 0.75 * std::numbers::pi;

  static ApproxConfig default_sphere_config();
};

struct ResolutionEntry {
  int grid = 0;
  Index N = 0;
  double h = 0.0;      // 1 / sqrt(N), the proxy used for the slope
  double h_est = 0.0;  // sample-based fill distance estimate
  double error = 0.0;
  std::size_t failures = 0;
};

struct ConvergenceReport {
  std::string metric;
  ConvergenceOptions options;
  std::vector<ResolutionEntry> entries;
  SlopeFit fit;
};

/// Sphere-grid convergence study. Error is the max over held-out queries of
/// the Euclidean norm of the (phi, theta) error, phi compared modulo 2 pi.
ConvergenceReport run_convergence(const ConvergenceOptions& options);

/// Same sweep measuring the mean distance from the in-support samples to the
/// fitted frame, averaged over the queries.
ConvergenceReport run_frame_residual_order(const ConvergenceOptions& options);

/// Aggregated per-trial (or per-fold) errors.
struct BenchReport {
  std::string name;
  std::map<std::string, std::string> config;  // echoed parameters
  std::vector<std::uint64_t> seeds;
  std::vector<double> errors;
  std::vector<std::size_t> failures;
  double mean = 0.0;
  double stddev = 0.0;
  /// Wall-clock seconds per phase; not part of the deterministic report.
  std::map<std::string, double> timing;

  void finalize();
};

struct KleinOptions {
  Index n = 1500;
  double snrdb = 5.0;
  double sigma_r = 0.0;
  int m = 1;
  int trials = 20;
  Index test_queries = 500;
  std::uint64_t seed = 0;
  ApproxConfig base = default_klein_config();

  static ApproxConfig default_klein_config();
};

/// Per trial t: training set with seed + t, an independent clean test set,
/// and the RMSE of psi~ against the exact target.
BenchReport run_klein(const KleinOptions& options);

struct HelixDemoOptions {
  Index samples = 2000;
  Index queries = 400;
  double sigma_target = 6.25;
  std::uint64_t seed = 0;
  ApproxConfig base = default_helix_config();

  static ApproxConfig default_helix_config();
  /// sqrt(8 + z^2) for a clean helix point.
  static double domain_sigma(const Vector& clean_point);
};

struct HelixRun {
  std::string name;
  SampleSet samples;
  RowMatrix queries;
  RowMatrix truth;  // exact psi at the clean point behind each query
  BatchResult predictions;
  BatchResult projections;
  double rmse = 0.0;      // psi~ vs truth over successful queries
  double raw_rmse = 0.0;  // noisy sample values vs their clean targets
};

struct HelixDemoResult {
  HelixRun clean_queries;  // value noise only, clean on-helix queries
  HelixRun noisy_queries;  // value noise only, queries with domain noise
  HelixRun noisy_domain;   // domain + value noise, evaluated at the samples
};

HelixDemoResult run_helix_demo(const HelixDemoOptions& options);

/// Fold i fits on every sample but i and evaluates at r_i; the error is the
/// Euclidean norm of psi~(r_i) - psi_i. Fold i uses frame seed base + i.
BenchReport run_loo_cv(const SampleSet& samples, const ApproxConfig& cfg);

struct ScalingOptions {
  std::vector<Index> n_list{10000, 20000};
  Index N = 2000;
  int m = 1;
  Index queries = 5;
  int repeats = 3;
  std::uint64_t seed = 0;
};

struct ScalingRow {
  Index n = 0;
  double median_seconds = 0.0;  // per query
  RowMatrix predictions;
  std::size_t failures = 0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double max_prediction_spread = 0.0;  // across n, per query
};

/// Clean helix (d = 1) embedded isometrically into each n of n_list;
/// queries sit next to the curve and are embedded with the same map.
ScalingReport run_scaling(const ScalingOptions& options);

}  // namespace mmls::harness
