#include "mmls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace mmls::harness {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <class Fn>
ConvergenceReport sweep(const ConvergenceOptions& options, std::string metric, Fn&& measure) {
  if (options.grid_sizes.size() < 3)
    throw Error(ErrorKind::Configuration, "convergence study needs at least 3 resolutions");
  ConvergenceReport report;
  report.metric = std::move(metric);
  report.options = options;
  const auto queries = datasets::sphere_patch_queries(options.queries, options.phi_min, options.phi_max,
                                                      options.theta_min, options.theta_max, options.seed);
  ApproxConfig cfg = options.base;
  cfg.m = options.m;
  cfg.frame.seed = options.seed;

  std::vector<double> hs;
  std::vector<double> errs;
  for (int g : options.grid_sizes) {
    const auto data = datasets::gen_sphere_grid(g, datasets::NoiseModel::clean());
    ResolutionEntry e;
    e.grid = g;
    e.N = data.samples.size();
    e.h = 1.0 / std::sqrt(static_cast<double>(e.N));
    e.h_est = data.samples.sampling_stats().h_est;
    std::tie(e.error, e.failures) = measure(data.samples, queries, cfg);
    report.entries.push_back(e);
    if (std::isfinite(e.error) && e.error > 0.0) {
      hs.push_back(e.h);
      errs.push_back(e.error);
    }
  }
  if (hs.size() >= 2) report.fit = fit_pairwise_slope(hs, errs);
  else report.fit.slope = std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace

SlopeFit fit_pairwise_slope(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2)
    throw Error(ErrorKind::Configuration, "slope fit needs at least two matching (h, error) entries");
  SlopeFit fit;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t j = i + 1; j < h.size(); ++j) {
      const double x = std::log(h[i] / h[j]);
      const double y = std::log(err[i] / err[j]);
      fit.pairs.emplace_back(x, y);
      sxx += x * x;
      sxy += x * y;
    }
  }
  fit.slope = sxy / sxx;
  double rss = 0.0;
  for (const auto& [x, y] : fit.pairs) rss += (y - fit.slope * x) * (y - fit.slope * x);
  const double dof = static_cast<double>(fit.pairs.size()) - 1.0;
  fit.stderr_slope = dof > 0.0 ? std::sqrt(rss / dof / sxx) : 0.0;
  fit.ci_low = fit.slope - 1.96 * fit.stderr_slope;
  fit.ci_high = fit.slope + 1.96 * fit.stderr_slope;
  return fit;
}

ApproxConfig ConvergenceOptions::default_sphere_config() {
  ApproxConfig cfg;
  cfg.d = 2;
  cfg.m = 1;
  return cfg;
}

ConvergenceReport run_convergence(const ConvergenceOptions& options) {
  return sweep(options, "max-error", [](const SampleSet& samples, const datasets::Generated& q,
                                        const ApproxConfig& cfg) {
    const BatchResult res = approximate_batch(q.clean_points, samples, cfg);
    double worst = 0.0;
    std::size_t ok = 0;
    for (Index i = 0; i < q.clean_points.rows(); ++i) {
      if (!res.status[static_cast<std::size_t>(i)].ok) continue;
      const double dphi = wrap_angle(res.values(i, 0) - q.clean_values(i, 0));
      const double dtheta = res.values(i, 1) - q.clean_values(i, 1);
      worst = std::max(worst, std::hypot(dphi, dtheta));
      ++ok;
    }
    return std::pair{ok ? worst : std::numeric_limits<double>::quiet_NaN(), res.failures()};
  });
}

ConvergenceReport run_frame_residual_order(const ConvergenceOptions& options) {
  return sweep(options, "mean-frame-residual", [](const SampleSet& samples, const datasets::Generated& q,
                                                  const ApproxConfig& cfg) {
    const Index Q = q.clean_points.rows();
    std::vector<double> per_query(static_cast<std::size_t>(Q), std::numeric_limits<double>::quiet_NaN());
#pragma omp parallel for schedule(dynamic)
    for (Index i = 0; i < Q; ++i) {
      ApproxConfig local = cfg;
      local.frame.seed = cfg.frame.seed + static_cast<std::uint64_t>(i);
      try {
        const LocalFit fit = fit_local(q.clean_points.row(i).transpose(), samples, local);
        const AffineFrame& f = fit.frame.frame;
        double total = 0.0;
        for (Index row : fit.frame.neighborhood) {
          const Vector off = samples.points().row(row).transpose() - f.origin;
          total += (off - f.basis * (f.basis.transpose() * off)).norm();
        }
        per_query[static_cast<std::size_t>(i)] = total / static_cast<double>(fit.frame.neighborhood.size());
      } catch (const Error&) {
      }
    }
    double sum = 0.0;
    std::size_t ok = 0;
    for (double v : per_query)
      if (std::isfinite(v)) {
        sum += v;
        ++ok;
      }
    return std::pair{ok ? sum / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN(),
                     static_cast<std::size_t>(Q) - ok};
  });
}

void BenchReport::finalize() {
  std::vector<double> finite;
  for (double e : errors)
    if (std::isfinite(e)) finite.push_back(e);
  if (finite.empty()) {
    mean = stddev = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  double sum = 0.0;
  for (double e : finite) sum += e;
  mean = sum / static_cast<double>(finite.size());
  double ss = 0.0;
  for (double e : finite) ss += (e - mean) * (e - mean);
  stddev = finite.size() > 1 ? std::sqrt(ss / static_cast<double>(finite.size() - 1)) : 0.0;
}

ApproxConfig KleinOptions::default_klein_config() {
  ApproxConfig cfg;
  cfg.d = 2;
  cfg.m = 1;
  // Noisy targets: a wider support averages the value noise down.
  cfg.support_factor = 6.0;
  return cfg;
}

BenchReport run_klein(const KleinOptions& options) {
  if (options.trials < 1) throw Error(ErrorKind::Configuration, "Klein benchmark needs trials >= 1");
  BenchReport report;
  report.name = "klein";
  report.config = {{"n", std::to_string(options.n)},
                   {"snrdb", format_real(options.snrdb)},
                   {"sigma_r", format_real(options.sigma_r)},
                   {"m", std::to_string(options.m)},
                   {"trials", std::to_string(options.trials)},
                   {"test_queries", std::to_string(options.test_queries)},
                   {"seed", std::to_string(options.seed)},
                   {"support_factor", format_real(options.base.support_factor)}};
  ApproxConfig cfg = options.base;
  cfg.m = options.m;
  double fit_seconds = 0.0;
  for (int t = 0; t < options.trials; ++t) {
    const std::uint64_t trial_seed = options.seed + static_cast<std::uint64_t>(t);
    const auto train = datasets::gen_klein(options.n, options.sigma_r, options.snrdb, trial_seed);
    const auto test = datasets::klein_queries(options.test_queries, derive_seed(trial_seed, 1));
    cfg.frame.seed = trial_seed;
    const auto start = std::chrono::steady_clock::now();
    const BatchResult res = approximate_batch(test.clean_points, train.data.samples, cfg);
    fit_seconds += seconds_since(start);
    double se = 0.0;
    std::size_t ok = 0;
    for (Index i = 0; i < test.clean_points.rows(); ++i) {
      if (!res.status[static_cast<std::size_t>(i)].ok) continue;
      const double e = res.values(i, 0) - test.clean_values(i, 0);
      se += e * e;
      ++ok;
    }
    report.seeds.push_back(trial_seed);
    report.errors.push_back(ok ? std::sqrt(se / static_cast<double>(ok)) : std::numeric_limits<double>::quiet_NaN());
    report.failures.push_back(res.failures());
  }
  report.timing["approximate"] = fit_seconds;
  report.finalize();
  return report;
}

ApproxConfig HelixDemoOptions::default_helix_config() {
  ApproxConfig cfg;
  cfg.d = 1;
  cfg.m = 1;
  cfg.support_factor = 20.0;
  return cfg;
}

double HelixDemoOptions::domain_sigma(const Vector& clean_point) {
  return std::sqrt(8.0 + clean_point(2) * clean_point(2));
}

namespace {

double rmse_over(const BatchResult& res, const RowMatrix& truth) {
  double se = 0.0;
  std::size_t ok = 0;
  for (Index i = 0; i < truth.rows(); ++i) {
    if (!res.status[static_cast<std::size_t>(i)].ok) continue;
    se += (res.values.row(i) - truth.row(i)).squaredNorm();
    ++ok;
  }
  return ok ? std::sqrt(se / static_cast<double>(ok)) : std::numeric_limits<double>::quiet_NaN();
}

double raw_rmse(const datasets::Generated& g) {
  return std::sqrt((g.samples.values() - g.clean_values).squaredNorm() / static_cast<double>(g.clean_values.rows()));
}

HelixRun evaluate(std::string name, const datasets::Generated& train, RowMatrix queries, RowMatrix truth,
                  const ApproxConfig& cfg) {
  HelixRun run{std::move(name), train.samples, std::move(queries), std::move(truth), {}, {}, 0.0, raw_rmse(train)};
  run.predictions = approximate_batch(run.queries, run.samples, cfg);
  run.projections = project_batch(run.queries, run.samples, cfg);
  run.rmse = rmse_over(run.predictions, run.truth);
  return run;
}

}  // namespace

HelixDemoResult run_helix_demo(const HelixDemoOptions& options) {
  using datasets::NoiseModel;
  ApproxConfig cfg = options.base;
  cfg.frame.seed = options.seed;

  NoiseModel value_noise = NoiseModel::constant(0.0, options.sigma_target, derive_seed(options.seed, 1));
  const auto train = datasets::gen_helix(options.samples, value_noise);

  // Query parameters drawn uniformly on the helix.
  std::mt19937_64 rng(derive_seed(options.seed, 2));
  std::uniform_real_distribution<double> uni(-2.0 * kPi, 2.0 * kPi);
  RowMatrix clean_q(options.queries, 3);
  RowMatrix truth(options.queries, 1);
  for (Index i = 0; i < options.queries; ++i) {
    const double t = uni(rng);
    clean_q.row(i) = datasets::helix_point(t).transpose();
    truth(i, 0) = t;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix noisy_q = clean_q;
  for (Index i = 0; i < options.queries; ++i) {
    const double s = HelixDemoOptions::domain_sigma(clean_q.row(i).transpose());
    for (Index j = 0; j < 3; ++j) noisy_q(i, j) += s * normal(rng);
  }

  NoiseModel both;
  both.sigma_domain = &HelixDemoOptions::domain_sigma;
  both.sigma_target = options.sigma_target;
  both.seed = derive_seed(options.seed, 3);
  const auto noisy_train = datasets::gen_helix(options.samples, both);

  HelixDemoResult out{
      evaluate("value-noise/clean-queries", train, clean_q, truth, cfg),
      evaluate("value-noise/noisy-queries", train, noisy_q, truth, cfg),
      evaluate("domain-noise/at-samples", noisy_train, noisy_train.samples.points(), noisy_train.clean_values, cfg),
  };
  return out;
}

BenchReport run_loo_cv(const SampleSet& samples, const ApproxConfig& cfg) {
  cfg.validate();
  if (samples.size() < 2) throw Error(ErrorKind::Configuration, "leave-one-out needs at least two samples");
  BenchReport report;
  report.name = "loo-cv";
  report.config = {{"N", std::to_string(samples.size())},
                   {"n", std::to_string(samples.ambient_dim())},
                   {"d", std::to_string(cfg.d)},
                   {"m", std::to_string(cfg.m)},
                   {"seed", std::to_string(cfg.frame.seed)}};
  const Index N = samples.size();
  report.errors.assign(static_cast<std::size_t>(N), std::numeric_limits<double>::quiet_NaN());
  report.failures.assign(static_cast<std::size_t>(N), 0);
  report.seeds.resize(static_cast<std::size_t>(N));
  const auto start = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < N; ++i) {
    ApproxConfig local = cfg;
    local.frame.seed = cfg.frame.seed + static_cast<std::uint64_t>(i);
    report.seeds[static_cast<std::size_t>(i)] = local.frame.seed;
    try {
      const SampleSet fold = samples.without(i);
      const Vector value = approximate(samples.points().row(i).transpose(), fold, local);
      report.errors[static_cast<std::size_t>(i)] = (value - samples.values().row(i).transpose()).norm();
    } catch (const Error&) {
      report.failures[static_cast<std::size_t>(i)] = 1;
    }
  }
  report.timing["folds"] = seconds_since(start);
  report.finalize();
  return report;
}

ScalingReport run_scaling(const ScalingOptions& options) {
  if (options.n_list.empty() || options.queries < 1 || options.repeats < 1)
    throw Error(ErrorKind::Configuration, "scaling needs a nonempty n_list, queries >= 1 and repeats >= 1");
  const auto base = datasets::gen_helix(options.N, datasets::NoiseModel::clean());

  std::mt19937_64 rng(derive_seed(options.seed, 4));
  std::uniform_real_distribution<double> uni(-1.5 * kPi, 1.5 * kPi);
  RowMatrix queries(options.queries, 3);
  for (Index i = 0; i < options.queries; ++i) {
    const double t = uni(rng);
    Vector p = datasets::helix_point(t);
    // Step off the curve along the principal normal (-sin t, -cos t, 0).
    p(0) -= 0.01 * std::sin(t);
    p(1) -= 0.01 * std::cos(t);
    queries.row(i) = p.transpose();
  }

  ApproxConfig cfg;
  cfg.d = 1;
  cfg.m = options.m;
  cfg.frame.seed = options.seed;

  ScalingReport report;
  for (Index n : options.n_list) {
    const auto embed = datasets::make_embedding(3, n, derive_seed(options.seed, 100 + static_cast<std::uint64_t>(n)));
    const SampleSet high(embed.apply(base.samples.points()), base.samples.values());
    const RowMatrix q = embed.apply(queries);

    ScalingRow row;
    row.n = n;
    row.predictions = RowMatrix::Constant(options.queries, 1, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> times;
    for (Index i = 0; i < options.queries; ++i) {
      ApproxConfig local = cfg;
      local.frame.seed = cfg.frame.seed + static_cast<std::uint64_t>(i);
      for (int rep = 0; rep < options.repeats; ++rep) {
        const auto start = std::chrono::steady_clock::now();
        try {
          row.predictions(i, 0) = approximate(q.row(i).transpose(), high, local)(0);
        } catch (const Error&) {
          if (rep == 0) ++row.failures;
        }
        times.push_back(seconds_since(start));
      }
    }
    std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2), times.end());
    row.median_seconds = times[times.size() / 2];
    report.rows.push_back(std::move(row));
  }

  for (Index i = 0; i < options.queries; ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : report.rows) {
      lo = std::min(lo, row.predictions(i, 0));
      hi = std::max(hi, row.predictions(i, 0));
    }
    const bool all_finite = std::all_of(report.rows.begin(), report.rows.end(),
                                        [i](const ScalingRow& r) { return std::isfinite(r.predictions(i, 0)); });
    report.max_prediction_spread = all_finite ? std::max(report.max_prediction_spread, hi - lo)
                                              : std::numeric_limits<double>::infinity();
  }
  return report;
}

}  // namespace mmls::harness
