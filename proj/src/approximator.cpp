#include "mmls/approximator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmls/distance.hpp"

namespace mmls {

namespace {
constexpr double kSupportCore = 0.75;
}  // namespace

void ApproxConfig::validate() const {
  if (d < 1) throw Error(ErrorKind::Configuration, "intrinsic dimension d must be >= 1");
  if (m < 0) throw Error(ErrorKind::Configuration, "polynomial degree m must be >= 0");
  if (k && !(*k > 0.0 && std::isfinite(*k)))
    throw Error(ErrorKind::Configuration, "support multiplier k must be positive");
  if (h && !(*h > 0.0 && std::isfinite(*h)))
    throw Error(ErrorKind::Configuration, "bandwidth h must be positive");
  if (!(support_factor >= 1.0)) throw Error(ErrorKind::Configuration, "support_factor must be >= 1");
  if (!(enlarge_factor > 1.0)) throw Error(ErrorKind::Configuration, "enlarge_factor must be > 1");
  if (max_enlarge < 0) throw Error(ErrorKind::Configuration, "max_enlarge must be >= 0");
  if (!(rcond > 0.0 && rcond < 1.0)) throw Error(ErrorKind::Configuration, "rcond must lie in (0, 1)");
  frame.validate();
}

std::size_t BatchResult::failures() const {
  return static_cast<std::size_t>(std::count_if(status.begin(), status.end(), [](const QueryStatus& s) { return !s.ok; }));
}

WeightSpec resolve_weight(const Eigen::Ref<const Vector>& r, const SampleSet& samples,
                          const ApproxConfig& cfg, std::span<const double> dist2_to_r) {
  (void)r;
  WeightSpec w;
  w.family = cfg.interpolating() ? WeightFamily::InterpolatorySingular : cfg.family;
  w.eps_reg = cfg.eps_reg;
  if (!cfg.adaptive_support()) {
    w.k = *cfg.k;
    w.h = *cfg.h;
    w.validate();
    return w;
  }
  if (cfg.k) {
    w.k = *cfg.k;
    w.h = samples.sampling_stats().h_est;
    if (!(w.h > 0.0))
      throw Error(ErrorKind::InsufficientSamples, "fill distance needs at least two distinct samples",
                  {static_cast<std::size_t>(samples.size()), 2, 0.0, 0});
    w.validate();
    return w;
  }

  // The K nearest samples must sit in the core of the support where the
  // weight is non-negligible (theta_k(0.75 k h) ~ 1e-4); samples past that
  // barely enter the fit.
  const Index J = basis_size(cfg.d, cfg.m);
  const Index need = std::max<Index>(J, cfg.d + 1);
  const Index K = std::min<Index>(
      samples.size(), static_cast<Index>(std::ceil(cfg.support_factor * static_cast<double>(need))));
  std::vector<double> sorted(dist2_to_r.begin(), dist2_to_r.end());
  std::nth_element(sorted.begin(), sorted.begin() + (K - 1), sorted.end());
  const double r_k = std::sqrt(sorted[static_cast<std::size_t>(K - 1)]);
  const double radius = r_k / kSupportCore;
  if (!(radius > 0.0)) {
    throw Error(ErrorKind::InsufficientSamples, "nearest samples coincide with the query",
                {static_cast<std::size_t>(samples.size()), static_cast<std::size_t>(K), 0.0, 0});
  }

  // A kNN ball always exists, so bound it by the support the nearest sample
  // itself needs, grown by the enlargement budget. Farther queries are out of
  // range rather than extrapolated.
  const double growth = std::pow(cfg.enlarge_factor, cfg.max_enlarge);
  const auto nearest = std::min_element(dist2_to_r.begin(), dist2_to_r.end()) - dist2_to_r.begin();
  const double gap = std::sqrt(dist2_to_r[static_cast<std::size_t>(nearest)]);
  // The kNN radius of the nearest sample is at least r_k - gap (triangle
  // inequality), which settles the common case without another pass.
  if (gap * (1.0 + kSupportCore / growth) > r_k) {
    std::vector<double> around(static_cast<std::size_t>(samples.size()));
    squared_distances(samples.points(), samples.points().row(nearest).transpose(), around);
    const Index kth = std::min<Index>(K, samples.size() - 1);
    std::nth_element(around.begin(), around.begin() + kth, around.end());
    const double reach = std::sqrt(around[static_cast<std::size_t>(kth)]) / kSupportCore * growth;
    if (gap > reach) {
      throw Error(ErrorKind::NoSamplesInSupport,
                  "query is out of range: nearest sample at distance " + std::to_string(gap) +
                      " exceeds the adaptive reach " + std::to_string(reach),
                  {0, static_cast<std::size_t>(need), 0.0, 0});
    }
  }

  if (w.family == WeightFamily::Gaussian) {
    // exp(-t^2/h^2) is e^-4 at the nominal support radius.
    w.h = cfg.h ? *cfg.h : 0.5 * radius;
    w.k = radius / w.h;
  } else if (cfg.h) {
    w.h = *cfg.h;
    w.k = radius / w.h;
  } else {
    // Local spacing proxy: K samples over a d-dimensional ball of radius r_k.
    w.h = r_k / std::pow(static_cast<double>(K), 1.0 / cfg.d);
    w.k = radius / w.h;
  }
  w.validate();
  return w;
}

LocalFit fit_local(const Eigen::Ref<const Vector>& r_in, const SampleSet& samples, const ApproxConfig& cfg,
                   bool project) {
  cfg.validate();
  if (r_in.size() != samples.ambient_dim())
    throw Error(ErrorKind::Configuration, "query dimension does not match the samples");
  if (!r_in.allFinite()) throw Error(ErrorKind::Configuration, "query contains non-finite entries");
  const Vector r = r_in;
  const RowMatrix& targets = project ? samples.points() : samples.values();

  std::vector<double> d2(static_cast<std::size_t>(samples.size()));
  squared_distances(samples.points(), r, d2);

  LocalFit fit;
  fit.weight = resolve_weight(r, samples, cfg, d2);

  if (cfg.interpolating()) {
    const auto nearest = std::min_element(d2.begin(), d2.end());
    if (std::sqrt(*nearest) <= 1e-12 * fit.weight.h) {
      fit.exact_hit = true;
      fit.value = targets.row(nearest - d2.begin()).transpose();
      return fit;
    }
  }

  for (;;) {
    try {
      fit.frame = find_local_frame(r, samples, fit.weight, cfg.d, cfg.frame, d2);
      const auto& rows = fit.frame.neighborhood;
      const Index count = static_cast<Index>(rows.size());
      const AffineFrame& frame = fit.frame.frame;

      WlsProblem problem;
      problem.X.resize(count, cfg.d);
      problem.Y.resize(count, targets.cols());
      problem.w.resize(count);
      for (Index j = 0; j < count; ++j) {
        const Index i = rows[static_cast<std::size_t>(j)];
        const Vector offset = samples.points().row(i).transpose() - frame.origin;
        problem.X.row(j) = (frame.basis.transpose() * offset).transpose();
        problem.Y.row(j) = targets.row(i);
        problem.w(j) = detail::weight_value(offset.norm(), fit.weight);
      }
      fit.value = wls_fit(problem, cfg.m, FitOptions{cfg.rcond}).value_at_origin();
      return fit;
    } catch (const Error& e) {
      if (!cfg.adaptive_support() || !e.support_related() || fit.enlargements >= cfg.max_enlarge) throw;
      fit.weight.k *= cfg.enlarge_factor;
      ++fit.enlargements;
    }
  }
}

Vector approximate(const Eigen::Ref<const Vector>& r, const SampleSet& samples, const ApproxConfig& cfg) {
  return fit_local(r, samples, cfg, false).value;
}

Vector project_point(const Eigen::Ref<const Vector>& r, const SampleSet& samples, const ApproxConfig& cfg) {
  return fit_local(r, samples, cfg, true).value;
}

namespace {

void run_query(Index i, const RowMatrix& queries, const SampleSet& samples, const ApproxConfig& cfg,
               bool project, BatchResult& out) {
  ApproxConfig local = cfg;
  local.frame.seed = cfg.frame.seed + static_cast<std::uint64_t>(i);
  QueryStatus& status = out.status[static_cast<std::size_t>(i)];
  try {
    out.values.row(i) = fit_local(queries.row(i).transpose(), samples, local, project).value.transpose();
  } catch (const Error& e) {
    status.ok = false;
    status.kind = e.kind();
    status.message = e.what();
  } catch (const std::exception& e) {
    status.ok = false;
    status.message = e.what();
  }
}

BatchResult make_batch(const RowMatrix& queries, const SampleSet& samples, bool project) {
  if (queries.rows() > 0 && queries.cols() != samples.ambient_dim())
    throw Error(ErrorKind::Configuration, "query dimension does not match the samples");
  BatchResult out;
  const Index width = project ? samples.ambient_dim() : samples.value_dim();
  out.values = RowMatrix::Constant(queries.rows(), width, std::numeric_limits<double>::quiet_NaN());
  out.status.resize(static_cast<std::size_t>(queries.rows()));
  return out;
}

BatchResult batch_parallel(const RowMatrix& queries, const SampleSet& samples, const ApproxConfig& cfg,
                           bool project) {
  cfg.validate();
  BatchResult out = make_batch(queries, samples, project);
  const Index Q = queries.rows();
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < Q; ++i) run_query(i, queries, samples, cfg, project, out);
  return out;
}

BatchResult batch_serial(const RowMatrix& queries, const SampleSet& samples, const ApproxConfig& cfg,
                         bool project) {
  cfg.validate();
  BatchResult out = make_batch(queries, samples, project);
  for (Index i = 0; i < queries.rows(); ++i) run_query(i, queries, samples, cfg, project, out);
  return out;
}

}  // namespace

BatchResult approximate_batch(const RowMatrix& queries, const SampleSet& samples, const ApproxConfig& cfg) {
  return batch_parallel(queries, samples, cfg, false);
}

BatchResult project_batch(const RowMatrix& queries, const SampleSet& samples, const ApproxConfig& cfg) {
  return batch_parallel(queries, samples, cfg, true);
}

BatchResult approximate_batch_serial(const RowMatrix& queries, const SampleSet& samples,
                                     const ApproxConfig& cfg) {
  return batch_serial(queries, samples, cfg, false);
}

BatchResult project_batch_serial(const RowMatrix& queries, const SampleSet& samples, const ApproxConfig& cfg) {
  return batch_serial(queries, samples, cfg, true);
}

}  // namespace mmls
