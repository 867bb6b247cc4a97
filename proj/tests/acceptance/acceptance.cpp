// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <Eigen/LU>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mmls/approximator.hpp"
#include "mmls/datasets.hpp"
#include "mmls/harness.hpp"
#include "mmls/polybasis.hpp"
#include "test_util.hpp"

using namespace mmls;
using test_util::random_orthonormal;
using test_util::random_vector;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Sphere convergence order for m = 1 and m = 3.
Outcome convergence_order() {
  const auto t0 = std::chrono::steady_clock::now();
  harness::ConvergenceOptions o;
  o.m = 1;
  const double s1 = harness::run_convergence(o).fit.slope;
  o.m = 3;
  const double s3 = harness::run_convergence(o).fit.slope;
  const double secs = elapsed(t0);
  const bool ok = std::abs(s1 - 2.0) <= 0.3 && std::abs(s3 - 4.0) <= 0.5 && secs < 300.0;
  return {ok, fmt("m=1 slope %.4f (2.0 +/- 0.3), m=3 slope %.4f (4.0 +/- 0.5), %.1f s", s1, s3, secs)};
}

// 2. Klein-bottle error bands.
Outcome klein_accuracy() {
  const auto t0 = std::chrono::steady_clock::now();
  harness::KleinOptions a;
  a.snrdb = 5.0;
  a.m = 1;
  const double e1 = harness::run_klein(a).mean;
  harness::KleinOptions b;
  b.snrdb = 2.0;
  b.m = 3;
  const double e3 = harness::run_klein(b).mean;
  const double secs = elapsed(t0);
  const bool ok1 = e1 >= 1.51 - 3 * 0.34 && e1 <= 1.51 + 3 * 0.34;
  const bool ok3 = e3 >= 1.05 - 3 * 0.28 && e3 <= 1.05 + 3 * 0.28;
  return {ok1 && ok3 && secs < 600.0,
          fmt("snrdb=5 m=1 mean %.4f in [0.49, 2.53]; snrdb=2 m=3 mean %.4f in [0.21, 1.89]; %.1f s", e1, e3, secs)};
}

// 3. Polynomial reproduction on random flats.
Outcome polynomial_reproduction() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int failures = 0;
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const int d = 1 + c % 3;
    const int m = (c / 3) % 4;
    const Index n = d + 1 + static_cast<Index>(rng() % 3);
    const Vector origin = random_vector(n, rng);
    const Matrix basis = random_orthonormal(n, d, rng);
    const Matrix coeffs = Matrix::Random(basis_size(d, m), 1);
    const Index N = 30 * basis_size(d, m) + 20;
    RowMatrix pts(N, n), vals(N, 1);
    auto psi = [&](const Vector& p) { return coeffs.col(0).dot(monomial_basis(basis.transpose() * (p - origin), m)); };
    for (Index i = 0; i < N; ++i) {
      Vector cc(d);
      for (int j = 0; j < d; ++j) cc(j) = u(rng);
      const Vector p = origin + basis * cc;
      pts.row(i) = p.transpose();
      vals(i, 0) = psi(p);
    }
    const SampleSet s(pts, vals);
    Vector cc(d);
    for (int j = 0; j < d; ++j) cc(j) = 0.6 * u(rng);
    const Vector on = origin + basis * cc;
    Vector normal = random_vector(n, rng);
    normal -= basis * (basis.transpose() * normal);
    const Vector r = on + 0.1 * normal.normalized();
    ApproxConfig cfg;
    cfg.d = d;
    cfg.m = m;
    cfg.frame.seed = static_cast<std::uint64_t>(c);
    try {
      const double expected = psi(on);
      const double rel = std::abs(approximate(r, s, cfg)(0) - expected) / std::max(1.0, std::abs(expected));
      worst = std::max(worst, rel);
      if (!(rel < 1e-6)) ++failures;
    } catch (const std::exception&) {
      ++failures;
    }
  }
  return {failures == 0, fmt("100 cases, %.0f failures, worst relative error %.3g (tol 1e-6)", failures, worst)};
}

// 4. Dual coefficients against the primal fit and a dense KKT solve.
Outcome dual_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> wd(0.1, 1.0);
  double worst_primal = 0.0;
  double worst_kkt = 0.0;
  for (int c = 0; c < 100; ++c) {
    const int d = 1 + c % 3;
    const int m = 1 + (c / 3) % 3;
    const Index J = basis_size(d, m);
    const Index N = 2 * J + 3;
    WlsProblem p{Matrix(N, d), Matrix(N, 1), Vector(N)};
    for (Index i = 0; i < N; ++i) {
      for (int j = 0; j < d; ++j) p.X(i, j) = u(rng);
      p.Y(i, 0) = u(rng);
      p.w(i) = wd(rng);
    }
    const Vector x0 = random_vector(d, rng, 0.2);
    const double dual = backus_gilbert_coeffs(p, m, x0).dot(p.Y.col(0));
    const double primal = wls_fit(p, m).evaluate(x0)(0);
    const Matrix E = design_matrix(p.X, m);
    Matrix K = Matrix::Zero(N + J, N + J);
    K.topLeftCorner(N, N) = p.w.cwiseInverse().asDiagonal();
    K.topRightCorner(N, J) = E;
    K.bottomLeftCorner(J, N) = E.transpose();
    Vector rhs = Vector::Zero(N + J);
    rhs.tail(J) = monomial_basis(x0, m);
    const double kkt = K.fullPivLu().solve(rhs).head(N).dot(p.Y.col(0));
    worst_primal = std::max(worst_primal, std::abs(dual - primal));
    worst_kkt = std::max({worst_kkt, std::abs(dual - kkt), std::abs(primal - kkt)});
  }
  return {worst_primal < 1e-8 && worst_kkt < 1e-8,
          fmt("100 problems, max |dual - primal| %.3g, max deviation from KKT %.3g (tol 1e-8)", worst_primal, worst_kkt)};
}

// Samples with targets on three curved manifolds.
struct Manifold {
  SampleSet samples;
  int d;
  double h;
  double k;
};

std::vector<Manifold> curved_manifolds() {
  using namespace datasets;
  std::vector<Manifold> out;
  out.push_back({gen_sphere_grid(30, NoiseModel::constant(0.0, 0.1, 1)).samples, 2, 0.1, 5.0});
  out.push_back({gen_helix(600, NoiseModel::constant(0.0, 0.3, 2)).samples, 1, 0.05, 6.0});
  const auto circle = gen_circle_arc(300, 0.0, 1.8 * kPi);
  out.push_back({embed_high_dim(circle.samples, 12, 3), 1, 0.04, 6.0});
  return out;
}

Vector point_near(const Manifold& mf, std::mt19937_64& rng, double offset) {
  const Index i = static_cast<Index>(rng() % static_cast<std::uint64_t>(mf.samples.size()));
  return mf.samples.points().row(i).transpose() + random_vector(mf.samples.ambient_dim(), rng, offset);
}

// 5. Projection invariance along arbitrary normal directions.
Outcome projection_invariance() {
  std::mt19937_64 rng(5);
  const auto manifolds = curved_manifolds();
  double worst = 0.0;
  int failures = 0;
  for (int c = 0; c < 50; ++c) {
    const Manifold& mf = manifolds[static_cast<std::size_t>(c % 3)];
    ApproxConfig cfg;
    cfg.d = mf.d;
    cfg.m = 1 + c % 3;
    cfg.h = mf.h;
    cfg.k = mf.k;
    cfg.frame.seed = static_cast<std::uint64_t>(c);
    try {
      const Vector r = point_near(mf, rng, 0.03);
      const LocalFit base = fit_local(r, mf.samples, cfg);
      const AffineFrame& f = base.frame.frame;
      Vector nu = random_vector(r.size(), rng);
      nu -= f.basis * (f.basis.transpose() * nu);
      const double t = std::uniform_real_distribution<double>(-1.0, 1.0)(rng) * (r - f.origin).norm();
      const Vector r2 = f.origin + t * nu.normalized();
      const double diff = (approximate(r2, mf.samples, cfg) - base.value).norm();
      worst = std::max(worst, diff);
      if (!(diff < 1e-8)) ++failures;
    } catch (const std::exception&) {
      ++failures;
    }
  }
  return {failures == 0, fmt("50 cases, %.0f failures, max |change| %.3g (tol 1e-8)", failures, worst)};
}

// 6. Interpolation at samples and the midpoint deviation pinned from the first run.
constexpr double kPinnedMidpointDeviation = 6.242e-3;

Outcome interpolation() {
  const Index N = 400;
  const double span = 1.5 * kPi;
  auto g = datasets::gen_circle_arc(N, 0.0, span);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 0.01);
  RowMatrix vals(N, 1);
  for (Index i = 0; i < N; ++i) vals(i, 0) = std::sin(3.0 * g.params(i, 0)) + noise(rng);
  const SampleSet s = g.samples.with_values(vals);
  ApproxConfig interp;
  interp.interpolatory = true;
  ApproxConfig plain;
  int misses = 0;
  for (Index i = 0; i < N; ++i)
    if (approximate(s.points().row(i).transpose(), s, interp)(0) != vals(i, 0)) ++misses;
  const double spacing = span / static_cast<double>(N - 1);
  double deviation = 0.0;
  for (Index i = 20; i + 21 < N; ++i) {
    const double a = (static_cast<double>(i) + 0.5) * spacing;
    Vector r(2);
    r << std::cos(a), std::sin(a);
    deviation = std::max(deviation, std::abs(approximate(r, s, interp)(0) - approximate(r, s, plain)(0)));
  }
  const bool ok = misses == 0 && deviation <= 1.05 * kPinnedMidpointDeviation + 1e-15 && deviation < spacing;
  return {ok, fmt("%.0f sample mismatches; max midpoint deviation %.4g (pinned %.4g)", misses, deviation,
                  kPinnedMidpointDeviation) +
                  fmt(", spacing %.4g", spacing)};
}

// 7. Rigid-motion invariance and coefficient scale invariance.
Outcome invariance_suite() {
  std::mt19937_64 rng(7);
  const auto manifolds = curved_manifolds();
  double worst_rigid = 0.0;
  int rigid_fail = 0;
  for (int c = 0; c < 50; ++c) {
    const Manifold& mf = manifolds[static_cast<std::size_t>(c % 3)];
    const Index n = mf.samples.ambient_dim();
    const Matrix R = test_util::random_rotation(n, rng);
    const Vector t = random_vector(n, rng, 2.0);
    const SampleSet moved((mf.samples.points() * R.transpose()).rowwise() + t.transpose(), mf.samples.values());
    ApproxConfig cfg;
    cfg.d = mf.d;
    cfg.m = c % 4;
    cfg.frame.init = FrameInit::WeightedPCA;
    try {
      const Vector r = point_near(mf, rng, 0.02);
      const double diff = (approximate(R * r + t, moved, cfg) - approximate(r, mf.samples, cfg)).norm();
      worst_rigid = std::max(worst_rigid, diff);
      if (!(diff < 1e-8)) ++rigid_fail;
    } catch (const std::exception&) {
      ++rigid_fail;
    }
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> logc(-5.0, 5.0);
  double worst_scale = 0.0;
  int scale_fail = 0;
  for (int c = 0; c < 50; ++c) {
    const int d = 1 + c % 3;
    const int m = c % 4;
    const Index N = 3 * basis_size(d, m) + 5;
    const double h = 0.5;
    const double scale = std::exp(logc(rng));
    WlsProblem p{Matrix(N, d), Matrix::Zero(N, 1), Vector(N)};
    for (Index i = 0; i < N; ++i)
      for (int j = 0; j < d; ++j) p.X(i, j) = u(rng);
    const WeightSpec w{WeightFamily::TruncatedExp, 4.0, h, -1.0};
    WeightSpec ws = w;
    ws.h = scale * h;
    WlsProblem q = p;
    q.X *= scale;
    for (Index i = 0; i < N; ++i) {
      p.w(i) = weight_eval(p.X.row(i).norm(), w);
      q.w(i) = weight_eval(q.X.row(i).norm(), ws);
    }
    const Vector a = backus_gilbert_coeffs(p, m, Vector::Zero(d));
    const Vector b = backus_gilbert_coeffs(q, m, Vector::Zero(d));
    const double diff = (a - b).cwiseAbs().maxCoeff();
    worst_scale = std::max(worst_scale, diff);
    if (!(diff < 1e-10)) ++scale_fail;
  }
  return {rigid_fail == 0 && scale_fail == 0,
          fmt("rigid: 50 cases, max diff %.3g (tol 1e-8); ", worst_rigid) +
              fmt("scale: 50 cases, max coefficient diff %.3g (tol 1e-10); failures %.0f", worst_scale,
                  rigid_fail + scale_fail)};
}

// 8. Frame residual order on the clean sphere.
Outcome frame_residual_order() {
  harness::ConvergenceOptions o;
  const double slope = harness::run_frame_residual_order(o).fit.slope;
  return {std::abs(slope - 2.0) <= 0.3, fmt("slope %.4f (2.0 +/- 0.3)", slope)};
}

// 9. Per-query cost against ambient dimension.
Outcome ambient_scaling() {
  harness::ScalingOptions o;
  const auto r = harness::run_scaling(o);
  const double ratio = r.rows[1].median_seconds / r.rows[0].median_seconds;
  return {ratio < 2.5 && r.max_prediction_spread < 1e-6,
          fmt("time(2e4)/time(1e4) = %.3f (< 2.5); max prediction spread %.3g (< 1e-6); per query %.4f s", ratio,
              r.max_prediction_spread, r.rows[1].median_seconds)};
}

// 10. Helix denoising.
Outcome helix_denoising() {
  const auto r = harness::run_helix_demo(harness::HelixDemoOptions{});
  const auto& run = r.clean_queries;
  const bool ok = run.predictions.failures() == 0 && run.rmse <= 0.5 * run.raw_rmse;
  return {ok, fmt("RMSE %.4f vs raw %.4f (ratio %.3f <= 0.5)", run.rmse, run.raw_rmse, run.rmse / run.raw_rmse)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"convergence order", convergence_order},
      {"klein accuracy", klein_accuracy},
      {"polynomial reproduction", polynomial_reproduction},
      {"dual solver oracle", dual_oracle},
      {"projection invariance", projection_invariance},
      {"interpolation", interpolation},
      {"invariance suite", invariance_suite},
      {"frame residual order", frame_residual_order},
      {"ambient scaling", ambient_scaling},
      {"helix denoising", helix_denoising},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
