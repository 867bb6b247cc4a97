#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>

#include "mmls/approximator.hpp"
#include "mmls/datasets.hpp"
#include "mmls/error.hpp"
#include "mmls/harness.hpp"
#include "mmls/io.hpp"

namespace mmls::cli {

namespace {

/// Flags shared by every command that builds an ApproxConfig. Each one
/// overrides the same key from --config.
struct ConfigFlags {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> d;
  std::optional<int> m;
  std::optional<std::string> weight;
  std::optional<std::string> k;
  std::optional<std::string> h;
  bool interpolatory = false;
  std::optional<double> support_factor;
  std::optional<std::string> init;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "base random seed");
    app->add_option("--d", d, "intrinsic dimension");
    app->add_option("--m", m, "polynomial degree");
    app->add_option("--weight", weight, "truncated-exp | gaussian | interpolatory");
    app->add_option("--k", k, "support multiplier, or 'auto'");
    app->add_option("--h", h, "fill-distance scale, or 'auto'");
    app->add_flag("--interpolatory", interpolatory, "interpolate the samples exactly");
    app->add_option("--support-factor", support_factor, "adaptive support size per basis function");
    app->add_option("--init", init, "frame initialisation: random | pca");
  }

  io::ConfigMap merged() const {
    io::ConfigMap map = config_file.empty() ? io::ConfigMap{} : io::read_config(config_file);
    if (seed) map["seed"] = std::to_string(*seed);
    if (d) map["d"] = std::to_string(*d);
    if (m) map["m"] = std::to_string(*m);
    if (weight) map["weight"] = *weight;
    if (k) map["k"] = *k;
    if (h) map["h"] = *h;
    if (interpolatory) map["interpolatory"] = "true";
    if (support_factor) map["support_factor"] = io::format_double(*support_factor);
    if (init) map["init"] = *init;
    return map;
  }

  ApproxConfig resolve(ApproxConfig base) const {
    ApproxConfig cfg = io::apply_config(std::move(base), merged());
    cfg.validate();
    return cfg;
  }
};

bool all_nonfinite(const std::vector<double>& values) {
  for (double v : values)
    if (std::isfinite(v)) return false;
  return true;
}

void echo_config(const std::string& path, const ApproxConfig& cfg, const io::ConfigMap& extra = {}) {
  io::ConfigMap map = io::describe(cfg);
  for (const auto& [key, value] : extra) map[io::kExperimentPrefix + key] = value;
  io::write_text(path, io::format_config(map));
}

struct FitEvalArgs {
  std::string samples;
  std::string queries;
  std::string out;
  std::string frame_dump;
  ConfigFlags flags;
};

int cmd_pointwise(const FitEvalArgs& a, bool project, std::ostream& out) {
  const SampleSet samples = io::read_samples(a.samples);
  const RowMatrix queries = io::read_queries(a.queries, samples.ambient_dim());
  const ApproxConfig cfg = a.flags.resolve(ApproxConfig{});
  if (cfg.d >= samples.ambient_dim())
    throw Error(ErrorKind::Configuration, "d must be smaller than the ambient dimension of the samples");

  const BatchResult result =
      project ? project_batch(queries, samples, cfg) : approximate_batch(queries, samples, cfg);
  const auto header = project ? io::prefixed_header("x", samples.ambient_dim())
                              : io::prefixed_header("f", samples.value_dim());
  io::write_matrix(a.out, header, result.values, &result.status);
  echo_config(a.out + ".config.txt", cfg);

  if (!a.frame_dump.empty()) {
    std::vector<std::optional<FrameResult>> frames(static_cast<std::size_t>(queries.rows()));
    for (Index i = 0; i < queries.rows(); ++i) {
      ApproxConfig local = cfg;
      local.frame.seed = cfg.frame.seed + static_cast<std::uint64_t>(i);
      try {
        frames[static_cast<std::size_t>(i)] = fit_local(queries.row(i).transpose(), samples, local, project).frame;
      } catch (const Error&) {
      }
    }
    io::write_frame_dump(a.frame_dump, frames);
  }
  out << queries.rows() << " queries, " << result.failures() << " failed\n";
  return kOk;
}

struct GenArgs {
  std::string dataset = "helix";
  Index n = 500;
  int grid = 20;
  double sigma_domain = 0.0;
  double sigma_target = 0.0;
  double snrdb = std::numeric_limits<double>::infinity();
  double sigma_r = 0.0;
  Index embed_dim = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string clean_out;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const auto noise = datasets::NoiseModel::constant(a.sigma_domain, a.sigma_target, a.seed);
  const auto generate = [&]() -> datasets::Generated {
    if (a.dataset == "helix") return datasets::gen_helix(a.n, noise);
    if (a.dataset == "sphere") return datasets::gen_sphere_grid(a.grid, noise);
    if (a.dataset == "klein") return datasets::gen_klein(a.n, a.sigma_r, a.snrdb, a.seed).data;
    if (a.dataset == "circle") return datasets::gen_circle_arc(a.n, 0.0, 1.5 * std::numbers::pi);
    throw Error(ErrorKind::Configuration, "unknown dataset '" + a.dataset + "'");
  };
  const datasets::Generated g = generate();
  SampleSet samples = g.samples;
  if (a.embed_dim > 0) samples = datasets::embed_high_dim(samples, a.embed_dim, a.seed);
  io::write_samples(a.out, samples);
  if (!a.clean_out.empty()) io::write_samples(a.clean_out, SampleSet(g.clean_points, g.clean_values));
  out << samples.size() << " samples in R^" << samples.ambient_dim() << " written to " << a.out << "\n";
  return kOk;
}

struct ConvergenceArgs {
  std::vector<int> grids{20, 30, 40, 50};
  Index queries = 200;
  std::string metric = "value";
  std::string out;
  ConfigFlags flags;
};

int cmd_convergence(const ConvergenceArgs& a, std::ostream& out) {
  harness::ConvergenceOptions o;
  o.base = a.flags.resolve(harness::ConvergenceOptions::default_sphere_config());
  o.m = o.base.m;
  o.seed = o.base.frame.seed;
  o.grid_sizes = a.grids;
  o.queries = a.queries;
  harness::ConvergenceReport report;
  if (a.metric == "value") report = harness::run_convergence(o);
  else if (a.metric == "frame-residual") report = harness::run_frame_residual_order(o);
  else throw Error(ErrorKind::Configuration, "metric must be 'value' or 'frame-residual'");
  io::write_report(a.out, report);
  std::string grids;
  for (int g : a.grids) grids += (grids.empty() ? "" : " ") + std::to_string(g);
  echo_config(a.out + "/config.txt", o.base,
              {{"grids", grids}, {"queries", std::to_string(a.queries)}, {"metric", a.metric}});
  out << "slope " << io::format_double(report.fit.slope) << "\n";
  bool total = true;
  for (const auto& e : report.entries)
    if (e.failures < static_cast<std::size_t>(o.queries)) total = false;
  return total || !std::isfinite(report.fit.slope) ? kNumerical : kOk;
}

struct KleinArgs {
  Index n = 1500;
  double snrdb = 5.0;
  double sigma_r = 0.0;
  int trials = 20;
  Index test_queries = 500;
  std::string out;
  ConfigFlags flags;
};

int cmd_klein(const KleinArgs& a, std::ostream& out) {
  harness::KleinOptions o;
  o.base = a.flags.resolve(harness::KleinOptions::default_klein_config());
  o.m = o.base.m;
  o.seed = o.base.frame.seed;
  o.n = a.n;
  o.snrdb = a.snrdb;
  o.sigma_r = a.sigma_r;
  o.trials = a.trials;
  o.test_queries = a.test_queries;
  harness::BenchReport report = harness::run_klein(o);
  for (const auto& [key, value] : io::describe(o.base)) report.config.emplace(key, value);
  io::write_report(a.out, report);
  echo_config(a.out + "/config.txt", o.base,
              {{"n", std::to_string(a.n)},
               {"snrdb", io::format_double(a.snrdb)},
               {"sigma_r", io::format_double(a.sigma_r)},
               {"trials", std::to_string(a.trials)},
               {"test_queries", std::to_string(a.test_queries)}});
  out << "mean " << io::format_double(report.mean) << " std " << io::format_double(report.stddev) << "\n";
  return all_nonfinite(report.errors) ? kNumerical : kOk;
}

struct LooArgs {
  std::string samples;
  std::string out;
  ConfigFlags flags;
};

int cmd_loo(const LooArgs& a, std::ostream& out) {
  const SampleSet samples = io::read_samples(a.samples);
  const ApproxConfig cfg = a.flags.resolve(ApproxConfig{});
  harness::BenchReport report = harness::run_loo_cv(samples, cfg);
  for (const auto& [key, value] : io::describe(cfg)) report.config.emplace(key, value);
  io::write_report(a.out, report);
  echo_config(a.out + "/config.txt", cfg, {{"samples", a.samples}});
  out << "mean " << io::format_double(report.mean) << " over " << report.errors.size() << " folds\n";
  return all_nonfinite(report.errors) ? kNumerical : kOk;
}

struct ScalingArgs {
  std::vector<Index> n_list{10000, 20000};
  Index samples = 2000;
  Index queries = 5;
  int repeats = 3;
  std::uint64_t seed = 0;
  int m = 1;
  std::string out;
};

int cmd_scaling(const ScalingArgs& a, std::ostream& out) {
  harness::ScalingOptions o;
  o.n_list = a.n_list;
  o.N = a.samples;
  o.queries = a.queries;
  o.repeats = a.repeats;
  o.seed = a.seed;
  o.m = a.m;
  const harness::ScalingReport report = harness::run_scaling(o);
  io::write_report(a.out, report);
  std::string ns;
  for (Index n : a.n_list) ns += (ns.empty() ? "" : " ") + std::to_string(n);
  io::write_text(a.out + "/config.txt",
                 io::format_config({{"n_list", ns},
                                    {"N", std::to_string(a.samples)},
                                    {"queries", std::to_string(a.queries)},
                                    {"repeats", std::to_string(a.repeats)},
                                    {"seed", std::to_string(a.seed)},
                                    {"m", std::to_string(a.m)}}));
  for (const auto& row : report.rows)
    out << "n=" << row.n << " " << io::format_double(row.median_seconds) << " s/query\n";
  for (const auto& row : report.rows)
    if (row.failures == static_cast<std::size_t>(a.queries)) return kNumerical;
  return kOk;
}

struct HelixArgs {
  Index samples = 2000;
  Index queries = 400;
  double sigma_target = 6.25;
  std::string out;
  ConfigFlags flags;
};

int cmd_helix(const HelixArgs& a, std::ostream& out) {
  harness::HelixDemoOptions o;
  o.base = a.flags.resolve(harness::HelixDemoOptions::default_helix_config());
  o.seed = o.base.frame.seed;
  o.samples = a.samples;
  o.queries = a.queries;
  o.sigma_target = a.sigma_target;
  const harness::HelixDemoResult result = harness::run_helix_demo(o);
  io::write_helix_demo(a.out, result);
  echo_config(a.out + "/config.txt", o.base,
              {{"samples", std::to_string(a.samples)},
               {"queries", std::to_string(a.queries)},
               {"sigma_target", io::format_double(a.sigma_target)}});
  for (const auto* run : {&result.clean_queries, &result.noisy_queries, &result.noisy_domain})
    out << run->name << ": rmse " << io::format_double(run->rmse) << " raw " << io::format_double(run->raw_rmse)
        << "\n";
  return std::isfinite(result.clean_queries.rmse) ? kOk : kNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Manifold moving least-squares regression", "mmls"};
  // --h is the bandwidth, so help is long-form only.
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);

  FitEvalArgs fit;
  FitEvalArgs proj;
  for (auto [name, a, help] : {std::tuple{"fit-eval", &fit, "evaluate the regression at query points"},
                               std::tuple{"project", &proj, "project query points onto the sampled manifold"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--samples", a->samples, "sample CSV")->required();
    sub->add_option("--queries", a->queries, "query CSV")->required();
    sub->add_option("--out", a->out, "output CSV")->required();
    sub->add_option("--frame-dump", a->frame_dump, "write the local frames to this CSV");
    a->flags.attach(sub);
  }

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic sample set");
  gen_cmd->add_option("--dataset", gen.dataset, "helix | sphere | klein | circle");
  gen_cmd->add_option("--n", gen.n, "number of samples (helix, klein, circle)");
  gen_cmd->add_option("--grid", gen.grid, "grid size g, N = g^2 (sphere)");
  gen_cmd->add_option("--sigma-domain", gen.sigma_domain, "std of the ambient noise");
  gen_cmd->add_option("--sigma-target", gen.sigma_target, "std of the value noise");
  gen_cmd->add_option("--snrdb", gen.snrdb, "target SNR in dB (klein)");
  gen_cmd->add_option("--sigma-r", gen.sigma_r, "ambient noise std (klein)");
  gen_cmd->add_option("--embed-dim", gen.embed_dim, "embed isometrically into this ambient dimension");
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--out", gen.out, "sample CSV")->required();
  gen_cmd->add_option("--clean-out", gen.clean_out, "CSV of the noise-free points and targets");

  ConvergenceArgs conv;
  auto* conv_cmd = app.add_subcommand("convergence", "sphere convergence-order study");
  conv_cmd->add_option("--grids", conv.grids, "grid sizes g (N = g^2)");
  conv_cmd->add_option("--queries", conv.queries, "held-out queries per resolution");
  conv_cmd->add_option("--metric", conv.metric, "value | frame-residual");
  conv_cmd->add_option("--out", conv.out, "output directory")->required();
  conv.flags.attach(conv_cmd);

  KleinArgs klein;
  auto* klein_cmd = app.add_subcommand("klein-bench", "Klein-bottle regression benchmark");
  klein_cmd->add_option("--n", klein.n, "training samples per trial");
  klein_cmd->add_option("--snrdb", klein.snrdb, "target SNR in dB");
  klein_cmd->add_option("--sigma-r", klein.sigma_r, "ambient noise std");
  klein_cmd->add_option("--trials", klein.trials, "number of seeded trials");
  klein_cmd->add_option("--test-queries", klein.test_queries, "clean test points per trial");
  klein_cmd->add_option("--out", klein.out, "output directory")->required();
  klein.flags.attach(klein_cmd);

  LooArgs loo;
  auto* loo_cmd = app.add_subcommand("loo-cv", "leave-one-out cross validation");
  loo_cmd->add_option("--samples", loo.samples, "sample CSV")->required();
  loo_cmd->add_option("--out", loo.out, "output directory")->required();
  loo.flags.attach(loo_cmd);

  ScalingArgs scaling;
  auto* scaling_cmd = app.add_subcommand("scaling", "per-query time against ambient dimension");
  scaling_cmd->add_option("--n-list", scaling.n_list, "ambient dimensions");
  scaling_cmd->add_option("--samples", scaling.samples, "number of helix samples");
  scaling_cmd->add_option("--queries", scaling.queries, "timed queries");
  scaling_cmd->add_option("--repeats", scaling.repeats, "timing repetitions");
  scaling_cmd->add_option("--seed", scaling.seed, "random seed");
  scaling_cmd->add_option("--m", scaling.m, "polynomial degree");
  scaling_cmd->add_option("--out", scaling.out, "output directory")->required();

  HelixArgs helix;
  auto* helix_cmd = app.add_subcommand("helix-demo", "helix denoising runs");
  helix_cmd->add_option("--samples", helix.samples, "number of samples");
  helix_cmd->add_option("--queries", helix.queries, "number of queries");
  helix_cmd->add_option("--sigma-target", helix.sigma_target, "std of the value noise");
  helix_cmd->add_option("--out", helix.out, "output directory")->required();
  helix.flags.attach(helix_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (app.got_subcommand("fit-eval")) return cmd_pointwise(fit, false, out);
    if (app.got_subcommand("project")) return cmd_pointwise(proj, true, out);
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*conv_cmd) return cmd_convergence(conv, out);
    if (*klein_cmd) return cmd_klein(klein, out);
    if (*loo_cmd) return cmd_loo(loo, out);
    if (*scaling_cmd) return cmd_scaling(scaling, out);
    if (*helix_cmd) return cmd_helix(helix, out);
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Configuration ? kUsage : kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace mmls::cli
