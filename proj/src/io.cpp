#include "mmls/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace mmls::io {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& text, double& value) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

// Number of leading columns named prefix1, prefix2, ...
Index count_prefixed(const std::vector<std::string>& header, std::size_t start, const std::string& prefix) {
  Index count = 0;
  for (std::size_t c = start; c < header.size(); ++c) {
    if (header[c] != prefix + std::to_string(count + 1)) break;
    ++count;
  }
  return count;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError(path, 0, "cannot open for writing");
  return out;
}


bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ParseError("config", 0, "key '" + key + "' expects a boolean, got '" + v + "'");
}

double parse_real(const std::string& key, const std::string& v) {
  double x = 0.0;
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  if (!parse_number(v, x)) throw ParseError("config", 0, "key '" + key + "' expects a number, got '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ParseError("config", 0, "key '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

}  // namespace

ParseError::ParseError(const std::string& file, int line, const std::string& what)
    : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  Table table;
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cells = split(t);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError(path, lineno,
                       "expected " + std::to_string(table.header.size()) + " columns, found " +
                           std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_number(cells[c], row[c]) || !std::isfinite(row[c]))
        throw ParseError(path, lineno, "column '" + table.header[c] + "' is not a finite number: '" + cells[c] + "'");
    }
    rows.push_back(std::move(row));
  }
  table.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) table.data(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return table;
}

SampleSet read_samples(const std::string& path) {
  const Table t = read_csv(path);
  if (t.header.empty()) throw ParseError(path, 0, "sample file has no header");
  const Index n = count_prefixed(t.header, 0, "x");
  const Index k = count_prefixed(t.header, static_cast<std::size_t>(n), "f");
  if (n < 1 || k < 1 || static_cast<std::size_t>(n + k) != t.header.size())
    throw ParseError(path, 1, "header must be x1..xn followed by f1..fk");
  if (t.data.rows() < 1) throw ParseError(path, 0, "sample file has no data rows");
  return SampleSet(t.data.leftCols(n), t.data.rightCols(k));
}

void write_samples(const std::string& path, const SampleSet& samples) {
  RowMatrix all(samples.size(), samples.ambient_dim() + samples.value_dim());
  all << samples.points(), samples.values();
  auto header = prefixed_header("x", samples.ambient_dim());
  const auto f = prefixed_header("f", samples.value_dim());
  header.insert(header.end(), f.begin(), f.end());
  write_matrix(path, header, all);
}

RowMatrix read_queries(const std::string& path, Index expected_dim) {
  const Table t = read_csv(path);
  if (t.header.empty()) return RowMatrix(0, std::max<Index>(expected_dim, 0));
  const Index n = count_prefixed(t.header, 0, "x");
  const Index k = count_prefixed(t.header, static_cast<std::size_t>(n), "f");
  if (n < 1 || static_cast<std::size_t>(n + k) != t.header.size())
    throw ParseError(path, 1, "header must be x1..xn, optionally followed by f1..fk");
  if (expected_dim >= 0 && n != expected_dim) {
    throw ParseError(path, 1,
                     "queries have " + std::to_string(n) + " coordinates but the samples have " +
                         std::to_string(expected_dim));
  }
  return t.data.leftCols(n);
}

std::vector<std::string> prefixed_header(const std::string& prefix, Index count) {
  std::vector<std::string> h;
  for (Index i = 1; i <= count; ++i) h.push_back(prefix + std::to_string(i));
  return h;
}

void write_matrix(const std::string& path, const std::vector<std::string>& header, const RowMatrix& values,
                  const std::vector<QueryStatus>* status) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  if (status) out << (header.empty() ? "" : ",") << "status";
  out << "\n";
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(r, c));
    if (status) {
      const QueryStatus& s = (*status)[static_cast<std::size_t>(r)];
      out << (values.cols() ? "," : "") << (s.ok ? std::string("ok") : std::string(s.kind ? to_string(*s.kind) : "error"));
    }
    out << "\n";
  }
}

ConfigMap read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open config file");
  ConfigMap cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(path, lineno, "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(path, lineno, "empty key");
    cfg[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

std::string format_config(const ConfigMap& config) {
  std::string out;
  for (const auto& [k, v] : config) out += k + " = " + v + "\n";
  return out;
}

ApproxConfig apply_config(ApproxConfig cfg, const ConfigMap& config) {
  for (const auto& [key, v] : config) {
    if (key.rfind(kExperimentPrefix, 0) == 0) continue;
    if (key == "d") cfg.d = static_cast<int>(parse_int(key, v));
    else if (key == "m") cfg.m = static_cast<int>(parse_int(key, v));
    else if (key == "weight") {
      try {
        cfg.family = parse_weight_family(v);
      } catch (const Error& e) {
        throw ParseError("config", 0, e.what());
      }
    } else if (key == "k") cfg.k = v == "auto" ? std::nullopt : std::optional<double>(parse_real(key, v));
    else if (key == "h") cfg.h = v == "auto" ? std::nullopt : std::optional<double>(parse_real(key, v));
    else if (key == "eps_reg") cfg.eps_reg = v == "auto" ? -1.0 : parse_real(key, v);
    else if (key == "interpolatory") cfg.interpolatory = parse_bool(key, v);
    else if (key == "support_factor") cfg.support_factor = parse_real(key, v);
    else if (key == "enlarge_factor") cfg.enlarge_factor = parse_real(key, v);
    else if (key == "max_enlarge") cfg.max_enlarge = static_cast<int>(parse_int(key, v));
    else if (key == "rcond") cfg.rcond = parse_real(key, v);
    else if (key == "seed") cfg.frame.seed = static_cast<std::uint64_t>(parse_int(key, v));
    else if (key == "init") {
      if (v == "random") cfg.frame.init = FrameInit::RandomOrthonormal;
      else if (v == "pca") cfg.frame.init = FrameInit::WeightedPCA;
      else throw ParseError("config", 0, "init must be 'random' or 'pca', got '" + v + "'");
    } else if (key == "tol_q") cfg.frame.tol_q = parse_real(key, v);
    else if (key == "max_iter") cfg.frame.max_iter = static_cast<int>(parse_int(key, v));
    else if (key == "mu") cfg.frame.mu = parse_real(key, v);
    else throw ParseError("config", 0, "unknown config key '" + key + "'");
  }
  return cfg;
}

ConfigMap describe(const ApproxConfig& cfg) {
  ConfigMap m;
  m["d"] = std::to_string(cfg.d);
  m["m"] = std::to_string(cfg.m);
  m["weight"] = std::string(to_string(cfg.family));
  m["k"] = cfg.k ? format_double(*cfg.k) : "auto";
  m["h"] = cfg.h ? format_double(*cfg.h) : "auto";
  m["eps_reg"] = cfg.eps_reg > 0.0 ? format_double(cfg.eps_reg) : "auto";
  m["interpolatory"] = cfg.interpolatory ? "true" : "false";
  m["support_factor"] = format_double(cfg.support_factor);
  m["enlarge_factor"] = format_double(cfg.enlarge_factor);
  m["max_enlarge"] = std::to_string(cfg.max_enlarge);
  m["rcond"] = format_double(cfg.rcond);
  m["seed"] = std::to_string(cfg.frame.seed);
  m["init"] = cfg.frame.init == FrameInit::WeightedPCA ? "pca" : "random";
  m["tol_q"] = format_double(cfg.frame.tol_q);
  m["max_iter"] = std::to_string(cfg.frame.max_iter);
  m["mu"] = format_double(cfg.frame.mu);
  return m;
}

void write_frame_dump(const std::string& path, const std::vector<std::optional<FrameResult>>& frames) {
  auto out = open_out(path);
  out << "query,field,row,col,value\n";
  for (std::size_t q = 0; q < frames.size(); ++q) {
    if (!frames[q]) continue;
    const FrameResult& f = *frames[q];
    for (Index r = 0; r < f.frame.origin.size(); ++r)
      out << q << ",origin," << r << ",0," << format_double(f.frame.origin(r)) << "\n";
    for (Index c = 0; c < f.frame.basis.cols(); ++c)
      for (Index r = 0; r < f.frame.basis.rows(); ++r)
        out << q << ",basis," << r << "," << c << "," << format_double(f.frame.basis(r, c)) << "\n";
    for (std::size_t s = 0; s < f.trace.steps.size(); ++s)
      out << q << ",step," << s + 1 << ",0," << format_double(f.trace.steps[s]) << "\n";
  }
}

std::string to_json(const harness::ConvergenceReport& report) {
  const auto& o = report.options;
  json j;
  j["metric"] = report.metric;
  j["config"] = describe(o.base);
  j["config"]["m"] = std::to_string(o.m);
  j["grid_sizes"] = o.grid_sizes;
  j["queries"] = o.queries;
  j["seed"] = o.seed;
  j["query_patch"] = {{"phi", {o.phi_min, o.phi_max}}, {"theta", {o.theta_min, o.theta_max}}};
  json entries = json::array();
  for (const auto& e : report.entries)
    entries.push_back({{"grid", e.grid}, {"N", e.N}, {"h", e.h}, {"h_est", e.h_est}, {"error", e.error},
                       {"failures", e.failures}});
  j["resolutions"] = entries;
  json pairs = json::array();
  for (const auto& [x, y] : report.fit.pairs) pairs.push_back({x, y});
  j["pairs"] = pairs;
  j["slope"] = report.fit.slope;
  j["slope_stderr"] = report.fit.stderr_slope;
  j["slope_ci"] = {report.fit.ci_low, report.fit.ci_high};
  return j.dump(2);
}

std::string to_json(const harness::BenchReport& report) {
  json j;
  j["name"] = report.name;
  j["config"] = report.config;
  j["seeds"] = report.seeds;
  j["errors"] = report.errors;
  j["failures"] = report.failures;
  j["mean"] = report.mean;
  j["stddev"] = report.stddev;
  j["trials"] = report.errors.size();
  return j.dump(2);
}

std::string to_json(const harness::ScalingReport& report) {
  json j;
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"n", r.n}, {"median_seconds", r.median_seconds}, {"failures", r.failures}});
  j["rows"] = rows;
  j["max_prediction_spread"] = report.max_prediction_spread;
  return j.dump(2);
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
}

void write_report(const std::string& dir, const harness::ConvergenceReport& report) {
  std::filesystem::create_directories(dir);
  write_text(dir + "/report.json", to_json(report));
  RowMatrix rows(static_cast<Index>(report.entries.size()), 5);
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    rows.row(static_cast<Index>(i)) << e.grid, static_cast<double>(e.N), e.h, e.error, static_cast<double>(e.failures);
  }
  write_matrix(dir + "/report.csv", {"grid", "N", "h", "error", "failures"}, rows);
}

void write_report(const std::string& dir, const harness::BenchReport& report) {
  std::filesystem::create_directories(dir);
  write_text(dir + "/report.json", to_json(report));
  RowMatrix rows(static_cast<Index>(report.errors.size()), 3);
  for (std::size_t i = 0; i < report.errors.size(); ++i)
    rows.row(static_cast<Index>(i)) << static_cast<double>(report.seeds[i]), report.errors[i],
        static_cast<double>(report.failures[i]);
  write_matrix(dir + "/report.csv", {"seed", "error", "failures"}, rows);
  json timing = report.timing;
  write_text(dir + "/timing.json", timing.dump(2));
}

void write_report(const std::string& dir, const harness::ScalingReport& report) {
  std::filesystem::create_directories(dir);
  write_text(dir + "/report.json", to_json(report));
  RowMatrix rows(static_cast<Index>(report.rows.size()), 3);
  for (std::size_t i = 0; i < report.rows.size(); ++i)
    rows.row(static_cast<Index>(i)) << static_cast<double>(report.rows[i].n), report.rows[i].median_seconds,
        static_cast<double>(report.rows[i].failures);
  write_matrix(dir + "/report.csv", {"n", "median_seconds", "failures"}, rows);
  if (!report.rows.empty()) {
    RowMatrix preds(report.rows.front().predictions.rows(), static_cast<Index>(report.rows.size()));
    std::vector<std::string> header;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      preds.col(static_cast<Index>(i)) = report.rows[i].predictions.col(0);
      header.push_back("n" + std::to_string(report.rows[i].n));
    }
    write_matrix(dir + "/predictions.csv", header, preds);
  }
}

void write_helix_demo(const std::string& dir, const harness::HelixDemoResult& result) {
  std::filesystem::create_directories(dir);
  json summary = json::array();
  for (const harness::HelixRun* run : {&result.clean_queries, &result.noisy_queries, &result.noisy_domain}) {
    std::string stem = run->name;
    for (char& c : stem)
      if (c == '/') c = '_';
    write_samples(dir + "/" + stem + "_samples.csv", run->samples);
    write_matrix(dir + "/" + stem + "_queries.csv", prefixed_header("x", run->queries.cols()), run->queries);
    write_matrix(dir + "/" + stem + "_predictions.csv", prefixed_header("f", run->predictions.values.cols()),
                 run->predictions.values, &run->predictions.status);
    write_matrix(dir + "/" + stem + "_projections.csv", prefixed_header("x", run->projections.values.cols()),
                 run->projections.values, &run->projections.status);
    summary.push_back({{"name", run->name},
                       {"queries", run->queries.rows()},
                       {"rmse", run->rmse},
                       {"raw_rmse", run->raw_rmse},
                       {"prediction_failures", run->predictions.failures()},
                       {"projection_failures", run->projections.failures()}});
  }
  write_text(dir + "/summary.json", summary.dump(2));
}

}  // namespace mmls::io
