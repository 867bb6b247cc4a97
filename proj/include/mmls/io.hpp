#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmls/approximator.hpp"
#include "mmls/harness.hpp"
#include "mmls/sample_set.hpp"

namespace mmls::io {

/// Malformed input; `line` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, int line, const std::string& what);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Shortest representation that reads back to the same double (17 significant digits).
std::string format_double(double value);

struct Table {
  std::vector<std::string> header;
  RowMatrix data;
};

/// Comma-separated, one header row, '#' starts a comment line, blank lines
/// skipped. A file with no header yields an empty table.
Table read_csv(const std::string& path);

/// Sample file: header x1..xn followed by f1..fk.
SampleSet read_samples(const std::string& path);
void write_samples(const std::string& path, const SampleSet& samples);

/// Query file: leading x1..xn columns; trailing f columns are ignored.
/// `expected_dim` (when >= 0) must match n.
RowMatrix read_queries(const std::string& path, Index expected_dim = -1);

/// Rows of `values` under `header`; with `status`, an extra status column
/// holding "ok" or the failure kind.
void write_matrix(const std::string& path, const std::vector<std::string>& header, const RowMatrix& values,
                  const std::vector<QueryStatus>* status = nullptr);

std::vector<std::string> prefixed_header(const std::string& prefix, Index count);

using ConfigMap = std::map<std::string, std::string>;

inline constexpr const char* kExperimentPrefix = "experiment.";

/// Flat "key = value" file; '#' comments. Duplicate keys: last wins.
ConfigMap read_config(const std::string& path);
std::string format_config(const ConfigMap& config);

/// Applies recognised keys (d, m, weight, k, h, eps_reg, interpolatory,
/// support_factor, enlarge_factor, max_enlarge, rcond, seed, init, tol_q,
/// max_iter, mu). "auto" clears k or h. Keys under kExperimentPrefix belong to
/// the experiment drivers and are skipped. Other unknown keys are rejected.
ApproxConfig apply_config(ApproxConfig base, const ConfigMap& config);
ConfigMap describe(const ApproxConfig& cfg);

/// Long-format frame dump: query, field (origin|basis|step), row, col, value.
void write_frame_dump(const std::string& path, const std::vector<std::optional<FrameResult>>& frames);

std::string to_json(const harness::ConvergenceReport& report);
std::string to_json(const harness::BenchReport& report);
std::string to_json(const harness::ScalingReport& report);

/// report.json and report.csv (one row per resolution / trial / n) in `dir`.
void write_report(const std::string& dir, const harness::ConvergenceReport& report);
void write_report(const std::string& dir, const harness::BenchReport& report);
void write_report(const std::string& dir, const harness::ScalingReport& report);
/// Sample, query and prediction CSVs for each helix run plus summary.json.
void write_helix_demo(const std::string& dir, const harness::HelixDemoResult& result);

void write_text(const std::string& path, const std::string& text);

}  // namespace mmls::io
