#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calib/calibrate.hpp"
#include "calib/simulate.hpp"

namespace calib {

/// RFC 4180 table with a required header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position or -1.
  int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);

enum class DispersionMode { Fixed, Pearson, Deviance, MleIg };

struct RunConfig {
  Family family = Family::Normal;
  double alpha = 0.05;
  DispersionMode dispersion = DispersionMode::Fixed;
  double phi = 1.0;
  int q = 0;
  std::string pairs = "full";
  std::optional<int> bins;
  bool repair = false;
  std::optional<double> eps;
};

/// Parses fixed:<phi> | pearson | deviance | mle-ig into the config.
void parse_dispersion(const std::string& text, RunConfig& cfg);

struct BandRecord {
  double rank;
  double y;
  double v;
  double mu_hat;
  double lower;
  double upper;
  bool inside;
};

struct BandRun {
  std::vector<BandRecord> records;
  double phi = 1.0;
  double delta = 0.0;
  std::uint64_t pair_count = 0;
  bool crossed = false;
  bool repaired = false;
  bool binned = false;
  TestReport calibration;
  std::optional<TestReport> epsilon;
};

/// Reads columns y, v (default 1), mu_hat and optionally rank (default
/// mu_hat), builds the band and runs the tests. Records are per input row in
/// ranking order, or per bin when binning. Throws std::runtime_error with row
/// numbers on malformed input.
BandRun run_band(const CsvTable& table, const RunConfig& cfg);

void write_band_csv(std::ostream& out, const std::vector<BandRecord>& records);

/// Deterministic SVG calibration plot: band edges as step lines, estimates as
/// points, points outside the band highlighted.
std::string render_plot(const std::vector<BandRecord>& records, bool log_scale);

void emit_plot(const std::vector<BandRecord>& records, const std::string& path, bool log_scale);

/// Runs a preset; overrides are key/value pairs such as n=200 or
/// alphas=0.01,0.05. Unknown keys throw std::invalid_argument.
std::vector<Metric> run_simulate(const std::string& preset,
                                 const std::map<std::string, std::string>& overrides, int reps,
                                 std::uint64_t seed);

void write_metrics_csv(std::ostream& out, const std::vector<Metric>& metrics);

}  // namespace calib
