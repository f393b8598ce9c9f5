#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace levymax::cli {

/// One line of report.csv.
struct Row {
  std::string name;
  std::string variant;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  double ratio = 0.0;
  double ratio_se = 0.0;
  double declared_constant = 0.0;  // NaN when none applies
  std::string verdict;             // holds | holds_with_constant | violated | info
  double homogeneity_drift = 0.0;
};

/// An extra output file, relative to the run directory.
struct Artifact {
  std::string path;
  std::string bytes;
};

struct Outcome {
  nlohmann::json report;  // deterministic given the config
  std::vector<Row> rows;
  std::vector<Artifact> artifacts;
  std::vector<std::string> warnings;
  bool violated() const;
};

/// Runs the experiment named by config.kind.
Outcome execute(const ExperimentConfig& config);

extern const char* const kCsvHeader;
std::string csv_line(const Row& row, const std::string& hash, std::uint64_t seed);
std::string render_csv(const std::vector<Row>& rows, const std::string& hash, std::uint64_t seed);
/// Fixed-width table for the terminal.
std::string render_summary(const std::vector<Row>& rows);

/// Text for `describe <kind>`; throws ConfigError for unknown kinds.
std::string describe(const std::string& kind);

}  // namespace levymax::cli
