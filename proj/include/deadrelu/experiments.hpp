#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "deadrelu/config.hpp"

namespace deadrelu {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Failure to read or write experiment output.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using CellValue = std::variant<std::int64_t, double>;

/// Integers print as integers, reals with 10 significant digits.
std::string format_value(const CellValue& value);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::string> header;
  std::vector<std::vector<CellValue>> rows;
  int cells_computed = 0;
  int cells_resumed = 0;
  std::string csv_path;
  std::string manifest_path;

  /// Numeric value of `column` in row `row`; throws InvalidInput for unknown columns.
  double number(std::size_t row, const std::string& column) const;
  std::string csv() const;
};

std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<CellValue>>& rows);

/// Receives one human-readable line per finished cell.
using CellReporter = std::function<void(const std::string&)>;

ExperimentResult run_grid(const ExperimentConfig& config, const CellReporter& report = {});
ExperimentResult run_constant_lb_path(const ExperimentConfig& config, const CellReporter& report = {});
ExperimentResult run_init_comparison(const ExperimentConfig& config, const CellReporter& report = {});
ExperimentResult run_conv_grid(const ExperimentConfig& config, const CellReporter& report = {});

/// Dispatches on config.kind.
ExperimentResult run_experiment(const ExperimentConfig& config, const CellReporter& report = {});

/// Config recorded in a manifest written by a previous run.
ExperimentConfig config_from_manifest(const std::string& manifest_path);

/// CSV file name used for each kind, e.g. "grid.csv".
std::string csv_file_name(ExperimentKind kind);

}  // namespace deadrelu
