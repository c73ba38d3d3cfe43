#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deadrelu/init.hpp"
#include "deadrelu/network.hpp"

namespace deadrelu {

enum class ExperimentKind { Grid, ConstantLBPath, InitComparison, ConvGrid };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

/// Everything needed to reproduce an experiment, except where it runs.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Grid;
  /// Widths for Grid / InitComparison, channel counts for ConvGrid.
  std::vector<int> n_values;
  std::vector<int> k_values;
  /// ConstantLBPath target and depth range.
  double p = 0.5;
  int k_max = 64;
  /// ConvGrid kernel sides and image side.
  std::vector<int> kernel_values;
  int spatial_side = 8;

  InitScheme scheme = InitScheme::he();
  BiasMode bias_mode = BiasMode::ZeroBias;
  int batch_size = 1024;
  std::int64_t trials = 1024;
  std::uint64_t base_seed = 0;
  double ci_level = 0.95;

  // Not part of the result identity.
  std::string output_dir = "results";
  int threads = 0;
};

/// Defaults per kind: n 1..15 with k 1,2,4..256 for grids, channels 1..4
/// with kernels {1,3} and k 1..32 for conv grids.
ExperimentConfig default_config(ExperimentKind kind);

/// Throws InvalidInput on non-positive counts, empty value lists or p outside (0,1).
void validate(const ExperimentConfig& config);

/// Flat `key = value` text, one entry per line, '#' comments.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Applies recognized keys on top of `config`; unknown keys are rejected.
void apply_key_values(ExperimentConfig& config, const std::map<std::string, std::string>& values);

ExperimentConfig load_config_file(const std::string& path, ExperimentKind kind);

/// "1,2,4" or "1..15" or a mix such as "1..3,8".
std::vector<int> parse_int_list(const std::string& text);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Hex digest of the fields that determine results.
std::string fingerprint(const ExperimentConfig& config);

}  // namespace deadrelu
