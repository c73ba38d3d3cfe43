#include "deadrelu/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "deadrelu/bounds.hpp"
#include "deadrelu/montecarlo.hpp"

namespace deadrelu {

namespace fs = std::filesystem;

std::string format_value(const CellValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", std::get<double>(value));
  return buf;
}

std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<CellValue>>& rows) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_value(row[c]);
    }
    out += '\n';
  }
  return out;
}

double ExperimentResult::number(std::size_t row, const std::string& column) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] != column) continue;
    const CellValue& v = rows.at(row).at(c);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
  }
  throw InvalidInput("no column named '" + column + "'");
}

std::string ExperimentResult::csv() const { return format_csv(header, rows); }

std::string csv_file_name(ExperimentKind kind) { return to_string(kind) + ".csv"; }

namespace {

struct Cell {
  std::string key;
  std::function<std::vector<CellValue>(const SeedSpec&)> compute;
  std::function<std::string(const std::vector<CellValue>&)> describe;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

nlohmann::json values_to_json(const std::vector<CellValue>& values) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : values) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
      arr.push_back(*i);
    } else {
      arr.push_back(std::get<double>(v));
    }
  }
  return arr;
}

std::vector<CellValue> values_from_json(const nlohmann::json& arr) {
  std::vector<CellValue> out;
  for (const auto& v : arr) {
    if (v.is_number_integer()) {
      out.emplace_back(v.get<std::int64_t>());
    } else {
      out.emplace_back(v.get<double>());
    }
  }
  return out;
}

// Returns the stored cell if its marker exists and belongs to this config.
bool load_marker(const fs::path& path, const std::string& fp, std::size_t width, std::vector<CellValue>& values,
                 std::string& completed) {
  std::ifstream in(path);
  if (!in) return false;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("fingerprint").get<std::string>() != fp) return false;
    values = values_from_json(j.at("values"));
    completed = j.at("completed").get<std::string>();
    return values.size() == width;
  } catch (const nlohmann::json::exception&) {
    return false;
  }
}

ExperimentResult run_cells(const ExperimentConfig& config, std::vector<std::string> header, std::vector<Cell> cells,
                           const CellReporter& report) {
  const fs::path dir(config.output_dir);
  const fs::path cell_dir = dir / "cells";
  std::error_code ec;
  fs::create_directories(cell_dir, ec);
  if (ec || !fs::is_directory(cell_dir)) {
    throw IoError("cannot create output directory " + cell_dir.string() + (ec ? ": " + ec.message() : ""));
  }

  const std::string fp = fingerprint(config);
  const std::string started = utc_timestamp();
  ExperimentResult result;
  result.config = config;
  result.header = std::move(header);

  nlohmann::json cell_log = nlohmann::json::array();
  for (const Cell& cell : cells) {
    const SeedSpec seed{config.base_seed, to_string(config.kind) + "/" + cell.key};
    const fs::path marker = cell_dir / (cell.key + ".json");
    std::vector<CellValue> values;
    std::string completed;
    const bool resumed = load_marker(marker, fp, result.header.size(), values, completed);
    if (resumed) {
      ++result.cells_resumed;
    } else {
      values = cell.compute(seed);
      completed = utc_timestamp();
      const nlohmann::json stored = {
          {"key", cell.key}, {"fingerprint", fp}, {"completed", completed}, {"values", values_to_json(values)}};
      write_atomically(marker, stored.dump(1) + "\n");
      ++result.cells_computed;
    }
    if (report) report(cell.describe(values) + (resumed ? " (resumed)" : ""));
    cell_log.push_back({{"key", cell.key},
                        {"stream_label", seed.stream_label},
                        {"seed", seed.stream_seed()},
                        {"completed", completed},
                        {"resumed", resumed}});
    result.rows.push_back(std::move(values));
  }

  const fs::path csv_path = dir / csv_file_name(config.kind);
  write_atomically(csv_path, result.csv());

  const nlohmann::json manifest = {
      {"artifact_version", kArtifactVersion},
      {"kind", to_string(config.kind)},
      {"config", to_json(config)},
      {"base_seed", config.base_seed},
      {"config_fingerprint", fp},
      {"csv", csv_file_name(config.kind)},
      {"columns", result.header},
      {"cells", cell_log},
      {"started", started},
      {"finished", utc_timestamp()},
  };
  const fs::path manifest_path = dir / "manifest.json";
  write_atomically(manifest_path, manifest.dump(2) + "\n");

  result.csv_path = csv_path.string();
  result.manifest_path = manifest_path.string();
  return result;
}

void require_kind(const ExperimentConfig& config, ExperimentKind kind) {
  if (config.kind != kind) {
    throw InvalidInput("expected a '" + to_string(kind) + "' config, got '" + to_string(config.kind) + "'");
  }
  validate(config);
}

RunOptions run_options(const ExperimentConfig& config) { return {config.threads, config.ci_level}; }

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

double real(const CellValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

std::string describe_estimate(const std::string& prefix, const std::vector<CellValue>& v, std::size_t first) {
  // first -> trials, alive, phat, ci_lo, ci_hi, lower, upper
  return prefix + ": alive " + format_value(v[first + 1]) + "/" + format_value(v[first]) + " phat=" +
         fmt("%.6f", real(v[first + 2])) + " ci=[" + fmt("%.6f", real(v[first + 3])) + "," +
         fmt("%.6f", real(v[first + 4])) + "] bounds=[" + fmt("%.6g", real(v[first + 5])) + "," +
         fmt("%.6g", real(v[first + 6])) + "]";
}

}  // namespace

ExperimentResult run_grid(const ExperimentConfig& config, const CellReporter& report) {
  require_kind(config, ExperimentKind::Grid);
  std::vector<Cell> cells;
  for (int n : config.n_values) {
    for (int k : config.k_values) {
      const std::string key = "n" + std::to_string(n) + "_k" + std::to_string(k);
      cells.push_back({key,
                       [=](const SeedSpec& seed) -> std::vector<CellValue> {
                         const NetworkSetup setup{n, k, config.scheme, config.bias_mode};
                         const Estimate e = estimate_alive_prob(setup, config.batch_size, config.trials, seed,
                                                                run_options(config));
                         return {std::int64_t{n}, std::int64_t{k}, e.trials, e.successes, e.p_hat, e.ci_low,
                                 e.ci_high, lower_bound(n, k), upper_bound(n, k, config.bias_mode)};
                       },
                       [=](const std::vector<CellValue>& v) {
                         return describe_estimate("grid n=" + std::to_string(n) + " k=" + std::to_string(k), v, 2);
                       }});
    }
  }
  return run_cells(config, {"n", "k", "trials", "alive", "phat", "ci_lo", "ci_hi", "lower", "upper"},
                   std::move(cells), report);
}

ExperimentResult run_constant_lb_path(const ExperimentConfig& config, const CellReporter& report) {
  require_kind(config, ExperimentKind::ConstantLBPath);
  std::vector<Cell> cells;
  for (int k = 1; k <= config.k_max; ++k) {
    const int n = min_width(config.p, k);
    cells.push_back({"k" + std::to_string(k),
                     [=](const SeedSpec& seed) -> std::vector<CellValue> {
                       const NetworkSetup setup{n, k, config.scheme, config.bias_mode};
                       const VarianceReport vr =
                           variance_report(setup, config.batch_size, config.trials, seed, run_options(config));
                       const Estimate e = vr.final_alive(config.ci_level);
                       const VarianceLayer& last = vr.layers.back();
                       return {std::int64_t{k},
                               std::int64_t{n},
                               e.trials,
                               e.successes,
                               e.p_hat,
                               e.ci_low,
                               e.ci_high,
                               lower_bound(n, k),
                               upper_bound(n, k, config.bias_mode),
                               last.mean_sq_sigma,
                               last.mean_sq_lambda,
                               last.normalized,
                               last.partial_sigma_sum,
                               last.missing_lambda};
                     },
                     [=](const std::vector<CellValue>& v) {
                       return describe_estimate("path k=" + std::to_string(k) + " n=" + std::to_string(n), v, 2) +
                              " normalized_var=" + fmt("%.4g", real(v[11]));
                     }});
  }
  return run_cells(config,
                   {"k", "n", "trials", "alive", "phat", "ci_lo", "ci_hi", "lower", "upper", "sq_sigma", "sq_lambda",
                    "normalized", "partial_sum", "missing_lambda"},
                   std::move(cells), report);
}

ExperimentResult run_init_comparison(const ExperimentConfig& config, const CellReporter& report) {
  require_kind(config, ExperimentKind::InitComparison);
  std::vector<Cell> cells;
  for (int n : config.n_values) {
    for (int k : config.k_values) {
      const std::string key = "n" + std::to_string(n) + "_k" + std::to_string(k);
      cells.push_back(
          {key,
           [=](const SeedSpec& seed) -> std::vector<CellValue> {
             const NetworkSetup setup{n, k, config.scheme, config.bias_mode};
             const RunOptions opts = run_options(config);
             // One seed for all three wrappers: identical base networks and data.
             const auto iid = living_fraction_stats(setup, InitWrapper::Iid, config.batch_size, config.trials, seed, opts);
             const auto flip =
                 living_fraction_stats(setup, InitWrapper::SignFlip, config.batch_size, config.trials, seed, opts);
             const auto center =
                 living_fraction_stats(setup, InitWrapper::BatchCenter, config.batch_size, config.trials, seed, opts);
             return {std::int64_t{n},
                     std::int64_t{k},
                     config.trials,
                     lower_bound(n, k),
                     iid.summary.mean,
                     iid.summary.standard_error,
                     iid.summary.min,
                     iid.network_alive.p_hat,
                     flip.summary.mean,
                     flip.summary.standard_error,
                     flip.summary.min,
                     flip.network_alive.p_hat,
                     flip.zero_preactivation_trials,
                     center.summary.mean,
                     center.summary.standard_error,
                     center.summary.min,
                     center.network_alive.p_hat};
           },
           [=](const std::vector<CellValue>& v) {
             return "compare-init n=" + std::to_string(n) + " k=" + std::to_string(k) + ": lower=" +
                    fmt("%.6f", real(v[3])) + " iid=" + fmt("%.6f", real(v[4])) + " sign-flip=" +
                    fmt("%.6f", real(v[8])) + " (min " + fmt("%.6f", real(v[10])) + ") batch-center=" +
                    fmt("%.6f", real(v[13])) + " (alive rate " + fmt("%.4f", real(v[16])) + ")";
           }});
    }
  }
  return run_cells(config,
                   {"n", "k", "trials", "lower", "iid_mean", "iid_se", "iid_min", "iid_alive_rate", "flip_mean",
                    "flip_se", "flip_min", "flip_alive_rate", "flip_zero_cases", "center_mean", "center_se",
                    "center_min", "center_alive_rate"},
                   std::move(cells), report);
}

ExperimentResult run_conv_grid(const ExperimentConfig& config, const CellReporter& report) {
  require_kind(config, ExperimentKind::ConvGrid);
  std::vector<Cell> cells;
  const int d = config.spatial_side;
  for (int channels : config.n_values) {
    for (int side : config.kernel_values) {
      for (int k : config.k_values) {
        const std::string key = "c" + std::to_string(channels) + "_m" + std::to_string(side) + "_k" + std::to_string(k);
        cells.push_back({key,
                         [=](const SeedSpec& seed) -> std::vector<CellValue> {
                           const ConvSetup setup{channels, side, d, k, config.scheme, config.bias_mode};
                           const Estimate e = estimate_conv_alive_prob(setup, config.batch_size, config.trials, seed,
                                                                       run_options(config));
                           const BoundPair b = conv_bounds(channels, side, k);
                           return {std::int64_t{channels}, std::int64_t{side}, std::int64_t{d}, std::int64_t{k},
                                   e.trials, e.successes, e.p_hat, e.ci_low, e.ci_high, b.lower, b.upper};
                         },
                         [=](const std::vector<CellValue>& v) {
                           return describe_estimate("conv-grid channels=" + std::to_string(channels) +
                                                        " kernel=" + std::to_string(side) + " k=" + std::to_string(k),
                                                    v, 4);
                         }});
      }
    }
  }
  return run_cells(config,
                   {"channels", "kernel", "d", "k", "trials", "alive", "phat", "ci_lo", "ci_hi", "lower", "upper"},
                   std::move(cells), report);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const CellReporter& report) {
  switch (config.kind) {
    case ExperimentKind::Grid: return run_grid(config, report);
    case ExperimentKind::ConstantLBPath: return run_constant_lb_path(config, report);
    case ExperimentKind::InitComparison: return run_init_comparison(config, report);
    case ExperimentKind::ConvGrid: return run_conv_grid(config, report);
  }
  throw InvalidInput("unknown experiment kind");
}

ExperimentConfig config_from_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot read manifest " + manifest_path);
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    return config_from_json(j.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("malformed manifest " + manifest_path + ": " + e.what());
  }
}

}  // namespace deadrelu
