#include "deadrelu/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace deadrelu {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Grid: return "grid";
    case ExperimentKind::ConstantLBPath: return "path";
    case ExperimentKind::InitComparison: return "compare-init";
    case ExperimentKind::ConvGrid: return "conv-grid";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  if (text == "grid") return ExperimentKind::Grid;
  if (text == "path") return ExperimentKind::ConstantLBPath;
  if (text == "compare-init") return ExperimentKind::InitComparison;
  if (text == "conv-grid") return ExperimentKind::ConvGrid;
  throw InvalidInput("unknown experiment kind '" + text + "'");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Grid:
    case ExperimentKind::InitComparison:
      for (int n = 1; n <= 15; ++n) c.n_values.push_back(n);
      for (int k = 1; k <= 256; k *= 2) c.k_values.push_back(k);
      break;
    case ExperimentKind::ConstantLBPath:
      c.k_max = 64;
      break;
    case ExperimentKind::ConvGrid:
      c.n_values = {1, 2, 3, 4};
      c.kernel_values = {1, 3};
      for (int k = 1; k <= 32; k *= 2) c.k_values.push_back(k);
      c.spatial_side = 8;
      break;
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  auto positive_list = [](const std::vector<int>& values, const char* name) {
    if (values.empty()) throw InvalidInput(std::string(name) + " must not be empty");
    for (int v : values) {
      if (v < 1) throw InvalidInput(std::string(name) + " entries must be positive");
    }
  };
  if (c.batch_size < 1) throw InvalidInput("M must be positive");
  if (c.trials < 1) throw InvalidInput("trials must be positive");
  if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) throw InvalidInput("ci_level must lie in (0, 1)");
  switch (c.kind) {
    case ExperimentKind::Grid:
    case ExperimentKind::InitComparison:
      positive_list(c.n_values, "n_values");
      positive_list(c.k_values, "k_values");
      break;
    case ExperimentKind::ConstantLBPath:
      if (!(c.p > 0.0 && c.p < 1.0)) throw InvalidInput("p must lie strictly between 0 and 1");
      if (c.k_max < 1) throw InvalidInput("k_max must be positive");
      if (c.batch_size < 2) throw InvalidInput("path experiments need M >= 2 for variance statistics");
      break;
    case ExperimentKind::ConvGrid:
      positive_list(c.n_values, "n_values");
      positive_list(c.k_values, "k_values");
      positive_list(c.kernel_values, "kernel_values");
      if (c.spatial_side < 1) throw InvalidInput("spatial_side must be positive");
      for (int side : c.kernel_values) {
        if (side > c.spatial_side) throw InvalidInput("kernel side exceeds image side");
      }
      break;
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !in.eof()) throw InvalidInput("bad value for '" + key + "': '" + text + "'");
  return value;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_number<int>("list", item));
      continue;
    }
    const int lo = parse_number<int>("range", trim(item.substr(0, dots)));
    const int hi = parse_number<int>("range", trim(item.substr(dots + 2)));
    if (hi < lo) throw InvalidInput("empty range '" + item + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw InvalidInput("empty integer list");
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_key_values(ExperimentConfig& c, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    if (key == "kind") c.kind = parse_experiment_kind(value);
    else if (key == "n_values") c.n_values = parse_int_list(value);
    else if (key == "k_values") c.k_values = parse_int_list(value);
    else if (key == "kernel_values") c.kernel_values = parse_int_list(value);
    else if (key == "p") c.p = parse_number<double>(key, value);
    else if (key == "k_max") c.k_max = parse_number<int>(key, value);
    else if (key == "spatial_side") c.spatial_side = parse_number<int>(key, value);
    else if (key == "scheme") c.scheme = InitScheme::parse(value);
    else if (key == "bias_mode") c.bias_mode = parse_bias_mode(value);
    else if (key == "M") c.batch_size = parse_number<int>(key, value);
    else if (key == "trials") c.trials = parse_number<std::int64_t>(key, value);
    else if (key == "seed") c.base_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "ci_level") c.ci_level = parse_number<double>(key, value);
    else if (key == "out") c.output_dir = value;
    else if (key == "threads") c.threads = parse_number<int>(key, value);
    else throw InvalidInput("unknown config key '" + key + "'");
  }
}

ExperimentConfig load_config_file(const std::string& path, ExperimentKind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig c = default_config(kind);
  apply_key_values(c, parse_key_values(buffer.str()));
  if (c.kind != kind) throw InvalidInput("config file " + path + " is for '" + to_string(c.kind) + "' experiments");
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {
      {"kind", to_string(c.kind)},
      {"n_values", c.n_values},
      {"k_values", c.k_values},
      {"p", c.p},
      {"k_max", c.k_max},
      {"kernel_values", c.kernel_values},
      {"spatial_side", c.spatial_side},
      {"scheme", c.scheme.name()},
      {"bias_mode", to_string(c.bias_mode)},
      {"M", c.batch_size},
      {"trials", c.trials},
      {"seed", c.base_seed},
      {"ci_level", c.ci_level},
      {"out", c.output_dir},
      {"threads", c.threads},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    c.kind = parse_experiment_kind(j.at("kind").get<std::string>());
    c.n_values = j.at("n_values").get<std::vector<int>>();
    c.k_values = j.at("k_values").get<std::vector<int>>();
    c.p = j.at("p").get<double>();
    c.k_max = j.at("k_max").get<int>();
    c.kernel_values = j.at("kernel_values").get<std::vector<int>>();
    c.spatial_side = j.at("spatial_side").get<int>();
    c.scheme = InitScheme::parse(j.at("scheme").get<std::string>());
    c.bias_mode = parse_bias_mode(j.at("bias_mode").get<std::string>());
    c.batch_size = j.at("M").get<int>();
    c.trials = j.at("trials").get<std::int64_t>();
    c.base_seed = j.at("seed").get<std::uint64_t>();
    c.ci_level = j.at("ci_level").get<double>();
    c.output_dir = j.value("out", std::string("results"));
    c.threads = j.value("threads", 0);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed experiment config: ") + e.what());
  }
}

std::string fingerprint(const ExperimentConfig& config) {
  nlohmann::json j = to_json(config);
  j.erase("out");
  j.erase("threads");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace deadrelu
