#include "deadrelu/cli.hpp"

#include <charconv>
#include <cstdio>
#include <thread>

#include <CLI11.hpp>

#include "deadrelu/bounds.hpp"
#include "deadrelu/experiments.hpp"
#include "deadrelu/montecarlo.hpp"
#include "deadrelu/plot.hpp"

namespace deadrelu {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos && s != "inf" && s != "nan") s += ".0";
  return s;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Flags shared by the experiment subcommands. Values are only applied when
// given, so they override a config file.
struct CommonFlags {
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  int batch_size = 0;
  int threads = 0;
  std::string out;
  std::string config_file;
  std::string manifest;
  std::string scheme;
  double ci_level = 0.95;
  bool zero_bias = false;
  bool free_bias = false;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* batch_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* scheme_opt = nullptr;
  CLI::Option* level_opt = nullptr;

  void attach(CLI::App* app, bool experiment) {
    seed_opt = app->add_option("--seed", seed, "Base seed (u64)");
    trials_opt = app->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    batch_opt = app->add_option("--M", batch_size, "Data points per trial")->check(CLI::PositiveNumber);
    threads_opt = app->add_option("--threads", threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    scheme_opt = app->add_option("--scheme", scheme, "he | xavier | normal:<var> | uniform:<halfwidth>");
    level_opt = app->add_option("--level", ci_level, "Confidence level of reported intervals");
    auto* zb = app->add_flag("--zero-bias", zero_bias, "Biases fixed at zero (default)");
    auto* fb = app->add_flag("--free-bias", free_bias, "Biases drawn like the weights");
    zb->excludes(fb);
    if (experiment) {
      out_opt = app->add_option("--out", out, "Output directory");
      app->add_option("--config", config_file, "key = value config file");
      app->add_option("--from-manifest", manifest, "Rerun the config recorded in a manifest")
          ->excludes(app->get_option("--config"));
    }
  }

  void apply(ExperimentConfig& c) const {
    if (seed_opt->count()) c.base_seed = seed;
    if (trials_opt->count()) c.trials = trials;
    if (batch_opt->count()) c.batch_size = batch_size;
    if (threads_opt->count()) c.threads = threads;
    if (scheme_opt->count()) c.scheme = InitScheme::parse(scheme);
    if (level_opt->count()) c.ci_level = ci_level;
    if (zero_bias) c.bias_mode = BiasMode::ZeroBias;
    if (free_bias) c.bias_mode = BiasMode::FreeBias;
    if (out_opt && out_opt->count()) c.output_dir = out;
  }

  ExperimentConfig base(ExperimentKind kind) const {
    if (!manifest.empty()) {
      ExperimentConfig c = config_from_manifest(manifest);
      if (c.kind != kind) throw InvalidInput("manifest " + manifest + " records a '" + to_string(c.kind) + "' run");
      return c;
    }
    if (!config_file.empty()) return load_config_file(config_file, kind);
    return default_config(kind);
  }
};

int run_experiment_command(ExperimentConfig config, std::ostream& out) {
  validate(config);
  const ExperimentResult result = run_experiment(config, [&](const std::string& line) { out << line << '\n'; });
  out << "wrote " << result.csv_path << " (" << result.rows.size() << " rows, " << result.cells_computed
      << " computed, " << result.cells_resumed << " resumed)\n";
  out << "wrote " << result.manifest_path << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounds and Monte Carlo estimates for the trainability of random ReLU networks", "deadrelu"};
  app.require_subcommand(1);

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "Lower and upper bounds on the probability a network is alive");
  int b_n = 0;
  std::int64_t b_k = 0;
  bool b_zero = false, b_free = false, b_conv = false;
  int b_channels = 0, b_kernel = 0;
  auto* b_n_opt = bounds_cmd->add_option("--n", b_n, "Width")->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--k", b_k, "Depth")->required()->check(CLI::PositiveNumber);
  auto* b_zero_opt = bounds_cmd->add_flag("--zero-bias", b_zero, "Zero biases (default)");
  b_zero_opt->excludes(bounds_cmd->add_flag("--free-bias", b_free, "Random biases"));
  auto* b_conv_opt = bounds_cmd->add_flag("--conv", b_conv, "Convolutional bounds");
  auto* b_ch_opt = bounds_cmd->add_option("--channels", b_channels, "Channels")->check(CLI::PositiveNumber);
  auto* b_ker_opt = bounds_cmd->add_option("--kernel", b_kernel, "Kernel side")->check(CLI::PositiveNumber);
  b_ch_opt->needs(b_conv_opt);
  b_ker_opt->needs(b_conv_opt);

  // width
  auto* width_cmd = app.add_subcommand("width", "Least width whose lower bound reaches p at depth k");
  double w_p = 0.0;
  std::int64_t w_k = 0;
  width_cmd->add_option("--p", w_p, "Target probability in (0,1)")->required();
  width_cmd->add_option("--k", w_k, "Depth")->required()->check(CLI::PositiveNumber);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Single Monte Carlo estimate");
  int s_n = 0, s_k = 1;
  bool s_point = false, s_neuron = false;
  std::vector<double> s_x;
  sim_cmd->add_option("--n", s_n, "Width")->required()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--k", s_k, "Depth")->check(CLI::PositiveNumber);
  auto* s_point_opt = sim_cmd->add_flag("--point", s_point, "Probability that one fixed point survives");
  auto* s_neuron_opt = sim_cmd->add_flag("--neuron", s_neuron, "Probability that one random neuron kills a fixed point");
  s_point_opt->excludes(s_neuron_opt);
  sim_cmd->add_option("--x", s_x, "Fixed point coordinates (default all ones)")->delimiter(',');
  CommonFlags s_flags;
  s_flags.attach(sim_cmd, false);

  // experiments
  auto* grid_cmd = app.add_subcommand("grid", "Alive probability over an (n, k) grid with bounds");
  auto* path_cmd = app.add_subcommand("path", "Alive probability along n(k) = min_width(p, k)");
  auto* cmp_cmd = app.add_subcommand("compare-init", "Living-data fraction under IID, sign-flip and batch-centering");
  auto* conv_cmd = app.add_subcommand("conv-grid", "Alive probability of convolutional networks with bounds");

  CommonFlags g_flags, p_flags, c_flags, v_flags;
  g_flags.attach(grid_cmd, true);
  p_flags.attach(path_cmd, true);
  c_flags.attach(cmp_cmd, true);
  v_flags.attach(conv_cmd, true);

  std::string g_n, g_k;
  auto* g_n_opt = grid_cmd->add_option("--n-values,--n", g_n, "Widths, e.g. 1..15 or 1,2,4");
  auto* g_k_opt = grid_cmd->add_option("--k-values,--k", g_k, "Depths, e.g. 1,2,4,8");

  double p_p = 0.5;
  int p_kmax = 0;
  auto* p_p_opt = path_cmd->add_option("--p", p_p, "Target lower bound in (0,1)");
  auto* p_k_opt = path_cmd->add_option("--k-max", p_kmax, "Largest depth")->check(CLI::PositiveNumber);

  std::string c_n, c_k;
  auto* c_n_opt = cmp_cmd->add_option("--n-values,--n", c_n, "Widths");
  auto* c_k_opt = cmp_cmd->add_option("--k-values,--k", c_k, "Depths");

  std::string v_ch, v_ker, v_k;
  int v_d = 0;
  auto* v_ch_opt = conv_cmd->add_option("--channels", v_ch, "Channel counts, e.g. 1..4");
  auto* v_ker_opt = conv_cmd->add_option("--kernels", v_ker, "Kernel sides, e.g. 1,3");
  auto* v_k_opt = conv_cmd->add_option("--k-values,--k", v_k, "Depths");
  auto* v_d_opt = conv_cmd->add_option("--d", v_d, "Image side")->check(CLI::PositiveNumber);

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Render result CSV columns as an SVG line chart");
  PlotSpec plot;
  std::vector<std::string> where;
  plot_cmd->add_option("--csv", plot.input_csv, "Input CSV")->required();
  plot_cmd->add_option("--x", plot.x_column, "x column")->required();
  plot_cmd->add_option("--y", plot.series, "Series columns")->required()->delimiter(',');
  plot_cmd->add_option("--dashed", plot.dashed, "Series drawn dashed")->delimiter(',');
  plot_cmd->add_flag("--logx", plot.log_x, "Log-scale x axis");
  plot_cmd->add_flag("--logy", plot.log_y, "Log-scale y axis");
  plot_cmd->add_option("--where", where, "Row filter column=value (repeatable)");
  plot_cmd->add_option("--title", plot.title, "Chart title");
  plot_cmd->add_option("--out", plot.output_svg, "Output SVG path")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  try {
    if (bounds_cmd->parsed()) {
      BoundPair b;
      if (b_conv) {
        if (!b_ch_opt->count() || !b_ker_opt->count()) throw InvalidInput("--conv needs --channels and --kernel");
        b = conv_bounds(b_channels, b_kernel, b_k);
      } else {
        if (!b_n_opt->count()) throw InvalidInput("--n is required");
        b = bounds(b_n, b_k, b_free ? BiasMode::FreeBias : BiasMode::ZeroBias);
      }
      out << "lower " << shortest(b.lower) << "\n" << "upper " << shortest(b.upper) << "\n";
      return 0;
    }
    if (width_cmd->parsed()) {
      out << min_width(w_p, w_k) << "\n";
      return 0;
    }
    if (sim_cmd->parsed()) {
      ExperimentConfig c = default_config(ExperimentKind::Grid);
      s_flags.apply(c);
      if (!s_flags.trials_opt->count()) c.trials = s_point || s_neuron ? 100000 : 1024;
      const RunOptions opts{c.threads, c.ci_level};
      const SeedSpec seed{c.base_seed, "simulate"};
      Vector x = Vector::Ones(s_n);
      if (!s_x.empty()) {
        if (static_cast<int>(s_x.size()) != s_n) throw InvalidInput("--x needs exactly n coordinates");
        x = Eigen::Map<const Vector>(s_x.data(), s_n);
      }
      const NetworkSetup setup{s_n, s_k, c.scheme, c.bias_mode};
      Estimate e;
      double reference = 0.0;
      std::string what;
      if (s_neuron) {
        e = estimate_neuron_death_prob(s_n, c.scheme, c.bias_mode, x, c.trials, seed, opts);
        what = "neuron death probability";
        reference = 0.5;
      } else if (s_point) {
        e = estimate_point_alive_prob(setup, x, c.trials, seed, opts);
        what = "point alive probability";
        reference = lower_bound(s_n, s_k);
      } else {
        e = estimate_alive_prob(setup, c.batch_size, c.trials, seed, opts);
        what = "network alive probability";
      }
      out << what << " n=" << s_n << (s_neuron ? "" : " k=" + std::to_string(s_k)) << " scheme=" << c.scheme.name()
          << " bias=" << to_string(c.bias_mode) << "\n";
      out << "estimate " << fixed(e.p_hat, 6) << " (" << e.successes << "/" << e.trials << ")\n";
      out << "ci" << fixed(100.0 * c.ci_level, 0) << " [" << fixed(e.ci_low, 6) << ", " << fixed(e.ci_high, 6) << "]\n";
      if (s_neuron || s_point) {
        out << "reference " << shortest(reference) << "\n";
      } else {
        const BoundPair b = bounds(s_n, s_k, c.bias_mode);
        out << "lower " << shortest(b.lower) << "\nupper " << shortest(b.upper) << "\n";
      }
      return 0;
    }
    if (grid_cmd->parsed()) {
      ExperimentConfig c = g_flags.base(ExperimentKind::Grid);
      g_flags.apply(c);
      if (g_n_opt->count()) c.n_values = parse_int_list(g_n);
      if (g_k_opt->count()) c.k_values = parse_int_list(g_k);
      return run_experiment_command(c, out);
    }
    if (path_cmd->parsed()) {
      ExperimentConfig c = p_flags.base(ExperimentKind::ConstantLBPath);
      p_flags.apply(c);
      if (p_p_opt->count()) c.p = p_p;
      if (p_k_opt->count()) c.k_max = p_kmax;
      return run_experiment_command(c, out);
    }
    if (cmp_cmd->parsed()) {
      ExperimentConfig c = c_flags.base(ExperimentKind::InitComparison);
      c_flags.apply(c);
      if (c_n_opt->count()) c.n_values = parse_int_list(c_n);
      if (c_k_opt->count()) c.k_values = parse_int_list(c_k);
      return run_experiment_command(c, out);
    }
    if (conv_cmd->parsed()) {
      ExperimentConfig c = v_flags.base(ExperimentKind::ConvGrid);
      v_flags.apply(c);
      if (v_ch_opt->count()) c.n_values = parse_int_list(v_ch);
      if (v_ker_opt->count()) c.kernel_values = parse_int_list(v_ker);
      if (v_k_opt->count()) c.k_values = parse_int_list(v_k);
      if (v_d_opt->count()) c.spatial_side = v_d;
      return run_experiment_command(c, out);
    }
    if (plot_cmd->parsed()) {
      for (const auto& w : where) {
        const auto eq = w.find('=');
        if (eq == std::string::npos) throw InvalidInput("--where expects column=value, got '" + w + "'");
        char* end = nullptr;
        const std::string value = w.substr(eq + 1);
        const double v = std::strtod(value.c_str(), &end);
        if (value.empty() || *end != '\0') throw InvalidInput("--where value '" + value + "' is not a number");
        plot.filters.emplace_back(w.substr(0, eq), v);
      }
      plot_csv(plot);
      out << "wrote " << plot.output_svg << "\n";
      return 0;
    }
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace deadrelu
