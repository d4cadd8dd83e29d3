#include "revealed/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "revealed/aggregation.hpp"
#include "revealed/estimation.hpp"
#include "revealed/evaluation.hpp"
#include "revealed/io.hpp"
#include "revealed/projection.hpp"
#include "revealed/rng.hpp"
#include "revealed/simulate.hpp"
#include "revealed/structure.hpp"
#include "revealed/types.hpp"

namespace revealed {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string mode = "binary";
  std::string input;
  std::string config_path;
  std::string out = ".";
  std::string sigma;  // path to a structure to use instead of estimating one
  double censor_floor = 0.001;
  double censor_ceiling = 0.999;
  double winsorize_level = 0.0;  // 0 disables
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  Index kappa_count = 0;
  bool kappa_log = true;
  double epsilon = 1e-5;
  std::uint64_t seed = 0;
  std::vector<std::string> methods;
  std::vector<Index> sizes;
  Index reps = 100;
  Index min_overlap = 1;
  Index max_redraws = 1000;
  // simulate
  Index events = 0;
  Index forecasters = 0;
  Index block_size = 5;
  double shared_info = 0.2;
  double private_info = 0.05;
  double threshold = 0.0;
  double prior_mean = 0.0;
  double prior_sd = 1.0;
  double miss_rate = 0.0;

  const CLI::App* active = nullptr;  // the parsed subcommand
};

Mode parse_mode(const std::string& name) {
  if (name == "binary") return Mode::binary;
  if (name == "continuous") return Mode::continuous;
  throw usage_error("unknown mode '" + name + "' (binary or continuous)");
}

// Mode-sized default grids: the binary search is fine (100 candidates up to
// 1e3), the continuous one coarse and wide (10 candidates up to 1e4), and
// per-replication selection inside evaluate always uses 10 candidates.
KappaGrid kappa_grid_for(const Options& o, Mode mode, bool coarse) {
  KappaGrid g;
  g.min = 10.0;
  g.max = mode == Mode::binary ? 1000.0 : 10000.0;
  g.count = mode == Mode::binary && !coarse ? 100 : 10;
  g.log_spaced = o.kappa_log;
  if (o.active->count("--kappa-min")) g.min = o.kappa_min;
  if (o.active->count("--kappa-max")) g.max = o.kappa_max;
  if (o.active->count("--kappa-count")) g.count = o.kappa_count;
  return g;
}

std::vector<Method> methods_for(const Options& o, Mode mode) {
  if (o.methods.empty()) return default_methods(mode);
  std::vector<Method> out;
  for (const std::string& name : o.methods) out.push_back(parse_method(name));
  return out;
}

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

void ensure_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw data_error("cannot create output directory " + dir + ": " +
                     ec.message());
}

ForecastPanel load_panel(const Options& o, Mode mode) {
  if (o.input.empty()) throw usage_error("--input is required");
  if (o.winsorize_level != 0.0 && mode == Mode::binary)
    throw usage_error("--winsorize applies to continuous panels only");
  IngestReport report;
  ForecastPanel panel = ingest_panel(o.input, mode, &report);
  if (report.duplicate_rows > 0)
    std::cerr << "warning: " << report.duplicate_rows
              << " repeated (event, forecaster) rows in " << o.input
              << "; keeping the last occurrence of each\n";
  if (mode == Mode::continuous && o.winsorize_level != 0.0)
    panel = winsorize(panel, o.winsorize_level);
  return panel;
}

InformationStructure load_sigma(const Options& o,
                                const ForecastPanel& panel) {
  std::vector<std::string> ids;
  const MatrixXd m = read_sigma_csv(o.sigma, &ids);
  if (ids != panel.forecaster_ids)
    throw data_error(o.sigma +
                     ": forecaster labels do not match the input panel");
  return InformationStructure(m);
}

RunDiagnostics selection_diagnostics(const KappaSelection& sel,
                                     Index clamp_count, std::uint64_t seed) {
  RunDiagnostics d;
  d.kappa = sel.chosen;
  d.condition_number = sel.projection.condition;
  d.min_eigenvalue_h = sel.projection.min_eigenvalue;
  d.iterations = sel.projection.iterations;
  d.clamp_count = clamp_count;
  d.seed = seed;
  return d;
}

int cmd_estimate(const Options& o) {
  const Mode mode = parse_mode(o.mode);
  const ForecastPanel panel = load_panel(o, mode);
  ensure_out(o.out);
  const PipelineInputs inputs =
      prepare_pipeline(panel, o.censor_floor, o.censor_ceiling);
  const KappaSelection sel = select_kappa(
      inputs.estimate, inputs.z, kappa_grid_for(o, mode, false), o.epsilon);
  write_sigma_csv(join(o.out, "sigma.csv"), sel.projection.sigma,
                  panel.forecaster_ids);
  write_diagnostics_json(
      join(o.out, "diagnostics.json"),
      selection_diagnostics(sel, inputs.clamp_count, o.seed));
  return 0;
}

int cmd_aggregate(const Options& o) {
  const Mode mode = parse_mode(o.mode);
  const ForecastPanel panel = load_panel(o, mode);
  ensure_out(o.out);
  const std::vector<Method> methods = methods_for(o, mode);
  const bool wants_revealed =
      std::find(methods.begin(), methods.end(), Method::revealed) !=
      methods.end();

  Index clamp_count = 0;
  ForecastPanel prepared =
      mode == Mode::binary
          ? censor(panel, o.censor_floor, o.censor_ceiling, &clamp_count)
          : panel;

  RunDiagnostics d;
  d.seed = o.seed;
  d.clamp_count = clamp_count;
  InformationStructure sigma(
      MatrixXd::Identity(panel.forecasters(), panel.forecasters()));
  if (!o.sigma.empty()) {
    sigma = load_sigma(o, panel);
    d.kappa = 0.0;  // supplied, not selected
    d.condition_number = condition_number(extend(sigma).omega);
    d.min_eigenvalue_h = min_eigenvalue_h(sigma);
  } else if (wants_revealed) {
    const PipelineInputs inputs =
        prepare_pipeline(panel, o.censor_floor, o.censor_ceiling);
    const KappaSelection sel = select_kappa(
        inputs.estimate, inputs.z, kappa_grid_for(o, mode, false), o.epsilon);
    sigma = sel.projection.structure();
    d = selection_diagnostics(sel, clamp_count, o.seed);
  }

  const PanelAggregates aggregates = aggregate_panel(prepared, sigma, methods);
  write_aggregates_csv(join(o.out, "aggregates.csv"), panel.event_ids,
                       aggregates);
  write_diagnostics_json(join(o.out, "diagnostics.json"), d);
  return 0;
}

int cmd_validate_kappa(const Options& o) {
  const Mode mode = parse_mode(o.mode);
  const ForecastPanel panel = load_panel(o, mode);
  ensure_out(o.out);
  const PipelineInputs inputs =
      prepare_pipeline(panel, o.censor_floor, o.censor_ceiling);
  const KappaSelection sel = select_kappa(
      inputs.estimate, inputs.z, kappa_grid_for(o, mode, false), o.epsilon);
  write_kappa_scores_csv(join(o.out, "kappa_scores.csv"), sel);
  write_diagnostics_json(
      join(o.out, "diagnostics.json"),
      selection_diagnostics(sel, inputs.clamp_count, o.seed));
  return 0;
}

int cmd_evaluate(const Options& o) {
  const Mode mode = parse_mode(o.mode);
  const ForecastPanel panel = load_panel(o, mode);
  ensure_out(o.out);
  if (o.sizes.empty())
    throw usage_error("--sizes is required (subsample sizes, e.g. 5,10,20)");
  ExperimentPlan plan;
  plan.sizes = o.sizes;
  plan.replications = o.reps;
  plan.methods = methods_for(o, mode);
  plan.seed = o.seed;
  plan.min_pair_overlap = o.min_overlap;
  plan.max_redraws = o.max_redraws;
  plan.kappa_grid = kappa_grid_for(o, mode, true);
  plan.epsilon = o.epsilon;
  plan.censor_floor = o.censor_floor;
  plan.censor_ceiling = o.censor_ceiling;
  const EvaluationReport report = run_subsample_experiment(panel, plan);
  write_report_csv(join(o.out, "report.csv"), report);
  write_summary_json(join(o.out, "summary.json"), report);
  return 0;
}

int cmd_simulate(const Options& o) {
  const Mode mode = parse_mode(o.mode);
  ensure_out(o.out);
  if (o.events < 1) throw usage_error("--events must be at least 1");

  InformationStructure sigma(MatrixXd::Identity(1, 1));
  if (!o.sigma.empty()) {
    sigma = InformationStructure(read_sigma_csv(o.sigma));
  } else {
    if (o.forecasters < 1)
      throw usage_error("--forecasters must be at least 1 (or pass --sigma)");
    if (o.block_size < 1) throw usage_error("--block-size must be positive");
    std::vector<Index> blocks;
    for (Index left = o.forecasters; left > 0; left -= blocks.back())
      blocks.push_back(std::min(o.block_size, left));
    const std::vector<double> shared(blocks.size(), o.shared_info);
    const VectorXd private_var =
        VectorXd::Constant(o.forecasters, o.private_info);
    sigma = make_block_sigma(blocks, shared, private_var);
  }

  LinkModel link =
      mode == Mode::binary
          ? LinkModel::binary(VectorXd::Constant(o.events, o.threshold))
          : LinkModel::continuous(VectorXd::Constant(o.events, o.prior_mean),
                                  o.prior_sd * o.prior_sd);
  ForecastPanel panel = simulate_panel(sigma, link, o.events, o.seed);
  if (o.miss_rate > 0.0)
    panel = apply_random_mask(panel, o.miss_rate, derive_seed(o.seed, 1));
  write_panel_csv(join(o.out, "panel.csv"), panel);
  write_sigma_csv(join(o.out, "sigma.csv"), sigma.sigma(),
                  panel.forecaster_ids);
  return 0;
}

std::string strip(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Applies a flat key=value file to the options of the parsed subcommand.
// Options already given on the command line keep their values.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  std::set<CLI::Option*> injected;
  std::string line;
  for (Index line_no = 1; std::getline(in, line); ++line_no) {
    const std::string text = strip(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw data_error(path + ":" + std::to_string(line_no) +
                       ": expected key=value");
    const std::string key = strip(text.substr(0, eq));
    std::string value = strip(text.substr(eq + 1));
    if (value.size() >= 2 &&
        ((value.front() == '"' && value.back() == '"') ||
         (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    if (key.empty())
      throw data_error(path + ":" + std::to_string(line_no) + ": empty key");
    CLI::Option* op = cmd->get_option_no_throw("--" + key);
    if (op == nullptr)
      throw usage_error(path + ":" + std::to_string(line_no) +
                        ": no option --" + key + " for " + cmd->get_name());
    if (op->count() > 0 && injected.find(op) == injected.end())
      continue;  // the command line wins
    op->add_result(value);
    injected.insert(op);
  }
  for (CLI::Option* op : injected) op->run_callback();
}

void add_common(CLI::App* cmd, Options& o, bool needs_input) {
  cmd->add_option("--config", o.config_path,
                  "Flat key=value file with these option names; command-line "
                  "flags win");
  cmd->add_option("--mode", o.mode, "Panel mode: binary or continuous")
      ->capture_default_str();
  if (needs_input)
    cmd->add_option("--input", o.input, "Long-format forecast CSV");
  cmd->add_option("--out", o.out, "Output directory (created if missing)")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Master seed for randomized steps")
      ->capture_default_str();
  cmd->add_option("--censor-floor", o.censor_floor,
                  "Lower clamp for binary forecasts")
      ->capture_default_str();
  cmd->add_option("--censor-ceil", o.censor_ceiling,
                  "Upper clamp for binary forecasts")
      ->capture_default_str();
  cmd->add_option("--winsorize", o.winsorize_level,
                  "Per-event Winsorization level in (0,100); continuous mode");
  cmd->add_option("--kappa-min", o.kappa_min, "Smallest candidate bound");
  cmd->add_option("--kappa-max", o.kappa_max, "Largest candidate bound");
  cmd->add_option("--kappa-count", o.kappa_count, "Grid size");
  cmd->add_flag("--kappa-log,!--kappa-linear", o.kappa_log,
                "Log-spaced grid (default) vs linear");
  cmd->add_option("--epsilon", o.epsilon, "Projection stopping tolerance")
      ->capture_default_str();
}

int dispatch(Options& o, const CLI::App& app) {
  const auto parsed = app.get_subcommands();
  if (parsed.empty()) throw usage_error("missing command");
  o.active = parsed.front();
  const std::string name = o.active->get_name();
  if (name == "estimate") return cmd_estimate(o);
  if (name == "aggregate") return cmd_aggregate(o);
  if (name == "validate-kappa") return cmd_validate_kappa(o);
  if (name == "evaluate") return cmd_evaluate(o);
  if (name == "simulate") return cmd_simulate(o);
  throw usage_error("unknown command " + name);
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{
      "Forecast aggregation through revealed information structures"};
  app.require_subcommand(1);

  CLI::App* estimate = app.add_subcommand(
      "estimate", "Estimate the information structure from a panel");
  add_common(estimate, o, true);

  CLI::App* aggregate = app.add_subcommand(
      "aggregate", "Aggregate a panel with the revealed method and baselines");
  add_common(aggregate, o, true);
  aggregate->add_option("--methods", o.methods,
                        "Comma-separated methods (default: all for the mode)")
      ->delimiter(',');
  aggregate->add_option(
      "--sigma", o.sigma,
      "Use this structure file instead of estimating one");

  CLI::App* validate = app.add_subcommand(
      "validate-kappa", "Score each condition-bound candidate on the panel");
  add_common(validate, o, true);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Subsampling comparison of aggregation methods");
  add_common(evaluate, o, true);
  evaluate->add_option("--methods", o.methods,
                       "Comma-separated methods (default: all for the mode)")
      ->delimiter(',');
  evaluate->add_option("--sizes", o.sizes,
                       "Comma-separated subsample sizes")
      ->delimiter(',');
  evaluate->add_option("--reps", o.reps, "Replications per size")
      ->capture_default_str();
  evaluate->add_option("--min-overlap", o.min_overlap,
                       "Events every selected pair must share")
      ->capture_default_str();
  evaluate->add_option("--max-redraws", o.max_redraws,
                       "Attempts before an infeasible subsample is an error")
      ->capture_default_str();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate a calibrated synthetic panel and its structure");
  add_common(simulate, o, false);
  simulate->add_option("--events", o.events, "Number of events");
  simulate->add_option("--forecasters", o.forecasters,
                       "Number of forecasters");
  simulate->add_option("--sigma", o.sigma,
                       "Structure file to simulate from (overrides blocks)");
  simulate->add_option("--block-size", o.block_size,
                       "Forecasters per information block")
      ->capture_default_str();
  simulate->add_option("--shared", o.shared_info,
                       "Information share common to a block")
      ->capture_default_str();
  simulate->add_option("--private", o.private_info,
                       "Information share private to each forecaster")
      ->capture_default_str();
  simulate->add_option("--threshold", o.threshold,
                       "Binary outcome threshold t")
      ->capture_default_str();
  simulate->add_option("--prior-mean", o.prior_mean,
                       "Continuous prior mean")
      ->capture_default_str();
  simulate->add_option("--prior-sd", o.prior_sd,
                       "Continuous prior standard deviation")
      ->capture_default_str();
  simulate->add_option("--miss-rate", o.miss_rate,
                       "Independent missingness probability")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (!o.config_path.empty()) {
      const auto parsed = app.get_subcommands();
      if (!parsed.empty()) apply_config_file(parsed.front(), o.config_path);
    }
    return dispatch(o, app);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const error& e) {
    // data_error and contract_error: the input broke a documented rule.
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace revealed
