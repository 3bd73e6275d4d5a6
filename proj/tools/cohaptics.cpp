// cohaptics command-line entry point.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cohaptics/experiments.hpp"
#include "cohaptics/live_server.hpp"
#include "plot_svg.hpp"

namespace fs = std::filesystem;
using namespace cohaptics;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitFault = 4;

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> haptics;
  std::optional<double> duration;
  bool plots = false;
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("cohaptics");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("COHAPTICS_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour real names.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

Scenario load(const Options& o) {
  if (o.config.empty()) throw UsageError("--config is required");
  if (!fs::is_regular_file(o.config)) throw UsageError("config file not found: " + o.config);
  spdlog::info("loading {}", o.config);
  Scenario s = load_scenario(o.config);
  if (o.seed) s.config.seed = *o.seed;
  if (o.duration) s.config.duration = *o.duration;
  if (o.haptics) s.config.haptics_enabled = *o.haptics == "on";
  s.config.validate();
  return s;
}

fs::path prepare_out(const Options& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const Json& j) { plots::write_file(path.string(), j.dump(2) + "\n"); }

void write_csv(const fs::path& path, const SimTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  write_trace_csv(out, trace);
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

void comparison_plots(const fs::path& dir, const std::string& prefix, const ExpComparison& c,
                      const SimConfig& config) {
  const std::vector<plots::Series> d{plots::distance_series("without haptics", c.trace_without),
                                     plots::distance_series("with haptics", c.trace_with)};
  plots::write_file((dir / (prefix + "_distance.svg")).string(),
                    plots::line_chart(prefix + ": d_RO", "t [s]", "d_RO [m]", d,
                                      {config.controller.d_act, config.controller.d_at}));
  const std::vector<plots::Series> p{plots::path_series("baseline", c.baseline),
                                     plots::path_series("without haptics", c.trace_without),
                                     plots::path_series("with haptics", c.trace_with)};
  plots::write_file((dir / (prefix + "_path.svg")).string(),
                    plots::line_chart(prefix + ": TCP path", "y [m]", "x [m]", p));
}

void check_faults(const ExpComparison& c) {
  if (!c.fault_without.empty()) throw SimulationFault(c.fault_without, c.fault_time_without);
  if (!c.fault_with.empty()) throw SimulationFault(c.fault_with, c.fault_time_with);
}

std::string summary(const Metrics& m) {
  return fmt::format("min_d_RO={:.4f} m time_in_avoidance={:.2f} s pct_under_d_AT={:.1f}% path={:.3f} m "
                     "collision_path={:.3f} m task_time={:.2f} s",
                     m.min_d_ro, m.time_in_avoidance, 100.0 * m.pct_under_d_at, m.robot_path_length,
                     m.collision_path, m.task_time);
}

// --- subcommands --------------------------------------------------------------

int cmd_run(const Options& o) {
  const Scenario s = load(o);
  const auto dir = prepare_out(o);
  SimConfig free = s.config;
  free.agent = AgentSpec{};
  const SimTrace baseline = run(free);
  const SimTrace trace = run(s.config);
  const Metrics m = compute_metrics(trace, &baseline, s.config.controller.d_at);
  write_csv(dir / "trace.csv", trace);
  write_json(dir / "metrics.json", {{"metrics", to_json(m)}, {"config", to_json(s.config)}});
  if (o.plots) {
    plots::write_file((dir / "distance.svg").string(),
                      plots::line_chart("d_RO", "t [s]", "d_RO [m]", {plots::distance_series("run", trace)},
                                        {s.config.controller.d_act, s.config.controller.d_at}));
    plots::write_file((dir / "path.svg").string(),
                      plots::line_chart("TCP path", "y [m]", "x [m]",
                                        {plots::path_series("baseline", baseline),
                                         plots::path_series("run", trace)}));
  }
  std::cout << "run: " << summary(m) << "\n";
  return kExitOk;
}

int cmd_exp1(const Options& o) {
  const Scenario s = load(o);
  const auto options = exp1_options_from_json(s.experiment);
  const auto dir = prepare_out(o);
  const Exp1Report r = run_exp1(s.config, options);
  write_json(dir / "exp1_report.json", to_json(r));
  std::vector<plots::Series> series;
  std::string line = "exp1:";
  for (std::size_t i = 0; i < r.cases.size(); ++i) {
    const auto& c = r.cases[i];
    write_csv(dir / fmt::format("exp1_case{}.csv", i + 1), c.trace);
    series.push_back(plots::distance_series(fmt::format("d_SR = {:.2f} m", c.d_sr), c.trace));
    line += fmt::format(" case{} median={:.4f} iqr={:.4f}", i + 1, c.median, c.iqr);
  }
  if (o.plots) {
    plots::write_file((dir / "exp1_distance.svg").string(),
                      plots::line_chart("exp1: d_A", "t [s]", "d_A [m]", series));
  }
  std::cout << line << "\n";
  return kExitOk;
}

int cmd_exp2(const Options& o) {
  const Scenario s = load(o);
  const auto options = exp2_options_from_json(s.experiment);
  const auto dir = prepare_out(o);
  const ExpComparison c = run_exp2(s.config, options);
  Json report = to_json(c, s.config);
  if (options.placements > 0) {
    const auto sweep = run_exp2_placements(s.config, options);
    double min_d = std::numeric_limits<double>::infinity(), max_goal_error = 0.0;
    int faults = 0;
    for (const auto& r : sweep) {
      if (r.fault) {
        ++faults;
        continue;
      }
      min_d = std::min(min_d, r.metrics.min_d_ro);
      max_goal_error = std::max(max_goal_error, r.final_goal_error);
    }
    report["placements"] = {{"count", sweep.size()},
                            {"halfwidth", options.placement_halfwidth},
                            {"faults", faults},
                            {"min_d_RO", faults == static_cast<int>(sweep.size()) ? Json() : Json(min_d)},
                            {"max_goal_error", max_goal_error}};
  }
  write_json(dir / "exp2_report.json", report);
  write_csv(dir / "exp2_baseline.csv", c.baseline);
  write_csv(dir / "exp2_without_haptics.csv", c.trace_without);
  write_csv(dir / "exp2_with_haptics.csv", c.trace_with);
  if (o.plots) comparison_plots(dir, "exp2", c, s.config);
  check_faults(c);
  std::cout << fmt::format("exp2: path without={:.3f} m with={:.3f} m min_d_RO without={:.4f} m with={:.4f} m\n",
                           c.without_haptics.robot_path_length, c.with_haptics.robot_path_length,
                           c.without_haptics.min_d_ro, c.with_haptics.min_d_ro);
  return kExitOk;
}

int cmd_exp3(const Options& o) {
  const Scenario s = load(o);
  Exp3Setup setup{s.config, reach_task_from_json(s.experiment)};
  std::vector<std::uint64_t> seeds;
  if (o.seed) {
    seeds.push_back(*o.seed);
  } else if (s.experiment.contains("seeds")) {
    try {
      seeds = s.experiment.at("seeds").get<std::vector<std::uint64_t>>();
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("experiment: seeds: ") + e.what());
    }
  }
  if (seeds.empty()) seeds.push_back(s.config.seed);
  const auto dir = prepare_out(o);

  // Traces for the first seed, summary statistics for the sweep.
  const ExpComparison first = run_exp3(setup, seeds.front());
  write_csv(dir / "exp3_baseline.csv", first.baseline);
  write_csv(dir / "exp3_without_haptics.csv", first.trace_without);
  write_csv(dir / "exp3_with_haptics.csv", first.trace_with);
  if (o.plots) comparison_plots(dir, "exp3", first, s.config);

  const auto sweep = run_exp3_sweep(setup, seeds);
  Json runs = Json::array();
  int gain = 0, path = 0, time = 0;
  for (const auto& c : sweep) {
    Json j = to_json(c, s.config);
    j.erase("config");
    runs.push_back(std::move(j));
    gain += c.min_d_ro_gain >= 0.02;
    path += c.with_haptics.collision_path <= 0.5 * c.without_haptics.collision_path;
    time += c.with_haptics.time_in_avoidance <= 0.6 * c.without_haptics.time_in_avoidance;
  }
  const auto n = static_cast<double>(sweep.size());
  write_json(dir / "exp3_report.json",
             {{"experiment", "exp3"},
              {"seeds", seeds},
              {"runs", runs},
              {"fraction_min_d_RO_gain_ge_0.02", gain / n},
              {"fraction_collision_path_halved", path / n},
              {"fraction_avoidance_time_le_60pct", time / n},
              {"config", to_json(s.config)}});
  for (const auto& c : sweep) check_faults(c);
  std::cout << fmt::format(
      "exp3: seeds={} min_d_RO without={:.4f} m with={:.4f} m collision_path without={:.3f} m with={:.3f} m\n",
      sweep.size(), first.without_haptics.min_d_ro, first.with_haptics.min_d_ro,
      first.without_haptics.collision_path, first.with_haptics.collision_path);
  return kExitOk;
}

int cmd_serve(const Options& o) {
  Options with_duration = o;
  if (!with_duration.duration) with_duration.duration = 24.0 * 3600.0;
  const Scenario s = load(with_duration);
  ServerOptions so;
  so.address = o.address;
  so.port = o.port;
  LiveServer server(LiveSession(s.config), so);
  server.start();
  std::cout << fmt::format("serving ws://{}:{}/stream (health on /health)", o.address, server.port())
            << std::endl;
  server.wait();
  server.stop();
  return kExitOk;
}

int cmd_validate(const Options& o) {
  Json j;
  std::string base = ".";
  if (o.config.empty()) {
    const std::string text{std::istreambuf_iterator<char>(std::cin), {}};
    j = Json::parse(text, nullptr, /*allow_exceptions=*/false, /*ignore_comments=*/true);
    if (j.is_discarded()) throw ConfigError("stdin: not valid JSON");
  } else {
    if (!fs::is_regular_file(o.config)) throw UsageError("config file not found: " + o.config);
    j = read_json_file(o.config);
    base = directory_of(o.config);
  }
  const SimConfig c = sim_config_from_json(j, base);
  if (j.contains("experiment")) {
    const Json& e = j.at("experiment");
    const std::string name = e.value("name", "");
    if (name == "exp1") exp1_options_from_json(e);
    else if (name == "exp2") exp2_options_from_json(e);
    else if (name == "exp3") reach_task_from_json(e);
    else throw ConfigError("experiment: unknown name '" + name + "'");
  }
  std::cout << fmt::format("valid: {} ticks, {} goals, agent {}\n", c.tick_count(),
                           c.goal_program.goals.size(), to_string(c.agent.kind));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Haptics-in-the-loop collision-avoidance simulator"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "Run or scenario config (JSON)");
    if (config_required) c->required();
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--duration", o.duration, "Override simulated duration [s]")
        ->check(CLI::PositiveNumber);
  };
  const auto seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "Override the seed"); };
  const auto haptics = [&](CLI::App* sub) {
    sub->add_option("--haptics", o.haptics, "Haptic display on or off")
        ->check(CLI::IsMember({"on", "off"}));
  };
  const auto plots_flag = [&](CLI::App* sub) {
    sub->add_flag("--plots", o.plots, "Also write SVG plots");
  };

  auto* run_cmd = app.add_subcommand("run", "Run one simulation, write trace.csv and metrics.json");
  common(run_cmd, true);
  seed(run_cmd);
  haptics(run_cmd);
  plots_flag(run_cmd);
  auto* exp1 = app.add_subcommand("exp1", "Circling test over the rendering ranges");
  common(exp1, true);
  seed(exp1);
  plots_flag(exp1);
  auto* exp2 = app.add_subcommand("exp2", "Static vs responsive hand on the A-B path");
  common(exp2, true);
  seed(exp2);
  plots_flag(exp2);
  auto* exp3 = app.add_subcommand("exp3", "Collaborative pick-and-place comparison");
  common(exp3, true);
  seed(exp3);
  plots_flag(exp3);
  auto* serve = app.add_subcommand("serve", "Run the live server for the steering UI");
  common(serve, true);
  seed(serve);
  haptics(serve);
  serve->add_option("--address", o.address, "Bind address")->capture_default_str();
  serve->add_option("--port", o.port, "TCP port")->capture_default_str();
  auto* validate = app.add_subcommand("validate", "Check a config without running it (stdin if no --config)");
  validate->add_option("--config", o.config, "Config to check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(o);
    if (*exp1) return cmd_exp1(o);
    if (*exp2) return cmd_exp2(o);
    if (*exp3) return cmd_exp3(o);
    if (*serve) return cmd_serve(o);
    return cmd_validate(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SimulationFault& e) {
    std::cerr << fmt::format("simulation fault at t={:.2f} s: {}\n", e.time(), e.what());
    return kExitFault;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
