#include "cohaptics/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cohaptics {
namespace {

const SimTrace& trace_of(const BatchResult& r) { return *r.trace; }

double reduction(double with, double without) {
  return without > 0.0 ? 1.0 - with / without : 0.0;
}

ExpComparison compare(const BatchResult& baseline, const BatchResult& without,
                      const BatchResult& with, bool keep_traces) {
  ExpComparison c;
  c.without_haptics = without.metrics;
  c.with_haptics = with.metrics;
  c.baseline_path = baseline.metrics.robot_path_length;
  c.min_d_ro_gain = with.metrics.min_d_ro - without.metrics.min_d_ro;
  c.collision_path_reduction = reduction(with.metrics.collision_path, without.metrics.collision_path);
  c.avoidance_time_reduction =
      reduction(with.metrics.time_in_avoidance, without.metrics.time_in_avoidance);
  c.fault_without = without.fault.value_or("");
  c.fault_with = with.fault.value_or("");
  c.fault_time_without = without.fault_time;
  c.fault_time_with = with.fault_time;
  c.goal_error_without = without.final_goal_error;
  c.goal_error_with = with.final_goal_error;
  if (keep_traces) {
    c.baseline = trace_of(baseline);
    c.trace_without = trace_of(without);
    c.trace_with = trace_of(with);
  }
  return c;
}

SimConfig without_obstacle(SimConfig c) {
  c.agent = AgentSpec{};
  c.haptics_enabled = false;
  return c;
}

// Metrics against a baseline computed after the fact (batch items run
// independently, so the baseline is applied here).
void apply_baseline(BatchResult& r, const SimTrace& baseline, double d_at) {
  if (r.trace) r.metrics = compute_metrics(*r.trace, &baseline, d_at);
}

}  // namespace

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyTrace();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

// --- Experiment 1 -------------------------------------------------------------

Exp1Report run_exp1(const SimConfig& base, const Exp1Options& options, Execution execution) {
  Exp1Report report;
  report.base = base;
  report.options = options;

  const Vector3 center = forward_kinematics(base.arm, base.initial_q).position;
  std::vector<SimConfig> configs;
  for (std::size_t i = 0; i < options.d_sr_cases.size(); ++i) {
    SimConfig c = base;
    const double d_sr = options.d_sr_cases[i];
    c.haptics = HapticParams::one_sided(d_sr);
    c.haptics_enabled = true;
    c.robot_static = true;
    c.agent.kind = AgentSpec::Kind::Circling;
    c.agent.circling.center = center;
    c.agent.circling.initial_radius = d_sr;
    c.seed = base.seed + i;
    configs.push_back(std::move(c));
  }

  BatchOptions opts;
  opts.execution = execution;
  opts.keep_traces = true;
  auto results = run_batch(configs, opts);
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].fault) throw SimulationFault(*results[i].fault, results[i].fault_time);
    Exp1Case ec;
    ec.d_sr = options.d_sr_cases[i];
    ec.fixed_point = CirclingAgent::fixed_point(ec.d_sr, base.agent.circling.target_displacement);
    std::vector<double> d_a;
    for (const auto& r : *results[i].trace) {
      if (r.t >= options.transient) d_a.push_back(r.d_ro);
    }
    ec.median = quantile(d_a, 0.5);
    ec.iqr = quantile(d_a, 0.75) - quantile(d_a, 0.25);
    ec.trace = std::move(*results[i].trace);
    report.cases.push_back(std::move(ec));
  }
  return report;
}

// --- Experiment 2 -------------------------------------------------------------

Vector3 path_midpoint(const SimConfig& base) {
  const Vector3 a = forward_kinematics(base.arm, base.initial_q).position;
  const auto& goals = base.goal_program.goals;
  const Vector3 b = goals.empty() ? a : goals.back().position;
  return 0.5 * (a + b);
}

ExpComparison run_exp2(const SimConfig& base, const Exp2Options& options) {
  const Vector3 hand = path_midpoint(base) + options.hand_offset;

  SimConfig static_arm = base;
  static_arm.agent.kind = AgentSpec::Kind::Static;
  static_arm.agent.position = hand;
  static_arm.haptics_enabled = false;

  SimConfig responsive_arm = base;
  responsive_arm.agent.kind = AgentSpec::Kind::Responsive;
  responsive_arm.agent.position = hand;
  responsive_arm.agent.waypoints.clear();
  responsive_arm.haptics_enabled = true;

  const std::vector<SimConfig> configs{without_obstacle(base), static_arm, responsive_arm};
  BatchOptions opts;
  opts.keep_traces = true;
  auto results = run_batch(configs, opts);
  for (std::size_t i = 1; i < results.size(); ++i) {
    apply_baseline(results[i], *results[0].trace, base.controller.d_at);
  }
  ExpComparison c = compare(results[0], results[1], results[2], true);
  c.seed = base.seed;
  return c;
}

std::vector<BatchResult> run_exp2_placements(const SimConfig& base, const Exp2Options& options,
                                             Execution execution) {
  std::mt19937_64 rng(mix_seed(options.placement_seed, 0));
  std::uniform_real_distribution<double> offset(-options.placement_halfwidth,
                                                options.placement_halfwidth);
  const Vector3 mid = path_midpoint(base) + options.hand_offset;
  std::vector<SimConfig> configs;
  configs.reserve(static_cast<std::size_t>(options.placements));
  for (int i = 0; i < options.placements; ++i) {
    SimConfig c = base;
    c.agent.kind = AgentSpec::Kind::Static;
    const double dx = offset(rng);
    const double dy = offset(rng);
    const double dz = offset(rng);
    c.agent.position = mid + Vector3(dx, dy, dz);
    c.haptics_enabled = false;
    c.seed = base.seed + static_cast<std::uint64_t>(i);
    configs.push_back(std::move(c));
  }
  BatchOptions opts;
  opts.execution = execution;
  return run_batch(configs, opts);
}

// --- Experiment 3 -------------------------------------------------------------

void ReachTask::validate() const {
  if (reach_points.empty()) throw ConfigError("reach task: at least one reach point required");
  if (!(travel_speed > 0.0)) throw ConfigError("reach task: travel_speed must be > 0");
  if (!(rest_min >= 0 && rest_min <= rest_max && dwell_min >= 0 && dwell_min <= dwell_max &&
        jitter >= 0 && start_delay >= 0)) {
    throw ConfigError("reach task: invalid timing parameters");
  }
}

std::vector<TimedPoint> ReachTask::schedule(double duration, std::uint64_t seed) const {
  validate();
  std::mt19937_64 rng(mix_seed(seed, 7));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  std::vector<TimedPoint> pts{{0.0, home}};
  double t = start_delay;
  pts.push_back({t, home});
  Vector3 at = home;
  const auto travel = [&](const Vector3& to) {
    t += std::max((to - at).norm() / travel_speed, 1e-3);
    pts.push_back({t, to});
    at = to;
  };
  while (t < duration) {
    const auto idx = static_cast<std::size_t>(unit(rng) * static_cast<double>(reach_points.size()));
    const Vector3 j(between(-jitter, jitter), between(-jitter, jitter), between(-jitter, jitter));
    travel(reach_points[std::min(idx, reach_points.size() - 1)] + j);
    t += between(dwell_min, dwell_max);
    pts.push_back({t, at});
    travel(home);
    t += between(rest_min, rest_max);
    pts.push_back({t, at});
  }
  return pts;
}

namespace {

std::vector<SimConfig> exp3_configs(const Exp3Setup& setup, std::uint64_t seed) {
  SimConfig with = setup.base;
  with.seed = seed;
  with.agent.kind = AgentSpec::Kind::Responsive;
  with.agent.waypoints = setup.task.schedule(setup.base.duration, seed);
  with.agent.position = setup.task.home;
  with.haptics_enabled = true;
  SimConfig without = with;
  without.haptics_enabled = false;
  return {without, with};
}

}  // namespace

ExpComparison run_exp3(const Exp3Setup& setup, std::uint64_t seed, bool keep_traces,
                       Execution execution) {
  auto configs = exp3_configs(setup, seed);
  configs.insert(configs.begin(), without_obstacle(configs.front()));
  BatchOptions opts;
  opts.execution = execution;
  opts.keep_traces = true;
  auto results = run_batch(configs, opts);
  for (std::size_t i = 1; i < results.size(); ++i) {
    apply_baseline(results[i], *results[0].trace, setup.base.controller.d_at);
  }
  ExpComparison c = compare(results[0], results[1], results[2], keep_traces);
  c.seed = seed;
  return c;
}

std::vector<ExpComparison> run_exp3_sweep(const Exp3Setup& setup,
                                          const std::vector<std::uint64_t>& seeds,
                                          Execution execution) {
  // The baseline is hand-free, so one run serves every seed.
  SimConfig base = setup.base;
  base.seed = seeds.empty() ? base.seed : seeds.front();
  const SimTrace baseline = run(without_obstacle(base));

  std::vector<SimConfig> configs;
  for (auto seed : seeds) {
    auto pair = exp3_configs(setup, seed);
    configs.insert(configs.end(), pair.begin(), pair.end());
  }
  BatchOptions opts;
  opts.execution = execution;
  opts.baseline = &baseline;
  const auto results = run_batch(configs, opts);

  BatchResult base_result;
  base_result.metrics = compute_metrics(baseline, nullptr, setup.base.controller.d_at);
  std::vector<ExpComparison> out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    ExpComparison c = compare(base_result, results[2 * i], results[2 * i + 1], false);
    c.seed = seeds[i];
    out.push_back(std::move(c));
  }
  return out;
}

// --- scenario files / reports ---------------------------------------------------

Scenario load_scenario(const std::string& path) {
  Scenario s;
  s.path = path;
  const Json j = read_json_file(path);
  s.config = sim_config_from_json(j, directory_of(path));
  if (j.contains("experiment")) s.experiment = j.at("experiment");
  return s;
}

Exp1Options exp1_options_from_json(const Json& j) {
  Exp1Options o;
  if (j.is_null()) return o;
  try {
    if (j.contains("d_sr_cases")) o.d_sr_cases = j.at("d_sr_cases").get<std::vector<double>>();
    o.transient = j.value("transient", o.transient);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
  if (o.d_sr_cases.empty()) throw ConfigError("experiment: d_sr_cases must not be empty");
  return o;
}

Exp2Options exp2_options_from_json(const Json& j) {
  Exp2Options o;
  if (j.is_null()) return o;
  try {
    if (j.contains("hand_offset")) o.hand_offset = vector3_from_json(j.at("hand_offset"));
    o.placements = j.value("placements", o.placements);
    o.placement_halfwidth = j.value("placement_halfwidth", o.placement_halfwidth);
    o.placement_seed = j.value("placement_seed", o.placement_seed);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
  return o;
}

ReachTask reach_task_from_json(const Json& j) {
  ReachTask t;
  try {
    const Json& r = j.at("reach_task");
    t.home = vector3_from_json(r.at("home"));
    for (const auto& p : r.at("reach_points")) t.reach_points.push_back(vector3_from_json(p));
    t.travel_speed = r.value("travel_speed", t.travel_speed);
    t.rest_min = r.value("rest_min", t.rest_min);
    t.rest_max = r.value("rest_max", t.rest_max);
    t.dwell_min = r.value("dwell_min", t.dwell_min);
    t.dwell_max = r.value("dwell_max", t.dwell_max);
    t.jitter = r.value("jitter", t.jitter);
    t.start_delay = r.value("start_delay", t.start_delay);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
  t.validate();
  return t;
}

Json to_json(const Exp1Report& r) {
  Json cases = Json::array();
  for (const auto& c : r.cases) {
    cases.push_back({{"d_sr", c.d_sr}, {"median_d_A", c.median}, {"iqr_d_A", c.iqr},
                     {"fixed_point", c.fixed_point}, {"samples", c.trace.size()}});
  }
  return {{"experiment", "exp1"},
          {"transient", r.options.transient},
          {"cases", cases},
          {"config", to_json(r.base)}};
}

Json to_json(const ExpComparison& c, const SimConfig& config) {
  return {{"seed", c.seed},
          {"without_haptics", to_json(c.without_haptics)},
          {"with_haptics", to_json(c.with_haptics)},
          {"baseline_path", c.baseline_path},
          {"deltas",
           {{"min_d_RO_gain", c.min_d_ro_gain},
            {"collision_path_reduction", c.collision_path_reduction},
            {"avoidance_time_reduction", c.avoidance_time_reduction}}},
          {"goal_error_without", c.goal_error_without},
          {"goal_error_with", c.goal_error_with},
          {"fault_without", c.fault_without},
          {"fault_with", c.fault_with},
          {"fault_time_without", c.fault_time_without},
          {"fault_time_with", c.fault_time_with},
          {"config", to_json(config)}};
}

}  // namespace cohaptics
