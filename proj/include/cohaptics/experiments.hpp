#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cohaptics/batch.hpp"
#include "cohaptics/config_io.hpp"
#include "cohaptics/sim_engine.hpp"

namespace cohaptics {

// --- Experiment 1: blindfolded circling around a static point -----------------

struct Exp1Options {
  std::vector<double> d_sr_cases{0.05, 0.10, 0.15, 0.20};
  double transient = 15.0;  // s discarded before computing statistics
};

struct Exp1Case {
  double d_sr = 0.0;
  double median = 0.0;  // of d_A over the steady part of the run
  double iqr = 0.0;
  double fixed_point = 0.0;  // servo fixed point d_sr * (1 - target)
  SimTrace trace;
};

struct Exp1Report {
  SimConfig base;
  Exp1Options options;
  std::vector<Exp1Case> cases;
};

Exp1Report run_exp1(const SimConfig& base, const Exp1Options& options = {},
                    Execution execution = Execution::Parallel);

// --- Experiments 2 and 3: with vs without haptic feedback ---------------------

struct ExpComparison {
  std::uint64_t seed = 0;
  Metrics without_haptics;
  Metrics with_haptics;
  double baseline_path = 0.0;
  double min_d_ro_gain = 0.0;             // with - without, m
  double collision_path_reduction = 0.0;  // 1 - with / without
  double avoidance_time_reduction = 0.0;  // 1 - with / without
  std::string fault_without;  // empty when the run finished cleanly
  std::string fault_with;
  double fault_time_without = 0.0;
  double fault_time_with = 0.0;
  double goal_error_without = 0.0;
  double goal_error_with = 0.0;
  SimTrace baseline;  // traces are only kept for single runs
  SimTrace trace_without;
  SimTrace trace_with;
};

struct Exp2Options {
  Vector3 hand_offset = Vector3::Zero();  // from the midpoint of the A->B path
  int placements = 200;
  double placement_halfwidth = 0.05;
  std::uint64_t placement_seed = 1;
};

// Hand location on the A->B path midpoint (A is the start TCP, B the last goal).
Vector3 path_midpoint(const SimConfig& base);

// Arm 1: static hand, display off. Arm 2: responsive hand, display on.
ExpComparison run_exp2(const SimConfig& base, const Exp2Options& options = {});

// Static hand at `placements` random offsets around the midpoint, display off.
std::vector<BatchResult> run_exp2_placements(const SimConfig& base, const Exp2Options& options,
                                             Execution execution = Execution::Parallel);

// Operator task motion for the collaborative experiment: rest at home, reach
// into the shared workspace, dwell, return.
struct ReachTask {
  Vector3 home = Vector3::Zero();
  std::vector<Vector3> reach_points;
  double travel_speed = 0.25;  // m/s
  double rest_min = 2.0, rest_max = 5.0;
  double dwell_min = 3.0, dwell_max = 6.0;
  double jitter = 0.03;        // m, uniform per-axis offset of each reach
  double start_delay = 1.0;

  void validate() const;
  // Seeded waypoint schedule covering [0, duration].
  std::vector<TimedPoint> schedule(double duration, std::uint64_t seed) const;
};

struct Exp3Setup {
  SimConfig base;  // goal program + responsive agent parameters
  ReachTask task;
};

// Baseline (no hand), display off, display on; hand schedule from `seed`.
ExpComparison run_exp3(const Exp3Setup& setup, std::uint64_t seed, bool keep_traces = true,
                       Execution execution = Execution::Parallel);

// One comparison per seed; all 2N+1 simulations go through one batch.
std::vector<ExpComparison> run_exp3_sweep(const Exp3Setup& setup,
                                          const std::vector<std::uint64_t>& seeds,
                                          Execution execution = Execution::Parallel);

// --- statistics / reports -----------------------------------------------------

// Linear-interpolated quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> values, double q);

struct Scenario {
  SimConfig config;
  Json experiment;  // the "experiment" section, may be null
  std::string path;
};

Scenario load_scenario(const std::string& path);
Exp1Options exp1_options_from_json(const Json& j);
Exp2Options exp2_options_from_json(const Json& j);
ReachTask reach_task_from_json(const Json& j);

Json to_json(const Exp1Report& r);
Json to_json(const ExpComparison& c, const SimConfig& config);

}  // namespace cohaptics
