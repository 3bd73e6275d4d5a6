#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cohaptics/sim_engine.hpp"

namespace cohaptics {

enum class Execution { Serial, Parallel };

struct BatchOptions {
  Execution execution = Execution::Parallel;
  bool keep_traces = false;
  // Obstacle-free reference for collision_path; shared by every item.
  const SimTrace* baseline = nullptr;
};

struct BatchResult {
  Metrics metrics;
  std::optional<SimTrace> trace;
  std::optional<std::string> fault;  // what() of a SimulationFault
  double fault_time = 0.0;
  double final_goal_error = 0.0;     // |x_R - last goal| at the end of the run
};

// Runs every config to completion. Faults are captured per item, never
// thrown. Parallel and serial execution produce bit-identical results.
std::vector<BatchResult> run_batch(std::span<const SimConfig> configs,
                                   const BatchOptions& options = {});

// Serial reference kept for testing the parallel path.
std::vector<BatchResult> run_batch_serial(std::span<const SimConfig> configs,
                                          const BatchOptions& options = {});

int batch_threads();

}  // namespace cohaptics
