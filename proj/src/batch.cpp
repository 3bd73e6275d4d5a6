#include "cohaptics/batch.hpp"

#include <omp.h>

namespace cohaptics {
namespace {

BatchResult run_one(const SimConfig& config, const BatchOptions& options) {
  BatchResult result;
  Engine engine(config);
  SimTrace trace;
  trace.reserve(static_cast<std::size_t>(config.tick_count()));
  try {
    while (!engine.finished()) trace.push_back(engine.step());
  } catch (const SimulationFault& fault) {
    result.fault = fault.what();
    result.fault_time = fault.time();
  }
  if (!trace.empty()) {
    result.metrics = compute_metrics(trace, options.baseline, config.controller.d_at);
    const auto& goals = config.goal_program.goals;
    const Vector3 goal = goals.empty() ? trace.front().x_r : goals.back().position;
    result.final_goal_error = (engine.tcp() - goal).norm();
  }
  if (options.keep_traces) result.trace = std::move(trace);
  return result;
}

}  // namespace

std::vector<BatchResult> run_batch_serial(std::span<const SimConfig> configs,
                                          const BatchOptions& options) {
  std::vector<BatchResult> out;
  out.reserve(configs.size());
  for (const auto& c : configs) out.push_back(run_one(c, options));
  return out;
}

std::vector<BatchResult> run_batch(std::span<const SimConfig> configs,
                                   const BatchOptions& options) {
  if (options.execution == Execution::Serial) return run_batch_serial(configs, options);

  // Config errors are raised up front; they must not escape the parallel region.
  for (const auto& c : configs) c.validate();

  std::vector<BatchResult> out(configs.size());
  const auto n = static_cast<std::int64_t>(configs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = run_one(configs[static_cast<std::size_t>(i)], options);
  }
  return out;
}

int batch_threads() { return omp_get_max_threads(); }

}  // namespace cohaptics
