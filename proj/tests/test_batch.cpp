#include <doctest.h>

#include <sstream>

#include "cohaptics/batch.hpp"
#include "cohaptics/config_io.hpp"

using namespace cohaptics;

namespace {

std::vector<SimConfig> configs() {
  SimConfig base = load_sim_config(std::string(COHAPTICS_SCENARIOS) + "/run_default.json");
  base.duration = 8.0;
  std::vector<SimConfig> out;
  for (int i = 0; i < 8; ++i) {
    SimConfig c = base;
    c.seed = 100 + i;
    c.agent.kind = i % 2 ? AgentSpec::Kind::Static : AgentSpec::Kind::Responsive;
    c.agent.position.y() += 0.01 * i;
    out.push_back(c);
  }
  // A run that faults.
  SimConfig crash = base;
  crash.robot_static = true;
  crash.perception.noise_std = 0.0;
  const Vector3 tcp = forward_kinematics(crash.arm, crash.initial_q).position;
  crash.agent.kind = AgentSpec::Kind::Scripted;
  crash.agent.waypoints = {{0.0, tcp + Vector3(0.2, 0, 0)}, {1.0, tcp}};
  out.push_back(crash);
  return out;
}

std::string csv(const SimTrace& t) {
  std::ostringstream out;
  write_trace_csv(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("parallel batch is bit-identical to the serial reference") {
  const auto cfgs = configs();
  BatchOptions opts;
  opts.keep_traces = true;
  const auto par = run_batch(cfgs, opts);
  const auto ser = run_batch_serial(cfgs, opts);
  REQUIRE(par.size() == cfgs.size());
  REQUIRE(ser.size() == cfgs.size());
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    CAPTURE(i);
    CHECK(par[i].fault == ser[i].fault);
    CHECK(par[i].fault_time == ser[i].fault_time);
    CHECK(par[i].final_goal_error == ser[i].final_goal_error);
    CHECK(to_json(par[i].metrics) == to_json(ser[i].metrics));
    REQUIRE(par[i].trace.has_value());
    CHECK(csv(*par[i].trace) == csv(*ser[i].trace));
  }
}

TEST_CASE("batch items equal standalone runs") {
  const auto cfgs = configs();
  const auto res = run_batch(std::span(cfgs).first(3), {Execution::Parallel, true, nullptr});
  for (std::size_t i = 0; i < 3; ++i) CHECK(csv(*res[i].trace) == csv(run(cfgs[i])));
}

TEST_CASE("faults are captured, not thrown") {
  const auto cfgs = configs();
  const auto res = run_batch(cfgs);
  const auto& last = res.back();
  REQUIRE(last.fault.has_value());
  CHECK(last.fault->find("collision") != std::string::npos);
  CHECK(last.fault_time == doctest::Approx(1.0));
  for (std::size_t i = 0; i + 1 < res.size(); ++i) {
    CHECK_FALSE(res[i].fault.has_value());
    CHECK_FALSE(res[i].trace.has_value());
  }
}

TEST_CASE("shared baseline feeds collision path") {
  auto cfgs = configs();
  cfgs.pop_back();
  SimConfig free = cfgs[0];
  free.agent = AgentSpec{};
  const SimTrace base = run(free);
  BatchOptions opts;
  opts.baseline = &base;
  for (const auto& r : run_batch(cfgs, opts)) {
    CHECK(r.metrics.collision_path >= 0.0);
  }
  const auto same = run_batch(std::span(&free, 1), opts);
  CHECK(same[0].metrics.collision_path == 0.0);
}

TEST_CASE("thread count and empty batch") {
  CHECK(batch_threads() >= 1);
  CHECK(run_batch({}).empty());
}
