#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cohaptics/config_io.hpp"

using namespace cohaptics;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = COHAPTICS_SCENARIOS;

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "cohaptics_config_io";
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string trace_csv(const SimConfig& c) {
  std::ostringstream out;
  write_trace_csv(out, run(c));
  return out.str();
}

}  // namespace

TEST_CASE("every shipped scenario loads and validates") {
  for (const char* name : {"run_default.json", "exp1.json", "exp2.json", "exp3.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_sim_config(kScenarios + "/" + name));
  }
  CHECK_NOTHROW(load_arm_model(kScenarios + "/ur10.json"));
}

TEST_CASE("arm file equals the built-in model") {
  const ArmModel a = load_arm_model(kScenarios + "/ur10.json");
  const ArmModel b = ArmModel::ur10();
  JointVector q;
  q << 0.3, -1.1, 1.4, -1.8, -1.2, 0.2;
  CHECK((forward_kinematics(a, q).position - forward_kinematics(b, q).position).norm() < 1e-12);
}

TEST_CASE("config round trip reproduces the run") {
  SimConfig c = load_sim_config(kScenarios + "/run_default.json");
  c.duration = 3.0;
  c.perception.occlusion_windows = {{0.5, 0.8}};
  c.perception.frame_transform.translation() = Vector3(0.01, -0.02, 0.0);
  const Json j = to_json(c);
  const SimConfig back = sim_config_from_json(Json::parse(j.dump()));
  CHECK(to_json(back) == j);
  CHECK(trace_csv(back) == trace_csv(c));
}

TEST_CASE("component round trips") {
  ControllerParams p;
  p.tau = 9.0;
  CHECK(to_json(controller_from_json(to_json(p))) == to_json(p));
  HapticParams h = HapticParams::one_sided(0.15);
  CHECK(to_json(haptics_from_json(to_json(h))) == to_json(h));
  CHECK(haptics_from_json(Json{{"d_sr", 0.15}}).render_far == doctest::Approx(0.15));
  AgentSpec a;
  a.kind = AgentSpec::Kind::Circling;
  a.circling.center = Vector3(1, 2, 3);
  CHECK(to_json(agent_from_json(to_json(a))) == to_json(a));
}

TEST_CASE("isometry forms") {
  const Eigen::Isometry3d t = isometry_from_json(
      Json{{"translation", {1.0, 2.0, 3.0}}, {"rotation_rpy", {0.0, 0.0, kPi / 2}}});
  CHECK((t * Vector3::UnitX() - Vector3(1.0, 3.0, 3.0)).norm() < 1e-12);
  const Eigen::Isometry3d back = isometry_from_json(isometry_to_json(t));
  CHECK(back.isApprox(t, 1e-12));
  CHECK_THROWS_AS(isometry_from_json(Json{{"orientation_wxyz", {2.0, 0.0, 0.0, 0.0}}}), ConfigError);
}

TEST_CASE("relative file references resolve against the config directory") {
  const fs::path dir = scratch_dir();
  fs::copy_file(kScenarios + "/ur10.json", dir / "arm.json", fs::copy_options::overwrite_existing);
  write(dir / "hand.csv", "t,x,y,z\n0,-0.75,0.1,0.3\n2,-0.75,0.2,0.3\n");
  write(dir / "cfg.json", R"({
    // comments are accepted
    "arm": "arm.json",
    "duration": 2.0,
    "agent": {"kind": "scripted", "waypoints_csv": "hand.csv"}
  })");
  const SimConfig c = load_sim_config((dir / "cfg.json").string());
  REQUIRE(c.agent.waypoints.size() == 2);
  CHECK(c.agent.waypoints[1].position.y() == doctest::Approx(0.2));
}

TEST_CASE("invalid documents raise ConfigError") {
  const char* bad[] = {
      R"([])",
      R"({"duration": "long"})",
      R"({"duration": 1.005})",
      R"({"initial_q": [0, 0, 0]})",
      R"({"controller": {"d_act": 0.3}})",
      R"({"controller": {"tau": -1}})",
      R"({"haptics": {"render_near": 0.5}})",
      R"({"perception": {"noise_std": -0.1}})",
      R"({"agent": {"kind": "ghost"}})",
      R"({"agent": {"kind": "scripted", "waypoints": [[0, 0, 0, 0], [0, 1, 0, 0]]}})",
      R"({"agent": {"kind": "scripted", "waypoints": [[0, 0, 0]]}})",
      R"({"arm": {"dh_rows": []}})",
      R"({"goal_program": {"goals": [{"position": [1, 2]}]}})",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(sim_config_from_json(Json::parse(text)), ConfigError);
  }
}

TEST_CASE("file errors") {
  CHECK_THROWS_AS(load_sim_config("/nonexistent/cfg.json"), ConfigError);
  const fs::path p = scratch_dir() / "broken.json";
  write(p, "{\"duration\": ");
  CHECK_THROWS_AS(load_sim_config(p.string()), ConfigError);
  CHECK(directory_of("cfg.json") == ".");
  CHECK(directory_of("/a/b/cfg.json") == "/a/b");
}
