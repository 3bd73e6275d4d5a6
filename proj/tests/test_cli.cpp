#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cohaptics/config_io.hpp"

using namespace cohaptics;
namespace fs = std::filesystem;

namespace {

const std::string kCli = COHAPTICS_CLI;
const std::string kScenarios = COHAPTICS_SCENARIOS;

int cli(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cohaptics_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(cli("") == 2);
  CHECK(cli("bogus") == 2);
  CHECK(cli("run") == 2);
  CHECK(cli("run --config /nonexistent.json") == 2);
  CHECK(cli("run --config " + kScenarios + "/run_default.json --haptics maybe") == 2);
  CHECK(cli("--help") == 0);
}

TEST_CASE("invalid configs exit with 3") {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "bad.json") << R"({"controller": {"d_act": 0.5}})";
  CHECK(cli("run --config " + (dir / "bad.json").string() + " --out " + dir.string()) == 3);
  CHECK(cli("validate --config " + (dir / "bad.json").string()) == 3);
}

TEST_CASE("validate reads stdin") {
  const int ok = std::system(("echo '{\"duration\": 2.0}' | " + kCli + " validate >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(ok) == 0);
  const int bad = std::system(("echo '{\"duration\": -1}' | " + kCli + " validate >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(bad) == 3);
}

TEST_CASE("a collision exits with 4") {
  const fs::path dir = scratch("fault");
  SimConfig c;
  JointVector q;
  q << -0.215972245203, -1.324131172471, 1.921041683091, -2.106104013283, -1.605706986515,
      -0.314896628329;
  c.initial_q = q;
  c.robot_static = true;
  c.perception.noise_std = 0.0;
  c.duration = 2.0;
  const Vector3 tcp = forward_kinematics(c.arm, q).position;
  c.agent.kind = AgentSpec::Kind::Scripted;
  c.agent.waypoints = {{0.0, tcp + Vector3(0.2, 0, 0)}, {1.0, tcp}};
  std::ofstream(dir / "crash.json") << to_json(c).dump(2);
  CHECK(cli("run --config " + (dir / "crash.json").string() + " --out " + dir.string()) == 4);
}

TEST_CASE("run writes trace and metrics, reproducibly") {
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const std::string cfg = " --config " + kScenarios + "/run_default.json --seed 7 --duration 5";
  REQUIRE(cli("run" + cfg + " --out " + a.string()) == 0);
  REQUIRE(cli("run" + cfg + " --out " + b.string() + " --plots") == 0);
  const std::string trace = slurp(a / "trace.csv");
  CHECK(trace == slurp(b / "trace.csv"));
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 501);
  CHECK(fs::exists(b / "distance.svg"));
  CHECK(fs::exists(b / "path.svg"));
  const Json m = Json::parse(slurp(a / "metrics.json"));
  CHECK(m.at("metrics").contains("min_d_RO"));
  CHECK(m.at("metrics").contains("collision_path"));
  CHECK(m.at("config").at("seed") == 7);

  const fs::path c = scratch("run_c");
  REQUIRE(cli("run" + cfg + " --out " + c.string() + " --haptics off") == 0);
  CHECK(slurp(c / "trace.csv") != trace);
}

TEST_CASE("exp2 writes its report") {
  const fs::path dir = scratch("exp2");
  REQUIRE(cli("exp2 --config " + kScenarios + "/exp2.json --out " + dir.string()) == 0);
  const Json r = Json::parse(slurp(dir / "exp2_report.json"));
  CHECK(r.contains("with_haptics"));
  CHECK(r.contains("without_haptics"));
  CHECK(r.at("placements").at("count") == 200);
  CHECK(r.at("placements").at("faults") == 0);
  for (const char* f : {"exp2_baseline.csv", "exp2_without_haptics.csv", "exp2_with_haptics.csv"}) {
    CHECK(fs::exists(dir / f));
  }
}

TEST_CASE("exp1 and exp3 write their reports") {
  const fs::path dir = scratch("exp13");
  REQUIRE(cli("exp1 --config " + kScenarios + "/exp1.json --duration 20 --out " + dir.string()) == 0);
  CHECK(Json::parse(slurp(dir / "exp1_report.json")).at("cases").size() == 4);
  CHECK(fs::exists(dir / "exp1_case4.csv"));
  REQUIRE(cli("exp3 --config " + kScenarios + "/exp3.json --duration 60 --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "exp3_report.json"));
}
