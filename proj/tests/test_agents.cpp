#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cohaptics/agents.hpp"
#include "cohaptics/haptic_model.hpp"

using namespace cohaptics;

namespace {

AgentInput input(double t, double disp = 0.0, Vector3 x_r = Vector3::Zero()) {
  AgentInput in;
  in.t = t;
  in.dt = 0.01;
  in.stimulus.displacement = disp;
  in.x_r = x_r;
  return in;
}

}  // namespace

TEST_CASE("static hand ignores everything") {
  StaticHand a({0.1, 0.2, 0.3}), b({0.1, 0.2, 0.3});
  for (int k = 0; k < 100; ++k) {
    const auto s = a.step(input(0.01 * k, 0.075));
    CHECK(s.position == Vector3(0.1, 0.2, 0.3));
    CHECK(s.velocity.isZero(0.0));
    CHECK(b.step(input(0.01 * k)).position == s.position);
  }
}

TEST_CASE("trajectory interpolation") {
  SUBCASE("single waypoint") {
    const Trajectory t({{0.0, {1, 2, 3}}});
    CHECK(t.position(-1.0) == Vector3(1, 2, 3));
    CHECK(t.position(5.0) == Vector3(1, 2, 3));
    CHECK(t.velocity(5.0).isZero(0.0));
  }
  SUBCASE("midpoint and clamping") {
    const Vector3 a(0, 0, 0), b(1, 2, 0);
    const Trajectory t({{0.0, a}, {1.0, b}});
    CHECK(t.position(0.5) == 0.5 * (a + b));
    CHECK(t.velocity(0.5) == b - a);
    CHECK(t.position(3.0) == b);
    CHECK(t.velocity(3.0).isZero(0.0));
    CHECK(t.max_speed() == doctest::Approx(std::sqrt(5.0)));
  }
  SUBCASE("non-monotonic times") {
    CHECK_THROWS_AS(Trajectory({{0.0, {}}, {1.0, {}}, {1.0, {}}}), NonMonotonicTime);
    CHECK_THROWS_AS(Trajectory({{1.0, {}}, {0.5, {}}}), NonMonotonicTime);
    CHECK_THROWS_AS(Trajectory(std::vector<TimedPoint>{}), ConfigError);
  }
}

TEST_CASE("scripted hand follows the path") {
  ScriptedHand h({{0.0, {0, 0, 0}}, {1.0, {0.1, 0, 0}}});
  HandState s;
  for (int k = 0; k < 50; ++k) s = h.step(input(0.01 * k));
  CHECK(s.position.x() == doctest::Approx(0.05));
  CHECK(s.velocity.x() == doctest::Approx(0.1));
  h.teleport({0, 1, 0});
  s = h.step(input(0.5));
  CHECK(s.position.y() == doctest::Approx(1.0));
  CHECK(s.position.x() == doctest::Approx(0.001));
}

TEST_CASE("waypoints from CSV") {
  const auto path = std::filesystem::temp_directory_path() / "cohaptics_waypoints.csv";
  {
    std::ofstream out(path);
    out << "t,x,y,z\n0,0,0,0\n1,0.1,0,0\n";
  }
  const auto pts = load_waypoints_csv(path.string());
  REQUIRE(pts.size() == 2);
  CHECK(pts[1].position.x() == 0.1);
  {
    std::ofstream out(path);
    out << "0,0,0,0\n1,oops\n";
  }
  CHECK_THROWS_AS(load_waypoints_csv(path.string()), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("responsive hand holds still without stimulus") {
  ResponsiveHand h(ResponsiveParams{}, {0.5, 0, 0.3});
  for (int k = 0; k < 100; ++k) CHECK(h.step(input(0.01 * k, 0.004)).position == Vector3(0.5, 0, 0.3));
}

TEST_CASE("responsive hand retreats at the closed-form speed") {
  ResponsiveParams p;
  const Vector3 x_r(0, 0, 0.3), p0(0.3, 0, 0.3);
  ResponsiveHand h(p, p0);
  Vector3 prev = p0;
  for (int k = 0; k < 50; ++k) {
    const auto s = h.step(input(0.01 * k, 0.075, x_r));
    const double expected = std::min(p.retreat_gain * 0.075, p.hand_speed_max);
    CHECK(s.velocity.norm() == doctest::Approx(expected));
    CHECK(s.velocity.normalized().isApprox(Vector3::UnitX()));
    CHECK((s.position - prev).norm() == doctest::Approx(expected * 0.01));
    prev = s.position;
  }
  p.retreat_gain = 2.0;
  ResponsiveHand slow(p, p0);
  CHECK(slow.step(input(0.0, 0.075, x_r)).velocity.norm() == doctest::Approx(0.15));
}

TEST_CASE("responsive hand relaxes back to its task motion") {
  ResponsiveParams p;
  const Trajectory task({{0.0, {0, 0, 0}}, {10.0, {1, 0, 0}}});
  ResponsiveHand h(p, Vector3::Zero(), task);
  HandState s;
  for (int k = 0; k < 300; ++k) s = h.step(input(0.01 * k));
  CHECK((s.position - task.position(3.0)).norm() < 1e-3);
  for (int k = 300; k < 320; ++k) s = h.step(input(0.01 * k, 0.075, {0.3, 0.1, 0}));
  const double off = (s.position - task.position(3.2)).norm();
  CHECK(off > 0.05);
  for (int k = 320; k < 800; ++k) s = h.step(input(0.01 * k));
  CHECK((s.position - task.position(8.0)).norm() < 1e-3);
}

TEST_CASE("agents are deterministic under a seed and respect the speed cap") {
  ResponsiveParams p;
  p.noise_std = 0.002;
  p.seed = 5;
  ResponsiveHand a(p, Vector3::Zero(), std::nullopt, 3), b(p, Vector3::Zero(), std::nullopt, 3);
  CirclingParams cp;
  cp.perceptual_noise_std = 0.1;
  cp.seed = 5;
  CirclingAgent c(cp, 4), d(cp, 4);
  for (int k = 0; k < 500; ++k) {
    const double disp = (k / 50) % 2 ? 0.06 : 0.0;
    const auto sa = a.step(input(0.01 * k, disp, {0.1, 0.1, 0}));
    CHECK(sa.position == b.step(input(0.01 * k, disp, {0.1, 0.1, 0})).position);
    CHECK(sa.velocity.norm() <= p.hand_speed_max + 1e-12);
    const auto sc = c.step(input(0.01 * k, disp));
    CHECK(sc.position == d.step(input(0.01 * k, disp)).position);
    CHECK(sc.velocity.norm() <= cp.hand_speed_max + 1e-12);
  }
}

TEST_CASE("circling agent settles at the servo fixed point") {
  for (double d_sr : {0.05, 0.10, 0.15, 0.20}) {
    CirclingParams p;
    p.center = Vector3(0.2, -0.1, 0.3);
    p.initial_radius = d_sr;
    CirclingAgent a(p);
    const HapticParams hp = HapticParams::one_sided(d_sr);
    HandState s = a.state();
    for (int k = 0; k < 3000; ++k) {
      const double d = (s.position - p.center).norm();
      s = a.step(input(0.01 * k, render(d, ControlMode::PositionControl, hp).displacement));
    }
    const double expected = CirclingAgent::fixed_point(d_sr, p.target_displacement);
    CHECK((s.position - p.center).norm() == doctest::Approx(expected).epsilon(0.02));
    CHECK(s.position.z() == p.center.z());
  }
  CHECK(CirclingAgent::fixed_point(0.20, 0.5) == doctest::Approx(0.10));
}

TEST_CASE("agent factory") {
  AgentSpec spec;
  CHECK(make_agent(spec, 0)->state().position == Vector3(100, 100, 100));
  spec.kind = AgentSpec::Kind::Scripted;
  CHECK_THROWS_AS(make_agent(spec, 0), ConfigError);
  spec.waypoints = {{0.0, {1, 0, 0}}};
  CHECK(make_agent(spec, 0)->state().position == Vector3(1, 0, 0));
  for (auto k : {AgentSpec::Kind::None, AgentSpec::Kind::Static, AgentSpec::Kind::Responsive,
                 AgentSpec::Kind::Circling, AgentSpec::Kind::Scripted}) {
    CHECK(parse_agent_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_agent_kind("robot"), ConfigError);
}

TEST_CASE("clones evolve independently") {
  ResponsiveHand h(ResponsiveParams{}, Vector3::Zero());
  auto c = h.clone();
  h.step(input(0.0, 0.075, {0.1, 0, 0}));
  CHECK(c->state().position == Vector3::Zero());
  CHECK(h.state().position != Vector3::Zero());
}
