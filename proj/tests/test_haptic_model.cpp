#include <doctest.h>

#include <random>

#include "cohaptics/haptic_model.hpp"

using namespace cohaptics;

TEST_CASE("render window examples") {
  const HapticParams p;
  const auto far = render(0.45, ControlMode::PositionControl, p);
  CHECK(far.displacement == 0.0);
  CHECK(far.vib_left == 0.0);
  CHECK(far.vib_right == 0.0);
  CHECK(render(0.20, ControlMode::CollisionI, p).displacement == 0.075);
  CHECK(render(0.30, ControlMode::CollisionI, p).displacement == doctest::Approx(0.0375));
  CHECK(render(0.0, ControlMode::FreeDrive, p).displacement == 0.075);
}

TEST_CASE("mode to vibration table") {
  const HapticParams p;
  struct Row {
    ControlMode mode;
    double left, right;
  };
  const Row rows[] = {{ControlMode::PositionControl, 0.0, 0.0},
                      {ControlMode::CollisionI, 0.40, 0.0},
                      {ControlMode::CollisionII, 0.40, 0.0},
                      {ControlMode::FreeDrive, 0.70, 0.70}};
  for (const auto& r : rows) {
    for (double d : {0.0, 0.05, 0.2, 0.3, 0.4, 1.0}) {
      const auto c = render(d, r.mode, p);
      CHECK(c.vib_left == r.left);
      CHECK(c.vib_right == r.right);
      CHECK(c.mode == r.mode);
    }
  }
}

TEST_CASE("displacement is monotone and clamped") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const HapticParams p;
  const HapticParams one = HapticParams::one_sided(0.15);
  for (int k = 0; k < 10000; ++k) {
    const double a = d(rng), b = d(rng);
    const double lo = std::min(a, b), hi = std::max(a, b);
    for (const auto& params : {p, one}) {
      const double dl = render(lo, ControlMode::PositionControl, params).displacement;
      const double dh = render(hi, ControlMode::PositionControl, params).displacement;
      CHECK(dl >= dh);
      CHECK(dl <= 0.075);
      CHECK(dh >= 0.0);
    }
  }
}

TEST_CASE("one-sided rendering range") {
  const HapticParams p = HapticParams::one_sided(0.10);
  CHECK(p.render_far == 0.10);
  CHECK(p.render_near == 0.0);
  CHECK(render(0.10, ControlMode::PositionControl, p).displacement == 0.0);
  CHECK(render(0.05, ControlMode::PositionControl, p).displacement == doctest::Approx(0.0375));
  CHECK(render(0.0, ControlMode::PositionControl, p).displacement == doctest::Approx(0.075));
}

TEST_CASE("render is pure") {
  const HapticParams p;
  CHECK(render(0.27, ControlMode::CollisionII, p) == render(0.27, ControlMode::CollisionII, p));
}

TEST_CASE("device schedule holds within a tick") {
  const HapticParams p;
  DeviceSchedule s(p);
  HapticCommand a, b;
  a.displacement = 0.01;
  b.displacement = 0.02;
  CHECK(s.quantize(a, 0.000) == a);
  CHECK(s.quantize(b, 0.004) == a);  // step mid-tick
  CHECK(s.quantize(b, 0.0099) == a);
  CHECK(s.quantize(b, 0.010) == b);  // next boundary
  CHECK(s.quantize(a, 0.015) == b);
  CHECK(s.quantize(a, 0.020) == a);
  for (int k = 3; k < 100; ++k) CHECK(s.quantize(a, k * 0.01) == a);
}

TEST_CASE("device schedule lands on floating-point tick times") {
  DeviceSchedule s(HapticParams{});
  HapticCommand c;
  for (int k = 0; k < 1000; ++k) {
    c.displacement = k * 1e-5;
    CHECK(s.quantize(c, static_cast<double>(k) * 0.01).displacement == c.displacement);
  }
}

TEST_CASE("haptic parameter validation") {
  HapticParams p;
  CHECK_NOTHROW(p.validate());
  p.render_near = 0.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.vib_both = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
