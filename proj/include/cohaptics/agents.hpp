#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cohaptics/common.hpp"
#include "cohaptics/haptic_model.hpp"

namespace cohaptics {

struct HandState {
  Vector3 position = Vector3::Zero();
  Vector3 velocity = Vector3::Zero();
};

// What an agent sees when advanced from t to t + dt. The stimulus is already
// delayed by the engine.
struct AgentInput {
  double t = 0.0;
  double dt = 0.01;
  HapticCommand stimulus;
  Vector3 x_r = Vector3::Zero();
};

class Agent {
 public:
  virtual ~Agent() = default;

  virtual HandState state() const = 0;
  virtual HandState step(const AgentInput& in) = 0;
  // Places the hand at `p` at rest; used when live input hands control back.
  virtual void teleport(const Vector3& p) = 0;
  virtual std::unique_ptr<Agent> clone() const = 0;
};

struct TimedPoint {
  double t = 0.0;
  Vector3 position = Vector3::Zero();
};

// Piecewise-linear path through time-stamped points. Holds the first point
// before it and the last point after it.
class Trajectory {
 public:
  Trajectory() = default;
  // Throws NonMonotonicTime unless times strictly increase; throws
  // ConfigError when empty.
  explicit Trajectory(std::vector<TimedPoint> points);

  Vector3 position(double t) const;
  Vector3 velocity(double t) const;
  double max_speed() const;
  const std::vector<TimedPoint>& points() const { return points_; }

 private:
  std::size_t segment(double t) const;
  std::vector<TimedPoint> points_;
};

// Reads "t,x,y,z" rows; a header line is skipped when present.
std::vector<TimedPoint> load_waypoints_csv(const std::string& path);

class StaticHand final : public Agent {
 public:
  explicit StaticHand(const Vector3& p0) : state_{p0, Vector3::Zero()} {}
  HandState state() const override { return state_; }
  HandState step(const AgentInput&) override { return state_; }
  void teleport(const Vector3& p) override { state_ = {p, Vector3::Zero()}; }
  std::unique_ptr<Agent> clone() const override { return std::make_unique<StaticHand>(*this); }

 private:
  HandState state_;
};

class ScriptedHand final : public Agent {
 public:
  explicit ScriptedHand(std::vector<TimedPoint> waypoints);
  HandState state() const override { return state_; }
  HandState step(const AgentInput& in) override;
  void teleport(const Vector3& p) override;
  std::unique_ptr<Agent> clone() const override { return std::make_unique<ScriptedHand>(*this); }

  HandState at(double t) const;

 private:
  Trajectory path_;
  Vector3 offset_ = Vector3::Zero();
  double last_t_ = 0.0;
  HandState state_;
};

struct ResponsiveParams {
  double reaction_latency = 0.25;       // s
  double displacement_threshold = 0.005;  // m of contact-point travel
  double retreat_gain = 10.0;           // 1/s
  double hand_speed_max = 0.5;          // m/s
  double noise_std = 0.0;               // m, positional jitter
  std::uint64_t seed = 0;
  double decay_time = 0.1;              // s, relaxation back to the task motion
  double track_gain = 2.0;              // 1/s, pull toward the task path

  void validate() const;
};

// A hand that retreats from the TCP when the display signals proximity and
// otherwise follows its task motion (or holds still).
class ResponsiveHand final : public Agent {
 public:
  ResponsiveHand(const ResponsiveParams& params, const Vector3& p0,
                 std::optional<Trajectory> task = std::nullopt, std::uint64_t stream_seed = 0);

  HandState state() const override { return output_; }
  HandState step(const AgentInput& in) override;
  void teleport(const Vector3& p) override;
  std::unique_ptr<Agent> clone() const override { return std::make_unique<ResponsiveHand>(*this); }

 private:
  ResponsiveParams params_;
  std::optional<Trajectory> task_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  HandState nominal_;
  HandState output_;
};

struct CirclingParams {
  Vector3 center = Vector3::Zero();
  double target_displacement = 0.5;  // fraction of full travel to hold
  double initial_radius = 0.2;       // m
  double tangential_speed = 0.05;    // m/s
  double radial_gain = 0.05;         // m/s per unit of displacement-fraction error
  double perceptual_noise_std = 0.0; // fraction, stationary std of the bias
  double noise_time_constant = 1.5;  // s
  double hand_speed_max = 0.5;
  double max_travel = 0.075;
  std::uint64_t seed = 0;

  void validate() const;
};

// Blindfolded walker: circles the center and servos its radius so the felt
// contact-point displacement matches target_displacement. Distance is never
// observed directly, only through the stimulus.
class CirclingAgent final : public Agent {
 public:
  explicit CirclingAgent(const CirclingParams& params, std::uint64_t stream_seed = 0);

  HandState state() const override { return state_; }
  HandState step(const AgentInput& in) override;
  void teleport(const Vector3& p) override;
  std::unique_ptr<Agent> clone() const override { return std::make_unique<CirclingAgent>(*this); }

  // Radius where the felt displacement equals the target for a one-sided
  // rendering range d_sr.
  static double fixed_point(double d_sr, double target_displacement) {
    return d_sr * (1.0 - target_displacement);
  }

 private:
  CirclingParams params_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double radius_;
  double angle_ = 0.0;
  double bias_ = 0.0;
  HandState state_;
};

struct AgentSpec {
  enum class Kind { None, Static, Responsive, Circling, Scripted };
  Kind kind = Kind::None;
  Vector3 position = Vector3(100.0, 100.0, 100.0);  // p0 (None: parked far away)
  ResponsiveParams responsive;
  CirclingParams circling;
  std::vector<TimedPoint> waypoints;  // Scripted path, or Responsive task motion
};

std::string_view to_string(AgentSpec::Kind kind);
AgentSpec::Kind parse_agent_kind(std::string_view name);

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, std::uint64_t stream_seed);

}  // namespace cohaptics
