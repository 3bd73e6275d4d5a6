#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "cohaptics/agents.hpp"
#include "cohaptics/apf_control.hpp"
#include "cohaptics/haptic_model.hpp"
#include "cohaptics/kinematics.hpp"
#include "cohaptics/perception.hpp"

namespace cohaptics {

struct GoalWaypoint {
  Vector3 position = Vector3::Zero();
  double dwell = 0.0;  // s to stay once reached before moving on
};

// Goals are visited in order; a goal counts as reached within `tolerance`.
// After the last one the robot holds it. An empty program holds the start.
struct GoalProgram {
  std::vector<GoalWaypoint> goals;
  double tolerance = 0.005;
};

struct SimConfig {
  ArmModel arm = ArmModel::ur10();
  JointVector initial_q = JointVector::Zero();
  ControllerParams controller;
  HapticParams haptics;
  bool haptics_enabled = true;
  AgentSpec agent;
  PerceptionParams perception;
  GoalProgram goal_program;
  double duration = 10.0;
  double control_period = 0.01;
  std::uint64_t seed = 0;
  // Robot held in place (controller bypassed); used when the TCP only
  // emulates a static point.
  bool robot_static = false;
  // Hold the start orientation with the weak angular term.
  bool hold_orientation = true;

  void validate() const;
  std::int64_t tick_count() const;
};

struct StepRecord {
  double t = 0.0;
  JointVector q = JointVector::Zero();
  Vector3 x_r = Vector3::Zero();
  Vector3 x_o_true = Vector3::Zero();
  Vector3 x_o_perceived = Vector3::Zero();
  ControlMode mode = ControlMode::PositionControl;
  double d_ro = 0.0;  // controller's view: |x_r - x_o_perceived|
  HapticCommand haptic;
  Vector3 v_task = Vector3::Zero();
  Vector3 goal = Vector3::Zero();
  int goal_index = 0;  // == number of goals once the program is complete
};

using SimTrace = std::vector<StepRecord>;

struct Metrics {
  double min_d_ro = 0.0;
  double time_in_avoidance = 0.0;  // s below d_at, 10 Hz resampling
  double pct_under_d_at = 0.0;     // fraction of 10 Hz samples below d_at
  double robot_path_length = 0.0;
  double collision_path = 0.0;     // path minus baseline path, floored at 0
  double task_time = 0.0;          // s until the goal program completed
};

// Throws EmptyTrace.
Metrics compute_metrics(const SimTrace& trace, const SimTrace* baseline, double d_at);

// Fixed-step world: perception -> control -> haptics -> agent -> Euler.
class Engine {
 public:
  explicit Engine(SimConfig config);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;
  Engine(Engine&&) = default;
  Engine& operator=(Engine&&) = default;

  // Advances one control tick. Throws Collision / NumericFault carrying t.
  StepRecord step();

  bool finished() const { return tick_ >= total_ticks_; }
  std::int64_t tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * config_.control_period; }
  const SimConfig& config() const { return config_; }

  const JointVector& q() const { return q_; }
  const Vector3& tcp() const { return tcp_; }
  HandState hand() const { return agent_->state(); }
  ControlMode mode() const { return mode_; }
  Vector3 current_goal() const;
  int goal_index() const { return goal_index_; }
  bool haptics_enabled() const { return haptics_enabled_; }

  // Places the hand at `p` for the coming tick (live input).
  void override_hand(const Vector3& p);
  void set_haptics_enabled(bool on) { haptics_enabled_ = on; }
  // TCP displacement applied on the next tick if the robot is in free drive.
  void add_free_drive_drag(const Vector3& displacement);

 private:
  SimConfig config_;
  std::int64_t total_ticks_ = 0;
  std::int64_t tick_ = 0;
  std::int64_t samples_per_tick_ = 5;
  std::int64_t latency_ticks_ = 0;

  JointVector q_;
  Vector3 tcp_;
  Vector3 v_tcp_ = Vector3::Zero();
  Eigen::Quaterniond start_orientation_;
  ControlMode mode_ = ControlMode::PositionControl;

  std::unique_ptr<Agent> agent_;
  Vector3 hand_prev_;
  PerceptionChannel perception_;
  PerceptionSample last_sample_;
  DeviceSchedule device_;
  std::deque<HapticCommand> stimulus_queue_;
  bool haptics_enabled_ = true;

  int goal_index_ = 0;
  std::optional<double> dwell_started_;
  Vector3 hold_goal_;
  Vector3 pending_drag_ = Vector3::Zero();
};

// Runs config.duration / config.control_period ticks.
SimTrace run(const SimConfig& config);

// CSV columns: t,q1..q6,xR_x,xR_y,xR_z,xO_true_x,xO_true_y,xO_true_z,
// xO_perc_x,xO_perc_y,xO_perc_z,mode,d_RO,hap_disp,vib_l,vib_r
void write_trace_csv(std::ostream& out, const SimTrace& trace);

}  // namespace cohaptics
