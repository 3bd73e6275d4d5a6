#include "cohaptics/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace cohaptics {
namespace {

constexpr std::uint64_t kPerceptionStream = 1;
constexpr std::uint64_t kAgentStream = 2;

bool is_integer_ratio(double num, double den) {
  const double r = num / den;
  return std::abs(r - std::round(r)) < 1e-6;
}

}  // namespace

void SimConfig::validate() const {
  arm.validate();
  controller.validate();
  haptics.validate();
  perception.validate();
  if (!(control_period > 0.0)) throw ConfigError("sim: control_period must be > 0");
  if (!(duration > 0.0)) throw ConfigError("sim: duration must be > 0");
  if (!is_integer_ratio(duration, control_period)) {
    throw ConfigError("sim: control_period must divide duration");
  }
  if (!is_integer_ratio(control_period, perception.sample_period)) {
    throw ConfigError("sim: control_period must be a multiple of perception.sample_period");
  }
  for (int i = 0; i < 6; ++i) {
    if (!std::isfinite(initial_q[i]) || initial_q[i] < arm.joint_limits[i].min ||
        initial_q[i] > arm.joint_limits[i].max) {
      throw ConfigError("sim: initial_q[" + std::to_string(i) + "] outside its joint limits");
    }
  }
  if (!(goal_program.tolerance > 0.0)) throw ConfigError("sim: goal tolerance must be > 0");
  for (const auto& g : goal_program.goals) {
    if (!g.position.allFinite() || !(g.dwell >= 0.0)) {
      throw ConfigError("sim: goal positions must be finite and dwell >= 0");
    }
  }
  if (!agent.position.allFinite()) throw ConfigError("agent: position must be finite");
  switch (agent.kind) {
    case AgentSpec::Kind::Responsive:
      agent.responsive.validate();
      if (!agent.waypoints.empty()) {
        Trajectory task(agent.waypoints);
        (void)task;
      }
      break;
    case AgentSpec::Kind::Circling:
      agent.circling.validate();
      break;
    case AgentSpec::Kind::Scripted: {
      agent.responsive.validate();
      const Trajectory path(agent.waypoints);
      if (path.max_speed() > agent.responsive.hand_speed_max + 1e-12) {
        throw ConfigError("agent: scripted path exceeds hand_speed_max");
      }
      break;
    }
    default:
      break;
  }
}

std::int64_t SimConfig::tick_count() const {
  return static_cast<std::int64_t>(std::llround(duration / control_period));
}

Engine::Engine(SimConfig config)
    : config_(std::move(config)),
      perception_(config_.perception, mix_seed(config_.seed, kPerceptionStream)),
      device_(config_.haptics) {
  config_.validate();
  total_ticks_ = config_.tick_count();
  samples_per_tick_ =
      static_cast<std::int64_t>(std::llround(config_.control_period / config_.perception.sample_period));
  latency_ticks_ = static_cast<std::int64_t>(
      std::llround(config_.agent.responsive.reaction_latency / config_.control_period));
  haptics_enabled_ = config_.haptics_enabled;

  q_ = config_.initial_q;
  const Pose pose = forward_kinematics(config_.arm, q_);
  tcp_ = pose.position;
  start_orientation_ = pose.orientation;
  hold_goal_ = tcp_;

  agent_ = make_agent(config_.agent, mix_seed(config_.seed, kAgentStream));
  hand_prev_ = agent_->state().position;
}

Vector3 Engine::current_goal() const {
  const auto& goals = config_.goal_program.goals;
  if (goals.empty()) return hold_goal_;
  return goals[std::min<std::size_t>(goal_index_, goals.size() - 1)].position;
}

void Engine::override_hand(const Vector3& p) { agent_->teleport(p); }

void Engine::add_free_drive_drag(const Vector3& displacement) { pending_drag_ += displacement; }

StepRecord Engine::step() {
  const double dt = config_.control_period;
  const double t = time();
  const auto& goals = config_.goal_program.goals;

  // (1) Perception: every 2 ms sample in (t - dt, t], hand interpolated
  // linearly across the tick.
  const Vector3 hand_now = agent_->state().position;
  const std::int64_t last_idx = tick_ * samples_per_tick_;
  const std::int64_t first_idx = tick_ == 0 ? 0 : last_idx - samples_per_tick_ + 1;
  for (std::int64_t j = first_idx; j <= last_idx; ++j) {
    const double frac =
        tick_ == 0 ? 1.0 : static_cast<double>(j - (last_idx - samples_per_tick_)) / samples_per_tick_;
    const Vector3 p = hand_prev_ + frac * (hand_now - hand_prev_);
    last_sample_ = perception_.sample(p, static_cast<double>(j) * config_.perception.sample_period);
  }
  const Vector3 x_o = last_sample_.position;

  // Goal program bookkeeping.
  if (goal_index_ < static_cast<int>(goals.size())) {
    const auto& g = goals[goal_index_];
    if ((tcp_ - g.position).norm() <= config_.goal_program.tolerance) {
      if (!dwell_started_) dwell_started_ = t;
      if (t - *dwell_started_ >= g.dwell - 1e-9) {
        ++goal_index_;
        dwell_started_.reset();
      }
    }
  }
  const Vector3 goal = current_goal();

  // (2) Control.
  ControlOutput ctl;
  try {
    if (config_.robot_static) {
      ctl.d_ro = (tcp_ - x_o).norm();
      if (!(ctl.d_ro >= 1e-9)) throw Collision(t);
      ctl.mode = ControlMode::PositionControl;
    } else {
      ControlInputs in;
      in.x_r = tcp_;
      in.x_o = x_o;
      in.x_g = goal;
      in.v_tcp = v_tcp_;
      in.q = q_;
      in.prev_mode = mode_;
      if (config_.hold_orientation) in.hold_orientation = start_orientation_;
      ctl = control_step(in, config_.controller, config_.arm);
    }
  } catch (const Collision&) {
    throw Collision(t);
  }

  // (3) Haptic display.
  HapticCommand cmd;
  cmd.mode = ctl.mode;
  if (haptics_enabled_) {
    cmd = device_.quantize(render(ctl.d_ro, ctl.mode, config_.haptics), t);
  }

  // (4) Agent, driven by the stimulus issued latency_ticks ago.
  stimulus_queue_.push_back(haptics_enabled_ ? cmd : HapticCommand{});
  HapticCommand stimulus;
  if (static_cast<std::int64_t>(stimulus_queue_.size()) > latency_ticks_) {
    stimulus = stimulus_queue_.front();
    stimulus_queue_.pop_front();
  }
  AgentInput agent_in;
  agent_in.t = t;
  agent_in.dt = dt;
  agent_in.stimulus = stimulus;
  agent_in.x_r = tcp_;
  hand_prev_ = hand_now;
  const HandState hand_next = agent_->step(agent_in);

  // (5) Explicit Euler on the joints.
  JointVector q_next = q_ + ctl.qdot * dt;
  if (ctl.mode == ControlMode::FreeDrive && !pending_drag_.isZero()) {
    Twist twist;
    twist << pending_drag_, Vector3::Zero();
    q_next += damped_inverse(jacobian(config_.arm, q_), config_.controller.damping) * twist;
  }
  pending_drag_.setZero();
  q_next = config_.arm.clamp_to_limits(q_next);
  if (!q_next.allFinite() || !hand_next.position.allFinite() || !x_o.allFinite()) {
    throw NumericFault("non-finite simulation state", t);
  }

  StepRecord rec;
  rec.t = t;
  rec.q = q_;
  rec.x_r = tcp_;
  rec.x_o_true = hand_now;
  rec.x_o_perceived = x_o;
  rec.mode = ctl.mode;
  rec.d_ro = ctl.d_ro;
  rec.haptic = cmd;
  rec.v_task = ctl.v_task;
  rec.goal = goal;
  rec.goal_index = goal_index_;

  const Vector3 tcp_next = forward_kinematics(config_.arm, q_next).position;
  v_tcp_ = (tcp_next - tcp_) / dt;
  tcp_ = tcp_next;
  q_ = q_next;
  mode_ = ctl.mode;
  ++tick_;
  return rec;
}

SimTrace run(const SimConfig& config) {
  Engine engine(config);
  SimTrace trace;
  trace.reserve(static_cast<std::size_t>(config.tick_count()));
  while (!engine.finished()) trace.push_back(engine.step());
  return trace;
}

Metrics compute_metrics(const SimTrace& trace, const SimTrace* baseline, double d_at) {
  if (trace.empty()) throw EmptyTrace();
  Metrics m;
  m.min_d_ro = std::numeric_limits<double>::infinity();
  int samples = 0;
  int under = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    m.min_d_ro = std::min(m.min_d_ro, r.d_ro);
    if (i > 0) m.robot_path_length += (r.x_r - trace[i - 1].x_r).norm();
    // 10 Hz resampling: records whose time is a multiple of 0.1 s.
    const double tenths = r.t * 10.0;
    if (std::abs(tenths - std::round(tenths)) < 1e-6) {
      ++samples;
      if (r.d_ro < d_at) ++under;
    }
  }
  m.time_in_avoidance = 0.1 * under;
  m.pct_under_d_at = samples > 0 ? static_cast<double>(under) / samples : 0.0;

  const double dt = trace.size() > 1 ? trace[1].t - trace[0].t : 0.0;
  const int final_index = trace.back().goal_index;
  m.task_time = trace.back().t + dt;
  for (const auto& r : trace) {
    if (r.goal_index == final_index && final_index > 0) {
      m.task_time = r.t;
      break;
    }
  }

  if (baseline != nullptr && !baseline->empty()) {
    double base_path = 0.0;
    for (std::size_t i = 1; i < baseline->size(); ++i) {
      base_path += ((*baseline)[i].x_r - (*baseline)[i - 1].x_r).norm();
    }
    m.collision_path = std::max(0.0, m.robot_path_length - base_path);
  }
  return m;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << "t,q1,q2,q3,q4,q5,q6,xR_x,xR_y,xR_z,xO_true_x,xO_true_y,xO_true_z,"
         "xO_perc_x,xO_perc_y,xO_perc_z,mode,d_RO,hap_disp,vib_l,vib_r\n";
  fmt::memory_buffer buf;
  for (const auto& r : trace) {
    buf.clear();
    auto it = std::back_inserter(buf);
    fmt::format_to(it, "{}", r.t);
    for (int i = 0; i < 6; ++i) fmt::format_to(it, ",{}", r.q[i]);
    for (const Vector3* v : {&r.x_r, &r.x_o_true, &r.x_o_perceived}) {
      fmt::format_to(it, ",{},{},{}", v->x(), v->y(), v->z());
    }
    fmt::format_to(it, ",{},{},{},{},{}\n", to_string(r.mode), r.d_ro, r.haptic.displacement,
                   r.haptic.vib_left, r.haptic.vib_right);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

}  // namespace cohaptics
