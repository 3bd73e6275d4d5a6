#include "cohaptics/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cohaptics/perception.hpp"

namespace cohaptics {
namespace {

Vector3 clamp_speed(const Vector3& v, double max_speed) {
  const double n = v.norm();
  return n > max_speed ? Vector3(v * (max_speed / n)) : v;
}

}  // namespace

// --- Trajectory -------------------------------------------------------------

Trajectory::Trajectory(std::vector<TimedPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw ConfigError("trajectory: at least one waypoint required");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].t > points_[i - 1].t)) {
      throw NonMonotonicTime("trajectory: waypoint times must strictly increase (index " +
                             std::to_string(i) + ")");
    }
  }
}

std::size_t Trajectory::segment(double t) const {
  // Index i such that points_[i].t <= t < points_[i + 1].t.
  const auto it = std::upper_bound(points_.begin(), points_.end(), t,
                                   [](double v, const TimedPoint& p) { return v < p.t; });
  return static_cast<std::size_t>(std::distance(points_.begin(), it)) - 1;
}

Vector3 Trajectory::position(double t) const {
  if (t <= points_.front().t) return points_.front().position;
  if (t >= points_.back().t) return points_.back().position;
  const std::size_t i = segment(t);
  const auto& a = points_[i];
  const auto& b = points_[i + 1];
  const double s = (t - a.t) / (b.t - a.t);
  return a.position + s * (b.position - a.position);
}

Vector3 Trajectory::velocity(double t) const {
  if (t < points_.front().t || t >= points_.back().t) return Vector3::Zero();
  const std::size_t i = segment(t);
  const auto& a = points_[i];
  const auto& b = points_[i + 1];
  return (b.position - a.position) / (b.t - a.t);
}

double Trajectory::max_speed() const {
  double v = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    v = std::max(v, (points_[i].position - points_[i - 1].position).norm() /
                        (points_[i].t - points_[i - 1].t));
  }
  return v;
}

std::vector<TimedPoint> load_waypoints_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("waypoints: cannot open '" + path + "'");
  std::vector<TimedPoint> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    TimedPoint p;
    if (!(row >> p.t >> p.position.x() >> p.position.y() >> p.position.z())) {
      if (line_no == 1) continue;  // header
      throw ConfigError("waypoints: malformed row " + std::to_string(line_no) + " in '" + path + "'");
    }
    out.push_back(p);
  }
  return out;
}

// --- ScriptedHand -----------------------------------------------------------

ScriptedHand::ScriptedHand(std::vector<TimedPoint> waypoints) : path_(std::move(waypoints)) {
  state_ = at(0.0);
}

HandState ScriptedHand::at(double t) const {
  return {path_.position(t) + offset_, path_.velocity(t)};
}

HandState ScriptedHand::step(const AgentInput& in) {
  state_ = at(in.t + in.dt);
  last_t_ = in.t + in.dt;
  return state_;
}

void ScriptedHand::teleport(const Vector3& p) {
  offset_ = p - path_.position(last_t_);
  state_ = {p, Vector3::Zero()};
}

// --- ResponsiveHand ---------------------------------------------------------

void ResponsiveParams::validate() const {
  if (!(reaction_latency >= 0 && displacement_threshold >= 0 && retreat_gain >= 0 &&
        noise_std >= 0 && decay_time >= 0 && track_gain >= 0)) {
    throw ConfigError("responsive agent: parameters must be >= 0");
  }
  if (!(hand_speed_max > 0)) throw ConfigError("responsive agent: hand_speed_max must be > 0");
}

ResponsiveHand::ResponsiveHand(const ResponsiveParams& params, const Vector3& p0,
                               std::optional<Trajectory> task, std::uint64_t stream_seed)
    : params_(params), task_(std::move(task)), rng_(mix_seed(params.seed, stream_seed)) {
  nominal_ = {task_ ? task_->position(0.0) : p0, Vector3::Zero()};
  output_ = nominal_;
}

HandState ResponsiveHand::step(const AgentInput& in) {
  const double disp = in.stimulus.displacement;
  Vector3 v;
  if (disp >= params_.displacement_threshold && disp > 0.0) {
    Vector3 away = nominal_.position - in.x_r;
    const double n = away.norm();
    away = n > 1e-12 ? Vector3(away / n) : Vector3::UnitZ();
    v = clamp_speed(params_.retreat_gain * disp * away, params_.hand_speed_max);
  } else {
    Vector3 target = Vector3::Zero();
    if (task_) {
      const double t_next = in.t + in.dt;
      target = task_->velocity(in.t) +
               params_.track_gain * (task_->position(t_next) - nominal_.position);
    }
    target = clamp_speed(target, params_.hand_speed_max);
    const double keep = params_.decay_time > 0.0 ? std::exp(-in.dt / params_.decay_time) : 0.0;
    v = target + keep * (nominal_.velocity - target);
  }
  nominal_.velocity = v;
  nominal_.position += v * in.dt;

  output_ = nominal_;
  if (params_.noise_std > 0.0) {
    output_.position += params_.noise_std * Vector3(normal_(rng_), normal_(rng_), normal_(rng_));
  }
  return output_;
}

void ResponsiveHand::teleport(const Vector3& p) {
  nominal_ = {p, Vector3::Zero()};
  output_ = nominal_;
}

// --- CirclingAgent ----------------------------------------------------------

void CirclingParams::validate() const {
  if (!(target_displacement > 0.0 && target_displacement < 1.0)) {
    throw ConfigError("circling agent: target_displacement must lie in (0, 1)");
  }
  if (!(initial_radius > 0 && tangential_speed >= 0 && radial_gain >= 0 &&
        perceptual_noise_std >= 0 && noise_time_constant > 0 && hand_speed_max > 0 &&
        max_travel > 0)) {
    throw ConfigError("circling agent: invalid parameters");
  }
}

CirclingAgent::CirclingAgent(const CirclingParams& params, std::uint64_t stream_seed)
    : params_(params), rng_(mix_seed(params.seed, stream_seed)), radius_(params.initial_radius) {
  state_.position = params_.center + Vector3(radius_, 0.0, 0.0);
}

HandState CirclingAgent::step(const AgentInput& in) {
  if (params_.perceptual_noise_std > 0.0) {
    const double a = std::exp(-in.dt / params_.noise_time_constant);
    bias_ = a * bias_ + params_.perceptual_noise_std * std::sqrt(1.0 - a * a) * normal_(rng_);
  }
  const double felt = in.stimulus.displacement / params_.max_travel + bias_;
  double v_r = params_.radial_gain * (felt - params_.target_displacement);
  double v_t = params_.tangential_speed;
  const double speed = std::hypot(v_r, v_t);
  if (speed > params_.hand_speed_max) {
    v_r *= params_.hand_speed_max / speed;
    v_t *= params_.hand_speed_max / speed;
  }
  const double r0 = radius_;
  radius_ = std::max(r0 + v_r * in.dt, 1e-3);
  // Exact rotation about the center keeps the radius free of Euler drift.
  angle_ += v_t * in.dt / (0.5 * (r0 + radius_));

  const Vector3 radial(std::cos(angle_), std::sin(angle_), 0.0);
  const Vector3 tangential(-std::sin(angle_), std::cos(angle_), 0.0);
  state_.position = params_.center + radius_ * radial;
  state_.velocity = v_r * radial + v_t * tangential;
  return state_;
}

void CirclingAgent::teleport(const Vector3& p) {
  const Vector3 rel = p - params_.center;
  radius_ = std::max(std::hypot(rel.x(), rel.y()), 1e-3);
  angle_ = std::atan2(rel.y(), rel.x());
  state_ = {params_.center + Vector3(radius_ * std::cos(angle_), radius_ * std::sin(angle_), 0.0),
            Vector3::Zero()};
}

// --- Factory ----------------------------------------------------------------

std::string_view to_string(AgentSpec::Kind kind) {
  switch (kind) {
    case AgentSpec::Kind::None: return "none";
    case AgentSpec::Kind::Static: return "static";
    case AgentSpec::Kind::Responsive: return "responsive";
    case AgentSpec::Kind::Circling: return "circling";
    case AgentSpec::Kind::Scripted: return "scripted";
  }
  return "unknown";
}

AgentSpec::Kind parse_agent_kind(std::string_view name) {
  for (auto k : {AgentSpec::Kind::None, AgentSpec::Kind::Static, AgentSpec::Kind::Responsive,
                 AgentSpec::Kind::Circling, AgentSpec::Kind::Scripted}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown agent kind '" + std::string(name) + "'");
}

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, std::uint64_t stream_seed) {
  switch (spec.kind) {
    case AgentSpec::Kind::None:
    case AgentSpec::Kind::Static:
      return std::make_unique<StaticHand>(spec.position);
    case AgentSpec::Kind::Responsive: {
      spec.responsive.validate();
      std::optional<Trajectory> task;
      if (!spec.waypoints.empty()) task.emplace(spec.waypoints);
      return std::make_unique<ResponsiveHand>(spec.responsive, spec.position, std::move(task),
                                              stream_seed);
    }
    case AgentSpec::Kind::Circling:
      spec.circling.validate();
      return std::make_unique<CirclingAgent>(spec.circling, stream_seed);
    case AgentSpec::Kind::Scripted:
      return std::make_unique<ScriptedHand>(spec.waypoints);
  }
  throw ConfigError("unknown agent kind");
}

}  // namespace cohaptics
