#include "cohaptics/apf_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cohaptics {
namespace {

constexpr double kMinDistance = 1e-9;
constexpr double kRestSpeed = 1e-9;
// sin(1e-6 rad): below this the velocity is treated as parallel to the normal.
constexpr double kParallelSin = 1e-6;

Vector3 clamp_norm(const Vector3& v, double max_norm) {
  const double n = v.norm();
  return n > max_norm ? Vector3(v * (max_norm / n)) : v;
}

double obstacle_distance(const Vector3& x_r, const Vector3& x_o) {
  const double d = (x_r - x_o).norm();
  if (!(d >= kMinDistance)) throw Collision(std::numeric_limits<double>::quiet_NaN());
  return d;
}

}  // namespace

void ControllerParams::validate() const {
  const auto fail = [](const char* msg) { throw ConfigError(std::string("controller: ") + msg); };
  if (!(k_pc1 >= 0 && k_pc2 >= 0 && tau >= 0 && rep_gain_normal >= 0 && rep_gain_tangent >= 0 &&
        damping >= 0 && orientation_gain >= 0)) {
    fail("gains must be >= 0");
  }
  if (!(0.0 < d_act && d_act < d_dct && d_dct <= d_at)) fail("requires 0 < d_act < d_dct <= d_at");
  if (!(theta_obs > 0.0 && theta_obs < kPi)) fail("theta_obs must lie in (0, pi)");
  if (!(v_max > 0.0)) fail("v_max must be > 0");
}

ControlMode select_mode(double d_ro, double theta_c, ControlMode prev_mode,
                        const ControllerParams& p) {
  if (d_ro < p.d_act) return ControlMode::FreeDrive;
  if (prev_mode == ControlMode::FreeDrive && d_ro <= p.d_dct) return ControlMode::FreeDrive;
  if (d_ro > p.d_at) return ControlMode::PositionControl;
  return theta_c < p.theta_obs ? ControlMode::CollisionI : ControlMode::CollisionII;
}

Vector3 position_task_velocity(const ControlInputs& in, const ControllerParams& p) {
  const Vector3 e = in.x_g - in.x_r;
  return in.xdot_g + p.k_pc1 * (p.k_pc2 * e).array().tanh().matrix();
}

JointVector position_control(const ControlInputs& in, const ControllerParams& p,
                             const Matrix6& jac, const JointVector& rate_limits,
                             const Vector3& angular) {
  Twist twist;
  twist << position_task_velocity(in, p), angular;
  return clamp_joint_rates(damped_inverse(jac, p.damping) * twist, rate_limits);
}

ObstacleClass classify_obstacle(const Vector3& v_tcp, const Vector3& x_r,
                                const Vector3& x_o, double theta_obs) {
  const double speed = v_tcp.norm();
  if (speed < kRestSpeed) return {ObstacleType::Type2, kPi};
  const Vector3 to_obstacle = x_o - x_r;
  const double dist = to_obstacle.norm();
  if (!(dist >= kMinDistance)) throw Collision(std::numeric_limits<double>::quiet_NaN());
  // atan2 of |cross| and dot stays accurate near 0 and pi.
  const double theta = std::atan2(v_tcp.cross(to_obstacle).norm(), v_tcp.dot(to_obstacle));
  return {theta < theta_obs ? ObstacleType::Type1 : ObstacleType::Type2, theta};
}

RepulsionFrame repulsion_frame(const Vector3& x_r, const Vector3& x_o, const Vector3& v_tcp) {
  const double d = obstacle_distance(x_r, x_o);
  RepulsionFrame f;
  f.normal = (x_r - x_o) / d;
  Vector3 lateral = v_tcp - v_tcp.dot(f.normal) * f.normal;
  const double speed = v_tcp.norm();
  if (speed < kRestSpeed || lateral.norm() < kParallelSin * speed) {
    // Head-on approach: world-up x n, or world-x x n when n is vertical.
    lateral = Vector3::UnitZ().cross(f.normal);
    if (lateral.norm() < kParallelSin) lateral = Vector3::UnitX().cross(f.normal);
  }
  f.tangent = lateral.normalized();
  f.binormal = f.normal.cross(f.tangent);
  return f;
}

Vector3 repulsive_velocity_I(const ControlInputs& in, const ControllerParams& p) {
  const RepulsionFrame f = repulsion_frame(in.x_r, in.x_o, in.v_tcp);
  const Vector3 e = in.x_g - in.x_r;
  const double e_norm = e.norm();
  const double side = e_norm > 1e-12 ? f.binormal.dot(e / e_norm) : 0.0;
  const Vector3 v = p.rep_gain_normal * f.normal + p.rep_gain_tangent * f.tangent +
                    p.rep_gain_tangent * side * f.binormal;
  return clamp_norm(v, p.v_max);
}

Vector3 repulsive_velocity_II(const ControlInputs& in, const ControllerParams& p) {
  const double d = obstacle_distance(in.x_r, in.x_o);
  return clamp_norm(p.rep_gain_normal * (in.x_r - in.x_o) / d, p.v_max);
}

Vector3 blend(const Vector3& v_pc, const Vector3& v_rep, double d_ro, double tau) {
  const double w = std::exp(-tau * d_ro);
  return v_pc * (1.0 - w) + v_rep * w;
}

Vector3 orientation_error(const Eigen::Quaterniond& current, const Eigen::Quaterniond& target) {
  Eigen::Quaterniond delta = target * current.conjugate();
  if (delta.w() < 0.0) delta.coeffs() = -delta.coeffs();
  const Eigen::AngleAxisd aa(delta);
  return aa.angle() * aa.axis();
}

ControlOutput control_step(const ControlInputs& in, const ControllerParams& p,
                           const ArmModel& model) {
  ControlOutput out;
  out.d_ro = obstacle_distance(in.x_r, in.x_o);
  out.theta_c = classify_obstacle(in.v_tcp, in.x_r, in.x_o, p.theta_obs).theta_c;
  out.mode = select_mode(out.d_ro, out.theta_c, in.prev_mode, p);

  switch (out.mode) {
    case ControlMode::FreeDrive:
      out.v_task.setZero();
      out.qdot.setZero();
      return out;
    case ControlMode::PositionControl:
      out.v_task = position_task_velocity(in, p);
      break;
    case ControlMode::CollisionI:
      out.v_task = blend(position_task_velocity(in, p), repulsive_velocity_I(in, p), out.d_ro, p.tau);
      break;
    case ControlMode::CollisionII:
      out.v_task = blend(position_task_velocity(in, p), repulsive_velocity_II(in, p), out.d_ro, p.tau);
      break;
  }

  Vector3 angular = Vector3::Zero();
  if (in.hold_orientation) {
    const Pose pose = forward_kinematics(model, in.q);
    angular = p.orientation_gain * orientation_error(pose.orientation, *in.hold_orientation);
  }
  Twist twist;
  twist << out.v_task, angular;
  out.qdot = clamp_joint_rates(damped_inverse(jacobian(model, in.q), p.damping) * twist,
                               model.joint_velocity_limits);
  return out;
}

}  // namespace cohaptics
