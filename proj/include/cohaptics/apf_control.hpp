#pragma once

#include <optional>

#include "cohaptics/common.hpp"
#include "cohaptics/kinematics.hpp"

namespace cohaptics {

// Gains and thresholds of the potential-field controller. Distances in m,
// angles in rad, velocities in m/s.
struct ControllerParams {
  double k_pc1 = 0.05;   // m/s, saturation speed of the attractive term
  double k_pc2 = 10.0;   // 1/m, slope of the attractive term
  double tau = 12.0;     // 1/m, attenuation of the repulsive blend
  double d_at = 0.30;    // avoidance threshold
  double d_act = 0.10;   // free-drive activation
  double d_dct = 0.20;   // free-drive deactivation
  double theta_obs = kPi / 2;
  double v_max = 0.2;    // clamp on the repulsive velocity
  double rep_gain_normal = 0.25;
  double rep_gain_tangent = 0.10;
  double damping = 0.01;           // lambda of the damped inverse
  double orientation_gain = 0.1;   // 1/s, weak orientation hold

  // Throws ConfigError if an invariant is violated.
  void validate() const;
};

struct ControlInputs {
  Vector3 x_r = Vector3::Zero();     // TCP position
  Vector3 x_o = Vector3::Zero();     // obstacle (hand) position
  Vector3 x_g = Vector3::Zero();     // goal
  Vector3 xdot_g = Vector3::Zero();  // goal feedforward
  Vector3 v_tcp = Vector3::Zero();   // current TCP velocity
  JointVector q = JointVector::Zero();
  ControlMode prev_mode = ControlMode::PositionControl;
  // When set, a weak angular term pulls the TCP orientation toward it.
  std::optional<Eigen::Quaterniond> hold_orientation;
};

struct ControlOutput {
  JointVector qdot = JointVector::Zero();
  ControlMode mode = ControlMode::PositionControl;
  double d_ro = 0.0;
  double theta_c = 0.0;
  Vector3 v_task = Vector3::Zero();  // task velocity before the inverse map
};

enum class ObstacleType { Type1, Type2 };

struct ObstacleClass {
  ObstacleType type = ObstacleType::Type2;
  double theta_c = kPi;
};

// Behavior tree: free drive (with d_dct hysteresis), then far field, then
// approaching vs receding obstacle.
ControlMode select_mode(double d_ro, double theta_c, ControlMode prev_mode,
                        const ControllerParams& p);

// Attractive task velocity xdot_G + k_pc1 * tanh(k_pc2 * e), e = x_G - x_R.
Vector3 position_task_velocity(const ControlInputs& in, const ControllerParams& p);

// Joint rates of the position controller for Jacobian `jac`, clamped to
// `rate_limits`. `angular` is the angular-velocity task (zero by default).
JointVector position_control(const ControlInputs& in, const ControllerParams& p,
                             const Matrix6& jac, const JointVector& rate_limits,
                             const Vector3& angular = Vector3::Zero());

// theta_c is the angle between v_tcp and (x_o - x_r). A robot at rest
// (|v_tcp| < 1e-9) is reported as Type2 with theta_c = pi.
ObstacleClass classify_obstacle(const Vector3& v_tcp, const Vector3& x_r,
                                const Vector3& x_o, double theta_obs);

// Steering frame used by the type-1 repulsion.
struct RepulsionFrame {
  Vector3 normal;     // (x_r - x_o) / d_ro
  Vector3 tangent;    // part of v_tcp orthogonal to normal, normalized
  Vector3 binormal;   // normal x tangent
};

// Throws Collision when x_r == x_o.
RepulsionFrame repulsion_frame(const Vector3& x_r, const Vector3& x_o, const Vector3& v_tcp);

// Type-1 repulsion: rep_gain_normal * n + rep_gain_tangent * t1 +
// rep_gain_tangent * s * t2 with s = t2 . unit(x_G - x_R), so the binormal
// push steers toward the side of the goal. Clamped to v_max.
Vector3 repulsive_velocity_I(const ControlInputs& in, const ControllerParams& p);

// Type-2 repulsion: rep_gain_normal * n, clamped to v_max.
Vector3 repulsive_velocity_II(const ControlInputs& in, const ControllerParams& p);

// v_pc (1 - w) + v_rep w with w = exp(-tau d_ro).
Vector3 blend(const Vector3& v_pc, const Vector3& v_rep, double d_ro, double tau);

// Orientation error as a rotation vector (rad) taking `current` to `target`.
Vector3 orientation_error(const Eigen::Quaterniond& current, const Eigen::Quaterniond& target);

// One 100 Hz controller evaluation: mode selection, task velocity, inverse map.
ControlOutput control_step(const ControlInputs& in, const ControllerParams& p,
                           const ArmModel& model);

}  // namespace cohaptics
