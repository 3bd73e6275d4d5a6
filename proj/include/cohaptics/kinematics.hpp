#pragma once

#include <array>
#include <string>

#include "cohaptics/common.hpp"

namespace cohaptics {

// Standard Denavit-Hartenberg row: Rot_z(theta) Trans_z(d) Trans_x(a) Rot_x(alpha).
struct DhRow {
  double a = 0.0;      // m
  double d = 0.0;      // m
  double alpha = 0.0;  // rad
  double theta_offset = 0.0;  // rad, added to the joint angle
};

struct JointLimit {
  double min = -2.0 * kPi;
  double max = 2.0 * kPi;
};

struct Pose {
  Vector3 position = Vector3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

// Kinematic chain of a 6-DOF serial arm. Defaults to UR10 dimensions.
struct ArmModel {
  std::string name = "UR10";
  std::array<DhRow, 6> dh_rows{};
  std::array<JointLimit, 6> joint_limits{};
  JointVector joint_velocity_limits = JointVector::Constant(kPi);
  Eigen::Isometry3d base_pose = Eigen::Isometry3d::Identity();
  // TCP offset in the flange frame (gripper length); identity by default.
  Eigen::Isometry3d tool_offset = Eigen::Isometry3d::Identity();

  static ArmModel ur10();

  // Throws ConfigError if an invariant is violated.
  void validate() const;

  // All link lengths (a, d, tool translation) multiplied by `factor`.
  ArmModel scaled(double factor) const;

  // Clamp q into the joint limits.
  JointVector clamp_to_limits(const JointVector& q) const;
};

Pose forward_kinematics(const ArmModel& model, const JointVector& q);

// Geometric Jacobian of the TCP: rows 0-2 linear velocity, rows 3-5 angular
// velocity, both in the world frame.
Matrix6 jacobian(const ArmModel& model, const JointVector& q);

// J^T (J J^T + lambda^2 I)^-1. With lambda == 0 this is the exact inverse and
// throws SingularMatrix when J is rank deficient (sigma_min < 1e-10).
Matrix6 damped_inverse(const Matrix6& jac, double lambda);

// Scales `qdot` uniformly so that every |qdot_i| <= limits_i. Direction in
// joint space is preserved.
JointVector clamp_joint_rates(const JointVector& qdot, const JointVector& limits);

}  // namespace cohaptics
