#include "cohaptics/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace cohaptics {
namespace {

Eigen::Isometry3d link_transform(const DhRow& row, double q) {
  const double theta = q + row.theta_offset;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Matrix4d m;
  m << ct, -st * ca, st * sa, row.a * ct,
       st, ct * ca, -ct * sa, row.a * st,
       0.0, sa, ca, row.d,
       0.0, 0.0, 0.0, 1.0;
  Eigen::Isometry3d t;
  t.matrix() = m;
  return t;
}

bool is_rigid(const Eigen::Isometry3d& t) {
  const Eigen::Matrix3d r = t.linear();
  return (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9 &&
         std::abs(r.determinant() - 1.0) < 1e-9 && t.translation().allFinite();
}

}  // namespace

ArmModel ArmModel::ur10() {
  ArmModel m;
  m.name = "UR10";
  m.dh_rows = {{{0.0, 0.1273, kPi / 2, 0.0},
                {-0.612, 0.0, 0.0, 0.0},
                {-0.5723, 0.0, 0.0, 0.0},
                {0.0, 0.163941, kPi / 2, 0.0},
                {0.0, 0.1157, -kPi / 2, 0.0},
                {0.0, 0.0922, 0.0, 0.0}}};
  const double v_base = 120.0 * kPi / 180.0;
  const double v_wrist = 180.0 * kPi / 180.0;
  m.joint_velocity_limits << v_base, v_base, v_wrist, v_wrist, v_wrist, v_wrist;
  return m;
}

void ArmModel::validate() const {
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& row = dh_rows[i];
    if (!std::isfinite(row.a) || !std::isfinite(row.d) || !std::isfinite(row.alpha) ||
        !std::isfinite(row.theta_offset)) {
      throw ConfigError("arm: non-finite DH parameter in row " + std::to_string(i));
    }
    if (!(joint_limits[i].min < joint_limits[i].max)) {
      throw ConfigError("arm: joint " + std::to_string(i + 1) + " limit min must be < max");
    }
    if (!(joint_velocity_limits[i] > 0.0)) {
      throw ConfigError("arm: joint " + std::to_string(i + 1) + " velocity limit must be > 0");
    }
  }
  if (!is_rigid(base_pose)) throw ConfigError("arm: base_pose is not a rigid transform");
  if (!is_rigid(tool_offset)) throw ConfigError("arm: tool_offset is not a rigid transform");
}

ArmModel ArmModel::scaled(double factor) const {
  ArmModel out = *this;
  for (auto& row : out.dh_rows) {
    row.a *= factor;
    row.d *= factor;
  }
  out.tool_offset.translation() *= factor;
  return out;
}

JointVector ArmModel::clamp_to_limits(const JointVector& q) const {
  JointVector out;
  for (int i = 0; i < 6; ++i) {
    out[i] = std::clamp(q[i], joint_limits[i].min, joint_limits[i].max);
  }
  return out;
}

Pose forward_kinematics(const ArmModel& model, const JointVector& q) {
  Eigen::Isometry3d t = model.base_pose;
  for (int i = 0; i < 6; ++i) t = t * link_transform(model.dh_rows[i], q[i]);
  t = t * model.tool_offset;
  Pose pose;
  pose.position = t.translation();
  pose.orientation = Eigen::Quaterniond(t.linear()).normalized();
  return pose;
}

Matrix6 jacobian(const ArmModel& model, const JointVector& q) {
  std::array<Eigen::Isometry3d, 7> frames;
  frames[0] = model.base_pose;
  for (int i = 0; i < 6; ++i) frames[i + 1] = frames[i] * link_transform(model.dh_rows[i], q[i]);
  const Vector3 tcp = (frames[6] * model.tool_offset).translation();

  Matrix6 jac;
  for (int i = 0; i < 6; ++i) {
    const Vector3 z = frames[i].linear().col(2);
    const Vector3 p = frames[i].translation();
    jac.block<3, 1>(0, i) = z.cross(tcp - p);
    jac.block<3, 1>(3, i) = z;
  }
  return jac;
}

Matrix6 damped_inverse(const Matrix6& jac, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("damped_inverse: lambda must be >= 0");
  if (lambda == 0.0) {
    const Eigen::JacobiSVD<Matrix6> svd(jac);
    const auto& sigma = svd.singularValues();
    if (sigma[5] < 1e-10) {
      throw SingularMatrix("damped_inverse: Jacobian is rank deficient (sigma_min = " +
                           std::to_string(sigma[5]) + ")");
    }
    return jac.partialPivLu().inverse();
  }
  const Matrix6 gram = jac * jac.transpose() + lambda * lambda * Matrix6::Identity();
  // gram is SPD, so (gram^-1 J)^T == J^T gram^-1.
  return gram.llt().solve(jac).transpose();
}

JointVector clamp_joint_rates(const JointVector& qdot, const JointVector& limits) {
  double ratio = 1.0;
  for (int i = 0; i < 6; ++i) ratio = std::max(ratio, std::abs(qdot[i]) / limits[i]);
  if (ratio <= 1.0) return qdot;
  JointVector out = qdot / ratio;
  for (int i = 0; i < 6; ++i) out[i] = std::clamp(out[i], -limits[i], limits[i]);
  return out;
}

}  // namespace cohaptics
