#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "cohaptics/common.hpp"

namespace cohaptics {

struct OcclusionWindow {
  double t_start = 0.0;  // s, inclusive
  double t_end = 0.0;    // s, inclusive
};

// Wearable mocap channel: 2 ms samples, additive noise, IMU-odometry drift
// while the camera is occluded, and a rigid transform into the robot frame.
struct PerceptionParams {
  double sample_period = 0.002;
  double noise_std = 0.001;
  std::vector<OcclusionWindow> occlusion_windows;
  double drift_rate = 0.02;  // m/s bound on odometry drift
  Eigen::Isometry3d frame_transform = Eigen::Isometry3d::Identity();
  std::uint64_t seed = 0;

  void validate() const;
  bool occluded_at(double t) const;
};

struct PerceptionSample {
  Vector3 position = Vector3::Zero();  // robot frame
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  double timestamp = 0.0;
  bool occluded = false;
};

class PerceptionChannel {
 public:
  // `stream_seed` is mixed with params.seed; the engine passes the run seed.
  explicit PerceptionChannel(const PerceptionParams& params, std::uint64_t stream_seed = 0);

  // `t` must lie on the sample grid (multiple of sample_period).
  PerceptionSample sample(const Vector3& true_position, double t,
                          const Eigen::Quaterniond& true_orientation =
                              Eigen::Quaterniond::Identity());

  const PerceptionParams& params() const { return params_; }

 private:
  PerceptionParams params_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::optional<Vector3> last_output_;
  Vector3 anchor_ = Vector3::Zero();
  Vector3 drift_ = Vector3::Zero();
  bool in_occlusion_ = false;
};

// Latest-sample hold at each control tick k * control_period, for k from 0
// through the last tick covered by the stream.
std::vector<Vector3> downsample_hold(std::span<const PerceptionSample> samples,
                                     double control_period);

// splitmix64-based stream derivation, shared by every seeded component.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace cohaptics
