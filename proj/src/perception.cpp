#include "cohaptics/perception.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cohaptics {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void PerceptionParams::validate() const {
  if (!(sample_period > 0.0)) throw ConfigError("perception: sample_period must be > 0");
  if (!(noise_std >= 0.0)) throw ConfigError("perception: noise_std must be >= 0");
  if (!(drift_rate >= 0.0)) throw ConfigError("perception: drift_rate must be >= 0");
  double prev_end = -std::numeric_limits<double>::infinity();
  for (const auto& w : occlusion_windows) {
    if (!(w.t_start <= w.t_end)) throw ConfigError("perception: occlusion window with start > end");
    if (!(w.t_start > prev_end)) {
      throw ConfigError("perception: occlusion windows must be sorted and non-overlapping");
    }
    prev_end = w.t_end;
  }
}

bool PerceptionParams::occluded_at(double t) const {
  constexpr double eps = 1e-9;
  for (const auto& w : occlusion_windows) {
    if (t >= w.t_start - eps && t <= w.t_end + eps) return true;
  }
  return false;
}

PerceptionChannel::PerceptionChannel(const PerceptionParams& params, std::uint64_t stream_seed)
    : params_(params), rng_(mix_seed(params.seed, stream_seed)) {}

PerceptionSample PerceptionChannel::sample(const Vector3& true_position, double t,
                                           const Eigen::Quaterniond& true_orientation) {
  const double k = std::round(t / params_.sample_period);
  if (std::abs(k * params_.sample_period - t) > 1e-9 * std::max(1.0, std::abs(t))) {
    throw std::invalid_argument("perception: sample time is off the sample grid");
  }
  PerceptionSample s;
  s.timestamp = t;
  s.occluded = params_.occluded_at(t);
  s.orientation = Eigen::Quaterniond(params_.frame_transform.linear() *
                                     true_orientation.toRotationMatrix());

  if (!s.occluded) {
    Vector3 p = params_.frame_transform * true_position;
    if (params_.noise_std > 0.0) {
      p += params_.noise_std * Vector3(normal_(rng_), normal_(rng_), normal_(rng_));
    }
    s.position = p;
    last_output_ = p;
    in_occlusion_ = false;
    return s;
  }

  if (!in_occlusion_) {
    // Odometry starts from the last optical fix.
    anchor_ = last_output_.value_or(params_.frame_transform * true_position);
    drift_.setZero();
    in_occlusion_ = true;
  } else if (params_.drift_rate > 0.0) {
    Vector3 dir(normal_(rng_), normal_(rng_), normal_(rng_));
    const double n = dir.norm();
    if (n > 0.0) drift_ += (params_.drift_rate * params_.sample_period / n) * dir;
  }
  s.position = anchor_ + drift_;
  return s;
}

std::vector<Vector3> downsample_hold(std::span<const PerceptionSample> samples,
                                     double control_period) {
  std::vector<Vector3> out;
  if (samples.empty()) return out;
  const double last_t = samples.back().timestamp;
  std::size_t idx = 0;
  for (std::int64_t k = 0;; ++k) {
    const double tick = static_cast<double>(k) * control_period;
    if (tick > last_t + 1e-12) break;
    while (idx + 1 < samples.size() && samples[idx + 1].timestamp <= tick + 1e-12) ++idx;
    if (samples[idx].timestamp > tick + 1e-12) {
      throw std::invalid_argument("downsample_hold: no sample at or before the first tick");
    }
    out.push_back(samples[idx].position);
  }
  return out;
}

}  // namespace cohaptics
