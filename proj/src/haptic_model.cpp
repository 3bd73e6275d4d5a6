#include "cohaptics/haptic_model.hpp"

#include <algorithm>
#include <cmath>

namespace cohaptics {

HapticParams HapticParams::one_sided(double d_sr) {
  HapticParams p;
  p.render_far = d_sr;
  p.render_near = 0.0;
  return p;
}

void HapticParams::validate() const {
  if (!(render_near >= 0.0 && render_near < render_far)) {
    throw ConfigError("haptics: requires 0 <= render_near < render_far");
  }
  if (!(max_travel > 0.0)) throw ConfigError("haptics: max_travel must be > 0");
  if (!(update_rate > 0.0)) throw ConfigError("haptics: update_rate must be > 0");
  if (!(vib_single >= 0.0 && vib_single <= 1.0 && vib_both >= 0.0 && vib_both <= 1.0)) {
    throw ConfigError("haptics: vibration levels must lie in [0, 1]");
  }
}

HapticCommand render(double d_ro, ControlMode mode, const HapticParams& p) {
  HapticCommand cmd;
  cmd.mode = mode;
  const double fraction = (p.render_far - d_ro) / (p.render_far - p.render_near);
  cmd.displacement = p.max_travel * std::clamp(fraction, 0.0, 1.0);
  switch (mode) {
    case ControlMode::PositionControl:
      break;
    case ControlMode::CollisionI:
    case ControlMode::CollisionII:
      cmd.vib_left = p.vib_single;
      break;
    case ControlMode::FreeDrive:
      cmd.vib_left = p.vib_both;
      cmd.vib_right = p.vib_both;
      break;
  }
  return cmd;
}

HapticCommand DeviceSchedule::quantize(const HapticCommand& cmd, double t) {
  // Small epsilon so t = k / rate computed in floating point lands on tick k.
  const auto tick = static_cast<std::int64_t>(std::floor(t * rate_ + 1e-9));
  if (!tick_ || tick > *tick_) {
    tick_ = tick;
    held_ = cmd;
  }
  return held_;
}

}  // namespace cohaptics
