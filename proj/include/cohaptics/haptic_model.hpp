#pragma once

#include <cstdint>
#include <optional>

#include "cohaptics/common.hpp"

namespace cohaptics {

// Wearable display model: a sliding contact point (75 mm travel) and two
// vibration motors, refreshed at 100 Hz.
struct HapticParams {
  double render_far = 0.40;   // distance where displacement is 0
  double render_near = 0.20;  // distance where displacement saturates
  double max_travel = 0.075;  // m, fixed by the linkage
  double update_rate = 100.0; // Hz
  double vib_single = 0.40;
  double vib_both = 0.70;

  // One-sided rendering range: displacement grows from 0 at d_sr to full
  // travel at contact.
  static HapticParams one_sided(double d_sr);

  double range_length() const { return render_far - render_near; }

  void validate() const;
};

struct HapticCommand {
  double displacement = 0.0;  // m, [0, max_travel]
  double vib_left = 0.0;      // fraction of max power
  double vib_right = 0.0;
  ControlMode mode = ControlMode::PositionControl;

  bool operator==(const HapticCommand&) const = default;
};

HapticCommand render(double d_ro, ControlMode mode, const HapticParams& p);

// Zero-order hold on the device refresh grid: a command is latched at the
// first sample of each tick and held until the next tick boundary.
class DeviceSchedule {
 public:
  explicit DeviceSchedule(const HapticParams& p) : rate_(p.update_rate) {}

  HapticCommand quantize(const HapticCommand& cmd, double t);

 private:
  double rate_;
  std::optional<std::int64_t> tick_;
  HapticCommand held_;
};

}  // namespace cohaptics
