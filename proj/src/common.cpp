#include "cohaptics/common.hpp"

namespace cohaptics {

std::string_view to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::PositionControl: return "PositionControl";
    case ControlMode::CollisionI: return "CollisionI";
    case ControlMode::CollisionII: return "CollisionII";
    case ControlMode::FreeDrive: return "FreeDrive";
  }
  return "Unknown";
}

ControlMode parse_control_mode(std::string_view name) {
  for (ControlMode m : kAllModes) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown control mode '" + std::string(name) + "'");
}

}  // namespace cohaptics
