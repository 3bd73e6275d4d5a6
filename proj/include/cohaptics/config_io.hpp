#pragma once

#include <string>

#include "json.hpp"

#include "cohaptics/sim_engine.hpp"

namespace cohaptics {

using Json = nlohmann::json;

Json to_json(const Vector3& v);
Vector3 vector3_from_json(const Json& j);

Json isometry_to_json(const Eigen::Isometry3d& t);
// Accepts {"position": [..], "orientation_wxyz": [..]} or
// {"translation": [..], "rotation_rpy": [..]}; both keys optional.
Eigen::Isometry3d isometry_from_json(const Json& j);

Json to_json(const ArmModel& m);
ArmModel arm_from_json(const Json& j);

Json to_json(const ControllerParams& p);
ControllerParams controller_from_json(const Json& j);

Json to_json(const HapticParams& p);
HapticParams haptics_from_json(const Json& j);

Json to_json(const PerceptionParams& p);
PerceptionParams perception_from_json(const Json& j);

Json to_json(const AgentSpec& a);
AgentSpec agent_from_json(const Json& j, const std::string& base_dir = ".");

Json to_json(const Metrics& m);

// Run-config document. `base_dir` resolves relative file references
// ("arm": "ur10.json", "waypoints_csv": "...").
Json to_json(const SimConfig& c);
SimConfig sim_config_from_json(const Json& j, const std::string& base_dir = ".");

// Parses and validates; every failure surfaces as ConfigError.
Json read_json_file(const std::string& path);
ArmModel load_arm_model(const std::string& path);
SimConfig load_sim_config(const std::string& path);

std::string directory_of(const std::string& path);

}  // namespace cohaptics
