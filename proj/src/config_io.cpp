#include "cohaptics/config_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

namespace cohaptics {
namespace {

namespace fs = std::filesystem;

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void read_vec(const Json& j, const char* key, Vector3& out) {
  if (auto it = j.find(key); it != j.end()) out = vector3_from_json(*it);
}

void read_seed(const Json& j, const char* key, std::uint64_t& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<std::uint64_t>();
}

std::string resolve(const std::string& base_dir, const std::string& ref) {
  const fs::path p(ref);
  return p.is_absolute() ? ref : (fs::path(base_dir) / p).string();
}

// Wraps library exceptions from nlohmann into ConfigError with context.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  } catch (const NonMonotonicTime& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json to_json(const Vector3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vector3 vector3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json isometry_to_json(const Eigen::Isometry3d& t) {
  const Eigen::Quaterniond q(t.linear());
  return {{"position", to_json(Vector3(t.translation()))},
          {"orientation_wxyz", Json::array({q.w(), q.x(), q.y(), q.z()})}};
}

Eigen::Isometry3d isometry_from_json(const Json& j) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  if (j.contains("position")) t.translation() = vector3_from_json(j.at("position"));
  if (j.contains("translation")) t.translation() = vector3_from_json(j.at("translation"));
  if (j.contains("orientation_wxyz")) {
    const auto& q = j.at("orientation_wxyz");
    if (!q.is_array() || q.size() != 4) throw ConfigError("orientation_wxyz needs 4 entries");
    Eigen::Quaterniond quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                            q[3].get<double>());
    if (std::abs(quat.norm() - 1.0) > 1e-6) throw ConfigError("orientation_wxyz is not a unit quaternion");
    t.linear() = quat.normalized().toRotationMatrix();
  }
  if (j.contains("rotation_rpy")) {
    const Vector3 rpy = vector3_from_json(j.at("rotation_rpy"));
    t.linear() = (Eigen::AngleAxisd(rpy.z(), Vector3::UnitZ()) *
                  Eigen::AngleAxisd(rpy.y(), Vector3::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Vector3::UnitX()))
                     .toRotationMatrix();
  }
  return t;
}

// --- arm --------------------------------------------------------------------

Json to_json(const ArmModel& m) {
  Json rows = Json::array();
  for (const auto& r : m.dh_rows) {
    rows.push_back({{"a", r.a}, {"d", r.d}, {"alpha", r.alpha}, {"theta_offset", r.theta_offset}});
  }
  Json limits = Json::array();
  for (const auto& l : m.joint_limits) limits.push_back(Json::array({l.min, l.max}));
  Json vel = Json::array();
  for (int i = 0; i < 6; ++i) vel.push_back(m.joint_velocity_limits[i]);
  return {{"name", m.name},
          {"dh_rows", rows},
          {"joint_limits", limits},
          {"joint_velocity_limits", vel},
          {"base_pose", isometry_to_json(m.base_pose)},
          {"tool_offset", isometry_to_json(m.tool_offset)}};
}

ArmModel arm_from_json(const Json& j) {
  return guarded("arm", [&] {
    ArmModel m = ArmModel::ur10();
    read_opt(j, "name", m.name);
    if (j.contains("dh_rows")) {
      const auto& rows = j.at("dh_rows");
      if (!rows.is_array() || rows.size() != 6) throw ConfigError("arm: dh_rows must have exactly 6 rows");
      for (std::size_t i = 0; i < 6; ++i) {
        const auto& r = rows[i];
        m.dh_rows[i] = {r.at("a").get<double>(), r.at("d").get<double>(),
                        r.at("alpha").get<double>(), r.value("theta_offset", 0.0)};
      }
    }
    if (j.contains("joint_limits")) {
      const auto& lim = j.at("joint_limits");
      if (!lim.is_array() || lim.size() != 6) throw ConfigError("arm: joint_limits must have 6 entries");
      for (std::size_t i = 0; i < 6; ++i) m.joint_limits[i] = {lim[i].at(0).get<double>(), lim[i].at(1).get<double>()};
    }
    if (j.contains("joint_velocity_limits")) {
      const auto& v = j.at("joint_velocity_limits");
      if (!v.is_array() || v.size() != 6) throw ConfigError("arm: joint_velocity_limits must have 6 entries");
      for (std::size_t i = 0; i < 6; ++i) m.joint_velocity_limits[static_cast<int>(i)] = v[i].get<double>();
    }
    if (j.contains("base_pose")) m.base_pose = isometry_from_json(j.at("base_pose"));
    if (j.contains("tool_offset")) m.tool_offset = isometry_from_json(j.at("tool_offset"));
    m.validate();
    return m;
  });
}

// --- controller / haptics / perception ---------------------------------------

Json to_json(const ControllerParams& p) {
  return {{"k_pc1", p.k_pc1}, {"k_pc2", p.k_pc2}, {"tau", p.tau},
          {"d_at", p.d_at}, {"d_act", p.d_act}, {"d_dct", p.d_dct},
          {"theta_obs", p.theta_obs}, {"v_max", p.v_max},
          {"rep_gain_normal", p.rep_gain_normal}, {"rep_gain_tangent", p.rep_gain_tangent},
          {"damping", p.damping}, {"orientation_gain", p.orientation_gain}};
}

ControllerParams controller_from_json(const Json& j) {
  return guarded("controller", [&] {
    ControllerParams p;
    read_opt(j, "k_pc1", p.k_pc1);
    read_opt(j, "k_pc2", p.k_pc2);
    read_opt(j, "tau", p.tau);
    read_opt(j, "d_at", p.d_at);
    read_opt(j, "d_act", p.d_act);
    read_opt(j, "d_dct", p.d_dct);
    read_opt(j, "theta_obs", p.theta_obs);
    read_opt(j, "v_max", p.v_max);
    read_opt(j, "rep_gain_normal", p.rep_gain_normal);
    read_opt(j, "rep_gain_tangent", p.rep_gain_tangent);
    read_opt(j, "damping", p.damping);
    read_opt(j, "orientation_gain", p.orientation_gain);
    p.validate();
    return p;
  });
}

Json to_json(const HapticParams& p) {
  return {{"render_far", p.render_far}, {"render_near", p.render_near},
          {"max_travel", p.max_travel}, {"update_rate", p.update_rate},
          {"vib_single", p.vib_single}, {"vib_both", p.vib_both}};
}

HapticParams haptics_from_json(const Json& j) {
  return guarded("haptics", [&] {
    HapticParams p;
    if (j.contains("d_sr")) p = HapticParams::one_sided(j.at("d_sr").get<double>());
    read_opt(j, "render_far", p.render_far);
    read_opt(j, "render_near", p.render_near);
    read_opt(j, "max_travel", p.max_travel);
    read_opt(j, "update_rate", p.update_rate);
    read_opt(j, "vib_single", p.vib_single);
    read_opt(j, "vib_both", p.vib_both);
    p.validate();
    return p;
  });
}

Json to_json(const PerceptionParams& p) {
  Json windows = Json::array();
  for (const auto& w : p.occlusion_windows) windows.push_back(Json::array({w.t_start, w.t_end}));
  return {{"sample_period", p.sample_period}, {"noise_std", p.noise_std},
          {"occlusion_windows", windows},     {"drift_rate", p.drift_rate},
          {"frame_transform", isometry_to_json(p.frame_transform)}, {"seed", p.seed}};
}

PerceptionParams perception_from_json(const Json& j) {
  return guarded("perception", [&] {
    PerceptionParams p;
    read_opt(j, "sample_period", p.sample_period);
    read_opt(j, "noise_std", p.noise_std);
    read_opt(j, "drift_rate", p.drift_rate);
    read_seed(j, "seed", p.seed);
    if (j.contains("occlusion_windows")) {
      for (const auto& w : j.at("occlusion_windows")) {
        p.occlusion_windows.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
      }
    }
    if (j.contains("frame_transform")) p.frame_transform = isometry_from_json(j.at("frame_transform"));
    p.validate();
    return p;
  });
}

// --- agent ------------------------------------------------------------------

Json to_json(const AgentSpec& a) {
  const auto& r = a.responsive;
  const auto& c = a.circling;
  Json waypoints = Json::array();
  for (const auto& w : a.waypoints) {
    waypoints.push_back(Json::array({w.t, w.position.x(), w.position.y(), w.position.z()}));
  }
  return {{"kind", std::string(to_string(a.kind))},
          {"position", to_json(a.position)},
          {"responsive",
           {{"reaction_latency", r.reaction_latency},
            {"displacement_threshold", r.displacement_threshold},
            {"retreat_gain", r.retreat_gain},
            {"hand_speed_max", r.hand_speed_max},
            {"noise_std", r.noise_std},
            {"seed", r.seed},
            {"decay_time", r.decay_time},
            {"track_gain", r.track_gain}}},
          {"circling",
           {{"center", to_json(c.center)},
            {"target_displacement", c.target_displacement},
            {"initial_radius", c.initial_radius},
            {"tangential_speed", c.tangential_speed},
            {"radial_gain", c.radial_gain},
            {"perceptual_noise_std", c.perceptual_noise_std},
            {"noise_time_constant", c.noise_time_constant},
            {"hand_speed_max", c.hand_speed_max},
            {"max_travel", c.max_travel},
            {"seed", c.seed}}},
          {"waypoints", waypoints}};
}

AgentSpec agent_from_json(const Json& j, const std::string& base_dir) {
  return guarded("agent", [&] {
    AgentSpec a;
    if (j.contains("kind")) a.kind = parse_agent_kind(j.at("kind").get<std::string>());
    read_vec(j, "position", a.position);
    if (j.contains("responsive")) {
      const auto& r = j.at("responsive");
      auto& p = a.responsive;
      read_opt(r, "reaction_latency", p.reaction_latency);
      read_opt(r, "displacement_threshold", p.displacement_threshold);
      read_opt(r, "retreat_gain", p.retreat_gain);
      read_opt(r, "hand_speed_max", p.hand_speed_max);
      read_opt(r, "noise_std", p.noise_std);
      read_seed(r, "seed", p.seed);
      read_opt(r, "decay_time", p.decay_time);
      read_opt(r, "track_gain", p.track_gain);
    }
    if (j.contains("circling")) {
      const auto& c = j.at("circling");
      auto& p = a.circling;
      read_vec(c, "center", p.center);
      read_opt(c, "target_displacement", p.target_displacement);
      read_opt(c, "initial_radius", p.initial_radius);
      read_opt(c, "tangential_speed", p.tangential_speed);
      read_opt(c, "radial_gain", p.radial_gain);
      read_opt(c, "perceptual_noise_std", p.perceptual_noise_std);
      read_opt(c, "noise_time_constant", p.noise_time_constant);
      read_opt(c, "hand_speed_max", p.hand_speed_max);
      read_opt(c, "max_travel", p.max_travel);
      read_seed(c, "seed", p.seed);
    }
    if (j.contains("waypoints")) {
      for (const auto& w : j.at("waypoints")) {
        if (!w.is_array() || w.size() != 4) throw ConfigError("agent: waypoint rows are [t, x, y, z]");
        a.waypoints.push_back({w[0].get<double>(), {w[1].get<double>(), w[2].get<double>(), w[3].get<double>()}});
      }
    }
    if (j.contains("waypoints_csv")) {
      a.waypoints = load_waypoints_csv(resolve(base_dir, j.at("waypoints_csv").get<std::string>()));
    }
    return a;
  });
}

Json to_json(const Metrics& m) {
  return {{"min_d_RO", m.min_d_ro},
          {"time_in_avoidance", m.time_in_avoidance},
          {"pct_under_d_AT", m.pct_under_d_at},
          {"robot_path_length", m.robot_path_length},
          {"collision_path", m.collision_path},
          {"task_time", m.task_time}};
}

// --- run config -------------------------------------------------------------

Json to_json(const SimConfig& c) {
  Json q = Json::array();
  for (int i = 0; i < 6; ++i) q.push_back(c.initial_q[i]);
  Json goals = Json::array();
  for (const auto& g : c.goal_program.goals) {
    goals.push_back({{"position", to_json(g.position)}, {"dwell", g.dwell}});
  }
  return {{"arm", to_json(c.arm)},
          {"initial_q", q},
          {"controller", to_json(c.controller)},
          {"haptics", to_json(c.haptics)},
          {"haptics_enabled", c.haptics_enabled},
          {"agent", to_json(c.agent)},
          {"perception", to_json(c.perception)},
          {"goal_program", {{"goals", goals}, {"tolerance", c.goal_program.tolerance}}},
          {"duration", c.duration},
          {"control_period", c.control_period},
          {"seed", c.seed},
          {"robot_static", c.robot_static},
          {"hold_orientation", c.hold_orientation}};
}

SimConfig sim_config_from_json(const Json& j, const std::string& base_dir) {
  return guarded("config", [&] {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    SimConfig c;
    if (j.contains("arm")) {
      const auto& arm = j.at("arm");
      c.arm = arm.is_string() ? load_arm_model(resolve(base_dir, arm.get<std::string>())) : arm_from_json(arm);
    }
    if (j.contains("initial_q")) {
      const auto& q = j.at("initial_q");
      if (!q.is_array() || q.size() != 6) throw ConfigError("config: initial_q must have 6 entries");
      for (int i = 0; i < 6; ++i) c.initial_q[i] = q[static_cast<std::size_t>(i)].get<double>();
    }
    if (j.contains("controller")) c.controller = controller_from_json(j.at("controller"));
    if (j.contains("haptics")) c.haptics = haptics_from_json(j.at("haptics"));
    read_opt(j, "haptics_enabled", c.haptics_enabled);
    if (j.contains("agent")) c.agent = agent_from_json(j.at("agent"), base_dir);
    if (j.contains("perception")) c.perception = perception_from_json(j.at("perception"));
    if (j.contains("goal_program")) {
      const auto& gp = j.at("goal_program");
      read_opt(gp, "tolerance", c.goal_program.tolerance);
      for (const auto& g : gp.value("goals", Json::array())) {
        c.goal_program.goals.push_back({vector3_from_json(g.at("position")), g.value("dwell", 0.0)});
      }
    }
    read_opt(j, "duration", c.duration);
    read_opt(j, "control_period", c.control_period);
    read_seed(j, "seed", c.seed);
    read_opt(j, "robot_static", c.robot_static);
    read_opt(j, "hold_orientation", c.hold_orientation);
    c.validate();
    return c;
  });
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

ArmModel load_arm_model(const std::string& path) { return arm_from_json(read_json_file(path)); }

SimConfig load_sim_config(const std::string& path) {
  return sim_config_from_json(read_json_file(path), directory_of(path));
}

std::string directory_of(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  return parent.empty() ? std::string(".") : parent.string();
}

}  // namespace cohaptics
