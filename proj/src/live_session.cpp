#include <cmath>
#include <limits>

#include "cohaptics/live_server.hpp"

namespace cohaptics {
namespace {

Vector3 finite_vector(const Json& j, const char* key) {
  if (!j.contains(key)) throw ProtocolError(std::string("missing field '") + key + "'");
  Vector3 v;
  try {
    v = vector3_from_json(j.at(key));
  } catch (const Error&) {
    throw ProtocolError(std::string("field '") + key + "' must be a 3-element number array");
  } catch (const Json::exception&) {
    throw ProtocolError(std::string("field '") + key + "' must be a 3-element number array");
  }
  if (!v.allFinite()) throw ProtocolError(std::string("field '") + key + "' must be finite");
  return v;
}

Json parse_object(std::string_view text) {
  Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("message is not a JSON object");
  if (auto it = j.find("protocol_version"); it != j.end()) {
    if (!it->is_number_integer() || it->get<int>() != kProtocolVersion) {
      throw ProtocolError("unsupported protocol_version");
    }
  }
  if (!j.contains("type") || !j.at("type").is_string()) throw ProtocolError("missing 'type'");
  return j;
}

}  // namespace

// --- frames -------------------------------------------------------------------

Json to_json(const StreamFrame& f) {
  return {{"type", "frame"},
          {"protocol_version", kProtocolVersion},
          {"tick", f.tick},
          {"t", f.t},
          {"x_R", to_json(f.x_r)},
          {"x_O", to_json(f.x_o)},
          {"x_O_true", to_json(f.x_o_true)},
          {"mode", to_string(f.mode)},
          {"d_RO", f.d_ro},
          {"haptic",
           {{"displacement", f.haptic.displacement},
            {"vib_left", f.haptic.vib_left},
            {"vib_right", f.haptic.vib_right}}},
          {"goal", to_json(f.goal)},
          {"goal_index", f.goal_index},
          {"paused", f.paused},
          {"haptics_enabled", f.haptics_enabled},
          {"live_input", f.live_input},
          {"fault", f.fault},
          {"metrics",
           {{"min_d_RO", f.metrics.min_d_ro},
            {"time_in_avoidance", f.metrics.time_in_avoidance},
            {"robot_path_length", f.metrics.robot_path_length}}}};
}

std::string encode(const StreamFrame& f) { return to_json(f).dump(); }

StreamFrame decode_frame(std::string_view text) {
  const Json j = parse_object(text);
  if (j.at("type") != "frame") throw ProtocolError("not a frame");
  StreamFrame f;
  try {
    f.tick = j.at("tick").get<std::int64_t>();
    f.t = j.at("t").get<double>();
    f.x_r = finite_vector(j, "x_R");
    f.x_o = finite_vector(j, "x_O");
    f.x_o_true = finite_vector(j, "x_O_true");
    f.mode = parse_control_mode(j.at("mode").get<std::string>());
    f.d_ro = j.at("d_RO").get<double>();
    const auto& h = j.at("haptic");
    f.haptic.displacement = h.at("displacement").get<double>();
    f.haptic.vib_left = h.at("vib_left").get<double>();
    f.haptic.vib_right = h.at("vib_right").get<double>();
    f.haptic.mode = f.mode;
    f.goal = finite_vector(j, "goal");
    f.goal_index = j.at("goal_index").get<int>();
    f.paused = j.at("paused").get<bool>();
    f.haptics_enabled = j.at("haptics_enabled").get<bool>();
    f.live_input = j.at("live_input").get<bool>();
    f.fault = j.at("fault").get<std::string>();
    const auto& m = j.at("metrics");
    f.metrics.min_d_ro = m.at("min_d_RO").get<double>();
    f.metrics.time_in_avoidance = m.at("time_in_avoidance").get<double>();
    f.metrics.robot_path_length = m.at("robot_path_length").get<double>();
  } catch (const Json::exception& e) {
    throw ProtocolError(std::string("bad frame: ") + e.what());
  } catch (const ConfigError& e) {
    throw ProtocolError(std::string("bad frame: ") + e.what());
  }
  return f;
}

// --- inputs -------------------------------------------------------------------

InputMessage parse_input(std::string_view text) {
  const Json j = parse_object(text);
  const auto type = j.at("type").get<std::string>();
  if (type == "hand_position") return HandPosition{finite_vector(j, "position")};
  if (type == "pause") return Pause{};
  if (type == "resume") return Resume{};
  if (type == "reset") {
    Reset r;
    if (auto it = j.find("seed"); it != j.end()) {
      if (!it->is_number_unsigned()) throw ProtocolError("'seed' must be a non-negative integer");
      r.seed = it->get<std::uint64_t>();
    }
    return r;
  }
  if (type == "set_haptics") {
    if (!j.contains("on") || !j.at("on").is_boolean()) throw ProtocolError("'on' must be a boolean");
    return SetHaptics{j.at("on").get<bool>()};
  }
  if (type == "free_drive_drag") return FreeDriveDrag{finite_vector(j, "displacement")};
  throw ProtocolError("unknown message type '" + type + "'");
}

std::string encode(const InputMessage& msg) {
  Json j = {{"protocol_version", kProtocolVersion}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HandPosition>) {
          j["type"] = "hand_position";
          j["position"] = to_json(m.position);
        } else if constexpr (std::is_same_v<T, Pause>) {
          j["type"] = "pause";
        } else if constexpr (std::is_same_v<T, Resume>) {
          j["type"] = "resume";
        } else if constexpr (std::is_same_v<T, Reset>) {
          j["type"] = "reset";
          j["seed"] = m.seed;
        } else if constexpr (std::is_same_v<T, SetHaptics>) {
          j["type"] = "set_haptics";
          j["on"] = m.on;
        } else {
          j["type"] = "free_drive_drag";
          j["displacement"] = to_json(m.displacement);
        }
      },
      msg);
  return j.dump();
}

// --- session ------------------------------------------------------------------

namespace {

StreamFrame initial_frame(const Engine& engine) {
  StreamFrame f;
  f.x_r = engine.tcp();
  f.x_o = engine.hand().position;
  f.x_o_true = f.x_o;
  f.d_ro = (f.x_r - f.x_o).norm();
  f.goal = engine.current_goal();
  f.haptics_enabled = engine.haptics_enabled();
  f.metrics.min_d_ro = f.d_ro;
  return f;
}

}  // namespace

LiveSession::LiveSession(SimConfig config, SessionOptions options)
    : config_(std::move(config)),
      options_(options),
      engine_(config_),
      hold_(options.input_timeout),
      frame_(initial_frame(engine_)) {}

void LiveSession::submit(const InputMessage& msg) { pending_.push_back(msg); }

void LiveSession::restart(std::uint64_t seed) {
  config_.seed = seed;
  engine_ = Engine(config_);
  hold_.clear();
  paused_ = false;
  live_ = false;
  frame_ = initial_frame(engine_);
}

void LiveSession::apply(const InputMessage& msg) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HandPosition>) {
          hold_.receive(options_.bounds.clamp(m.position), engine_.time());
        } else if constexpr (std::is_same_v<T, Pause>) {
          paused_ = true;
        } else if constexpr (std::is_same_v<T, Resume>) {
          paused_ = false;
        } else if constexpr (std::is_same_v<T, Reset>) {
          restart(m.seed);
        } else if constexpr (std::is_same_v<T, SetHaptics>) {
          engine_.set_haptics_enabled(m.on);
        } else {
          engine_.add_free_drive_drag(m.displacement);
        }
      },
      msg);
}

StreamFrame LiveSession::tick() {
  for (const auto& msg : pending_) apply(msg);
  pending_.clear();

  frame_.paused = paused_;
  frame_.haptics_enabled = engine_.haptics_enabled();
  if (paused_ || !frame_.fault.empty() || engine_.finished()) return frame_;

  const auto held = hold_.current(engine_.time());
  live_ = held.has_value();
  if (held) engine_.override_hand(*held);

  StepRecord rec;
  try {
    rec = engine_.step();
  } catch (const SimulationFault& e) {
    frame_.fault = e.what();
    return frame_;
  }

  const Vector3 prev_x_r = frame_.x_r;
  const bool first = frame_.tick == 0 && engine_.tick() == 1;
  StreamFrame f;
  f.tick = engine_.tick();
  f.t = rec.t;
  f.x_r = rec.x_r;
  f.x_o = rec.x_o_perceived;
  f.x_o_true = rec.x_o_true;
  f.mode = rec.mode;
  f.d_ro = (rec.x_r - rec.x_o_perceived).norm();
  f.haptic = rec.haptic;
  f.goal = rec.goal;
  f.goal_index = rec.goal_index;
  f.paused = paused_;
  f.haptics_enabled = engine_.haptics_enabled();
  f.live_input = live_;
  f.metrics = frame_.metrics;
  if (first) f.metrics = {f.d_ro, 0.0, 0.0};
  f.metrics.min_d_ro = std::min(f.metrics.min_d_ro, f.d_ro);
  if (f.d_ro < config_.controller.d_at) f.metrics.time_in_avoidance += config_.control_period;
  if (!first) f.metrics.robot_path_length += (f.x_r - prev_x_r).norm();
  frame_ = f;
  return frame_;
}

}  // namespace cohaptics
