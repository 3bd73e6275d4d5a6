#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "cohaptics/config_io.hpp"
#include "cohaptics/sim_engine.hpp"

namespace cohaptics {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::string_view kServerVersion = "0.1.0";

class ProtocolError : public Error {
 public:
  using Error::Error;
};

// --- wire messages ------------------------------------------------------------

struct FrameMetrics {
  double min_d_ro = 0.0;
  double time_in_avoidance = 0.0;  // s with d_RO below d_AT
  double robot_path_length = 0.0;
};

struct StreamFrame {
  std::int64_t tick = 0;
  double t = 0.0;
  Vector3 x_r = Vector3::Zero();
  Vector3 x_o = Vector3::Zero();       // perceived hand, d_ro = |x_r - x_o|
  Vector3 x_o_true = Vector3::Zero();
  ControlMode mode = ControlMode::PositionControl;
  double d_ro = 0.0;
  HapticCommand haptic;
  Vector3 goal = Vector3::Zero();
  int goal_index = 0;
  bool paused = false;
  bool haptics_enabled = true;
  bool live_input = false;  // hand currently driven by client input
  std::string fault;        // non-empty once the world stopped on a fault
  FrameMetrics metrics;
};

Json to_json(const StreamFrame& f);
std::string encode(const StreamFrame& f);
StreamFrame decode_frame(std::string_view text);  // throws ProtocolError

struct HandPosition { Vector3 position; };
struct Pause {};
struct Resume {};
struct Reset { std::uint64_t seed = 0; };
struct SetHaptics { bool on = true; };
struct FreeDriveDrag { Vector3 displacement; };

using InputMessage = std::variant<HandPosition, Pause, Resume, Reset, SetHaptics, FreeDriveDrag>;

// Throws ProtocolError on malformed JSON, unknown type, wrong version.
InputMessage parse_input(std::string_view text);
std::string encode(const InputMessage& msg);

// --- session: the single shared world ---------------------------------------

struct WorkspaceBounds {
  Vector3 min = Vector3(-1.6, -1.6, -0.2);
  Vector3 max = Vector3(1.6, 1.6, 1.6);
  Vector3 clamp(const Vector3& p) const { return p.cwiseMax(min).cwiseMin(max); }
};

// Latest client hand position, valid until `timeout` s of sim time pass
// without a new message.
class InputHold {
 public:
  explicit InputHold(double timeout = 2.0) : timeout_(timeout) {}

  void receive(const Vector3& p, double t) {
    held_ = p;
    received_at_ = t;
  }
  std::optional<Vector3> current(double t) const {
    if (!held_ || t - received_at_ > timeout_ + 1e-9) return std::nullopt;
    return held_;
  }
  void clear() { held_.reset(); }
  double timeout() const { return timeout_; }

 private:
  double timeout_;
  std::optional<Vector3> held_;
  double received_at_ = 0.0;
};

struct SessionOptions {
  WorkspaceBounds bounds;
  double input_timeout = 2.0;
};

// Deterministic: the frame sequence depends only on the config, the seed
// and the sequence of (tick, input) pairs.
class LiveSession {
 public:
  explicit LiveSession(SimConfig config, SessionOptions options = {});

  // Queued; takes effect at the next tick.
  void submit(const InputMessage& msg);
  // Applies queued inputs, advances one control tick unless paused or
  // stopped, and returns the frame for the current state.
  StreamFrame tick();

  const StreamFrame& last_frame() const { return frame_; }
  std::int64_t ticks() const { return engine_.tick(); }
  bool paused() const { return paused_; }
  const Engine& engine() const { return engine_; }

 private:
  void apply(const InputMessage& msg);
  void restart(std::uint64_t seed);

  SimConfig config_;
  SessionOptions options_;
  Engine engine_;
  InputHold hold_;
  std::vector<InputMessage> pending_;
  StreamFrame frame_;
  bool paused_ = false;
  bool live_ = false;
};

// --- network front end ------------------------------------------------------

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  double tick_rate = 100.0;    // Hz, wall clock
  double broadcast_rate = 30.0;
  std::size_t client_queue = 8;  // frames buffered per client, oldest dropped
};

// WebSocket `/stream` (frames out, inputs in) and HTTP `/health` on one port.
class LiveServer {
 public:
  LiveServer(LiveSession session, ServerOptions options = {});
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  // Binds and starts the I/O and simulation threads. Throws Error when the
  // port cannot be bound.
  void start();
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  unsigned short port() const;
  std::int64_t tick() const { return tick_.load(); }
  std::size_t clients() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<std::int64_t> tick_{0};
};

}  // namespace cohaptics
