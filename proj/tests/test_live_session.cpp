#include <doctest.h>

#include <random>

#include "cohaptics/live_server.hpp"

using namespace cohaptics;

namespace {

SimConfig live_config() {
  SimConfig c = load_sim_config(std::string(COHAPTICS_SCENARIOS) + "/run_default.json");
  c.duration = 60.0;
  return c;
}

std::vector<std::string> drive(LiveSession& s, int ticks) {
  std::vector<std::string> out;
  for (int i = 0; i < ticks; ++i) out.push_back(encode(s.tick()));
  return out;
}

}  // namespace

TEST_CASE("input hold timeline") {
  InputHold hold(2.0);
  CHECK_FALSE(hold.current(0.0));
  hold.receive({1, 2, 3}, 1.0);
  CHECK(hold.current(1.0) == Vector3(1, 2, 3));
  CHECK(hold.current(3.0).has_value());
  CHECK_FALSE(hold.current(3.01).has_value());
  hold.receive({0, 0, 0}, 3.5);
  CHECK(hold.current(4.0) == Vector3(0, 0, 0));
  hold.clear();
  CHECK_FALSE(hold.current(4.0));
}

TEST_CASE("frames advance on the control grid and report perceived distance") {
  LiveSession s(live_config());
  double prev = -1.0;
  for (int i = 0; i < 500; ++i) {
    const StreamFrame f = s.tick();
    CHECK(f.tick == i + 1);
    CHECK(f.t == doctest::Approx(0.01 * i));
    CHECK(f.t > prev);
    prev = f.t;
    CHECK(std::abs(f.d_ro - (f.x_r - f.x_o).norm()) < 1e-9);
    CHECK(f.metrics.min_d_ro <= f.d_ro);
  }
}

TEST_CASE("pause holds time, resume continues") {
  LiveSession s(live_config());
  drive(s, 10);
  const StreamFrame before = s.last_frame();
  s.submit(Pause{});
  for (int i = 0; i < 5; ++i) {
    const StreamFrame f = s.tick();
    CHECK(f.paused);
    CHECK(f.t == before.t);
    CHECK(f.tick == before.tick);
  }
  CHECK(s.paused());
  s.submit(Resume{});
  const StreamFrame f = s.tick();
  CHECK_FALSE(f.paused);
  CHECK(f.t == doctest::Approx(before.t + 0.01));
}

TEST_CASE("a hand placed inside the critical distance triggers free drive") {
  LiveSession s(live_config());
  drive(s, 20);
  const Vector3 tcp = s.engine().tcp();
  s.submit(HandPosition{tcp + Vector3(0.0, 0.0, 0.05)});
  bool free_drive = false;
  for (int i = 0; i < 2 && !free_drive; ++i) free_drive = s.tick().mode == ControlMode::FreeDrive;
  CHECK(free_drive);
  CHECK(s.last_frame().live_input);
  CHECK(s.last_frame().x_o_true == tcp + Vector3(0.0, 0.0, 0.05));
}

TEST_CASE("free-drive drag moves the TCP") {
  LiveSession s(live_config());
  drive(s, 5);
  const Vector3 tcp = s.engine().tcp();
  s.submit(HandPosition{tcp + Vector3(0.0, 0.0, 0.05)});
  drive(s, 2);
  const Vector3 held = s.engine().tcp();
  s.submit(FreeDriveDrag{{0.0, 0.02, 0.0}});
  const StreamFrame f = s.tick();
  CHECK(f.mode == ControlMode::FreeDrive);
  CHECK((s.engine().tcp() - held - Vector3(0.0, 0.02, 0.0)).norm() < 1e-3);
}

TEST_CASE("streamed hand input at 60 Hz is followed, then released") {
  LiveSession s(live_config());
  Vector3 last;
  int sent = 0;
  for (int k = 0; k < 300; ++k) {
    // A message lands when the 60 Hz clock passes the tick time.
    if (k * 60 / 100 >= sent) {
      last = Vector3(-0.75, -0.1 + 0.0005 * k, 0.6);
      s.submit(HandPosition{last});
      ++sent;
    }
    const StreamFrame f = s.tick();
    CHECK(f.live_input);
    CHECK(f.x_o_true == last);
  }
  CHECK(sent == 180);
  // 2 s after the last message the hand is handed back to the agent.
  int live = 0;
  std::optional<Vector3> resumed;
  for (int k = 0; k < 260; ++k) {
    const StreamFrame f = s.tick();
    if (f.live_input) ++live;
    else if (!resumed) resumed = f.x_o_true;
  }
  CHECK(live >= 199);
  CHECK(live <= 201);
  CHECK_FALSE(s.last_frame().live_input);
  // The agent picks up from the held point.
  REQUIRE(resumed.has_value());
  CHECK((*resumed - last).norm() < 0.01);
}

TEST_CASE("without input the session replays the offline run") {
  SimConfig c = live_config();
  c.duration = 5.0;
  const SimTrace offline = run(c);
  LiveSession s(c);
  for (const auto& r : offline) {
    const StreamFrame f = s.tick();
    CHECK_FALSE(f.live_input);
    CHECK(f.x_o_true == r.x_o_true);
    CHECK(f.x_r == r.x_r);
    CHECK(f.mode == r.mode);
  }
}

TEST_CASE("hand input is clamped to the workspace") {
  SessionOptions opts;
  LiveSession s(live_config(), opts);
  s.submit(HandPosition{{10.0, -10.0, 0.5}});
  const StreamFrame f = s.tick();
  CHECK(f.x_o_true == Vector3(opts.bounds.max.x(), opts.bounds.min.y(), 0.5));
}

TEST_CASE("haptics toggle") {
  SimConfig c = live_config();
  LiveSession s(c);
  const Vector3 tcp = s.engine().tcp();
  s.submit(HandPosition{tcp + Vector3(0.0, 0.0, 0.3)});
  CHECK(s.tick().haptic.displacement > 0.0);
  s.submit(SetHaptics{false});
  const StreamFrame f = s.tick();
  CHECK_FALSE(f.haptics_enabled);
  CHECK(f.haptic.displacement == 0.0);
}

TEST_CASE("reset replays a fresh world") {
  LiveSession a(live_config());
  drive(a, 50);
  a.submit(HandPosition{{-0.7, 0.1, 0.4}});
  drive(a, 10);
  a.submit(Pause{});
  a.submit(Reset{9});
  const auto replay = drive(a, 100);
  SimConfig c = live_config();
  c.seed = 9;
  LiveSession b(c);
  CHECK(replay == drive(b, 100));
}

TEST_CASE("same inputs on the same ticks give the same frames") {
  const auto script = [](LiveSession& s) {
    std::vector<std::string> out;
    for (int k = 0; k < 400; ++k) {
      if (k == 30) s.submit(HandPosition{{-0.75, 0.05, 0.32}});
      if (k == 90) s.submit(SetHaptics{false});
      if (k == 150) s.submit(Pause{});
      if (k == 160) s.submit(Resume{});
      out.push_back(encode(s.tick()));
    }
    return out;
  };
  LiveSession a(live_config()), b(live_config());
  CHECK(script(a) == script(b));
}

TEST_CASE("a collision stops the world with a fault") {
  SimConfig c = live_config();
  c.perception.noise_std = 0.0;
  LiveSession s(c);
  drive(s, 3);
  s.submit(HandPosition{s.engine().tcp()});
  StreamFrame f = s.tick();
  for (int i = 0; i < 5 && f.fault.empty(); ++i) f = s.tick();
  REQUIRE_FALSE(f.fault.empty());
  CHECK(f.fault.find("collision") != std::string::npos);
  const StreamFrame g = s.tick();
  CHECK(g.t == f.t);
  CHECK(g.fault == f.fault);
}

TEST_CASE("frames serialize losslessly") {
  LiveSession s(live_config());
  drive(s, 40);
  const StreamFrame f = s.tick();
  const std::string text = encode(f);
  CHECK(encode(decode_frame(text)) == text);
  const Json j = Json::parse(text);
  CHECK(j.at("type") == "frame");
  CHECK(j.at("protocol_version") == kProtocolVersion);
  CHECK_THROWS_AS(decode_frame(R"({"type":"frame"})"), ProtocolError);
}

TEST_CASE("input messages round trip") {
  const InputMessage msgs[] = {HandPosition{{0.1, 0.2, 0.3}}, Pause{}, Resume{}, Reset{42},
                               SetHaptics{false}, FreeDriveDrag{{0.0, 0.0, -0.01}}};
  for (const auto& m : msgs) {
    const InputMessage back = parse_input(encode(m));
    CHECK(back.index() == m.index());
    CHECK(encode(back) == encode(m));
  }
  CHECK(std::holds_alternative<Pause>(parse_input(R"({"type":"pause"})")));
  CHECK(std::get<Reset>(parse_input(R"({"type":"reset"})")).seed == 0);
}

TEST_CASE("malformed input is rejected") {
  const char* bad[] = {
      "",
      "null",
      "[1,2]",
      "{",
      R"({"position":[0,0,0]})",
      R"({"type":"teleport"})",
      R"({"type":"pause","protocol_version":2})",
      R"({"type":"pause","protocol_version":"1"})",
      R"({"type":"hand_position"})",
      R"({"type":"hand_position","position":[0,0]})",
      R"({"type":"hand_position","position":["a",0,0]})",
      R"({"type":"hand_position","position":[1e400,0,0]})",
      R"({"type":"reset","seed":-1})",
      R"({"type":"reset","seed":1.5})",
      R"({"type":"set_haptics"})",
      R"({"type":"set_haptics","on":1})",
      R"({"type":"free_drive_drag","displacement":{}})",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_input(text), ProtocolError);
  }
}

TEST_CASE("fuzzed input only ever raises ProtocolError") {
  std::mt19937_64 rng(5);
  const std::string seeds[] = {encode(HandPosition{{0.1, 0.2, 0.3}}), encode(Reset{7}),
                               encode(SetHaptics{true}), encode(FreeDriveDrag{{0, 0, 0}})};
  const std::string alphabet = "{}[]\":,.-0123456789eEtrufalsn abcxyz_\\";
  int accepted = 0;
  for (int k = 0; k < 20000; ++k) {
    std::string s = seeds[k % 4];
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits && !s.empty(); ++e) {
      const std::size_t pos = rng() % s.size();
      switch (rng() % 3) {
        case 0: s[pos] = alphabet[rng() % alphabet.size()]; break;
        case 1: s.erase(pos, 1); break;
        default: s.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
      }
    }
    try {
      (void)parse_input(s);
      ++accepted;
    } catch (const ProtocolError&) {
    }
  }
  CHECK(accepted < 20000);
}
