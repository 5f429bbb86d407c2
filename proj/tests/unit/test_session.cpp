#include <doctest.h>

#include "gsphys/io/anim.hpp"
#include "gsphys/io/ply.hpp"
#include "gsphys/session/pipeline.hpp"
#include "gsphys/session/server.hpp"
#include "gsphys/session/session.hpp"
#include "gsphys/session/synthetic.hpp"
#include "gsphys/spec/translate.hpp"
#include "temp_dir.hpp"
#include "ws_client.hpp"

#include <cstdlib>
#include <thread>

#include <json.hpp>

using namespace gsphys;
using namespace gsphys::session;
using gsphys::testing::TempDir;
using gsphys::testing::WsClient;

namespace {

spec::SimSpec exemplar(const char* name) {
  const auto* ex = spec::builtin_bundle().find(name);
  REQUIRE(ex != nullptr);
  auto s = spec::parse_spec(ex->text);
  s.particle_count = 600;  // keep the unit suite quick
  return s;
}

GaussianSet cube(std::size_t count = 1500) { return synthetic_scene(SyntheticShape::cube, count, 3); }

double mean_z(const io::AnimFrame& f) {
  double z = 0.0;
  for (const auto& c : f.centers) z += c.z();
  return z / static_cast<double>(f.size());
}

std::vector<std::uint8_t> block(const std::vector<std::uint8_t>& message) { return {message.begin() + 8, message.end()}; }

int run_cli(const std::string& args, std::string* output = nullptr) {
  TempDir dir;
  const auto log = dir / "out.txt";
  const std::string cmd = std::string(PHYSTALK_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    const auto bytes = gsphys::testing::read_bytes(log);
    output->assign(bytes.begin(), bytes.end());
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("synthetic scenes are deterministic and stand on the ground") {
  for (auto shape : {SyntheticShape::cube, SyntheticShape::vase}) {
    const auto a = synthetic_scene(shape, 500, 7);
    const auto b = synthetic_scene(shape, 500, 7);
    REQUIRE(a.size() == 500);
    CHECK(a.object_mask.size() == 500);
    double lo = 1e9;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.gaussians[i].center == b.gaussians[i].center);
      lo = std::min(lo, a.gaussians[i].center.z());
    }
    CHECK(lo >= 0.0);
    CHECK(lo < 0.01);
  }
  CHECK_THROWS_AS(parse_shape("teapot"), Error);
}

TEST_CASE("elastic jump exemplar leaves the ground") {
  const auto s = exemplar("elastic_jump");
  const auto seq = run_offline(s, cube());
  REQUIRE(seq.frames.size() == 60);
  const double rest = mean_z(seq.frames.front());
  double peak = rest;
  for (const auto& f : seq.frames) peak = std::max(peak, mean_z(f));
  // 2.5 m/s upward would reach about 0.3 m in free flight.
  CHECK(peak > rest + 0.1);
  CHECK(seq.frames.front().timestamp == 0.0);
  CHECK(seq.frames.back().timestamp == doctest::Approx(59.0 / 30.0));
}

TEST_CASE("rigid drop comes to rest") {
  const auto s = exemplar("rigid_drop");
  const auto seq = run_offline(s, cube());
  REQUIRE(seq.frames.size() == 60);
  // The last half second is settled.
  for (std::size_t k = seq.frames.size() - 15; k < seq.frames.size(); ++k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < seq.frames[k].size(); ++i) {
      worst = std::max(worst, (seq.frames[k].centers[i] - seq.frames[k - 1].centers[i]).norm());
    }
    CHECK(worst < 1e-4);
  }
  double lowest = 1e9;
  for (const auto& c : seq.frames.back().centers) lowest = std::min(lowest, c.z());
  CHECK(lowest > -0.02);
  CHECK(lowest < 0.05);
}

TEST_CASE("run_offline writes byte-identical files for the same input") {
  TempDir dir;
  auto s = exemplar("elastic_jump");
  s.duration = 0.5;
  run_offline(s, cube(), dir / "a.gsanim");
  run_offline(s, cube(), dir / "b.gsanim");
  const auto a = gsphys::testing::read_bytes(dir / "a.gsanim");
  CHECK(!a.empty());
  CHECK(a == gsphys::testing::read_bytes(dir / "b.gsanim"));
}

TEST_CASE("pipeline errors name their stage") {
  auto s = exemplar("elastic_jump");
  s.scene.ply = "/nonexistent/scene.ply";
  try {
    load_scene(s);
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "load");
    CHECK(std::string(e.what()).rfind("load: ", 0) == 0);
    CHECK(e.code() == Errc::io);
  }

  s.scene.object = sim::Box{Vec3(5, 5, 5), Vec3(6, 6, 6)};
  TempDir dir;
  io::save_ply(cube(200), dir / "c.ply");
  try {
    load_scene(s, dir / "c.ply");
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "load");
    CHECK(e.code() == Errc::degenerate_object);
  }

  // Two Gaussians cannot make a hull.
  GaussianSet tiny;
  tiny.gaussians.resize(2);
  tiny.gaussians[1].center = Vec3(0.1, 0, 0);
  tiny.select_all();
  try {
    Animator a(exemplar("elastic_jump"), tiny);
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK((e.stage() == "prune" || e.stage() == "hull"));
  }
}

TEST_CASE("commands parse, serialize and reject bad input") {
  const Command push = parse_command(R"({"type":"push","dir":[0,0,1],"mag":2.5,"point":[0.1,0.2,0.3]})");
  const auto& p = std::get<Push>(push);
  CHECK(p.direction == Vec3(0, 0, 1));
  CHECK(p.magnitude == 2.5);
  REQUIRE(p.point);
  CHECK(*p.point == Vec3(0.1, 0.2, 0.3));

  for (const Command& c : {push, Command(parse_command(R"({"type":"push","dir":[1,0,0],"mag":1})")),
                           Command(SetParam{"gravity", {0, 0, -1.62}}), Command(SetParam{"material.restitution", {0.5}}),
                           Command(Reset{}), Command(Pause{}), Command(Resume{})}) {
    CHECK(parse_command(to_json(c)) == c);
  }

  CHECK(std::get<SetParam>(parse_command(R"({"type":"set","path":"surface_tension","value":0.3})")).path ==
        "material.surface_tension");
  CHECK(std::get<SetParam>(parse_command(R"({"type":"set","path":"youngs_E","value":1e5})")).path ==
        "material.youngs_E");
  CHECK(std::get<SetParam>(parse_command(R"({"type":"set","path":"gravity","value":-1.62})")).value ==
        std::vector<double>{0, 0, -1.62});

  for (const char* bad : {"not json", "[]", R"({"kind":"push"})", R"({"type":"jump"})",
                          R"({"type":"push","dir":[0,0],"mag":1})", R"({"type":"push","dir":[0,0,0],"mag":1})",
                          R"({"type":"push","dir":[0,0,1],"mag":-1})", R"({"type":"push","dir":[0,0,1]})",
                          R"({"type":"set","path":"material.density","value":5})",
                          R"({"type":"set","path":"gravity","value":"down"})",
                          R"({"type":"set","path":"restitution","value":[1,2]})"}) {
    CAPTURE(bad);
    try {
      parse_command(bad);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invalid_input);
    }
  }
  try {
    parse_command(R"({"type":"set","path":"regions","value":1})");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("settable") != std::string::npos);
  }
  CHECK(settable_params().size() == 4);
}

TEST_CASE("frame messages carry a little-endian id before the frame block") {
  const auto set = cube(100);
  io::AnimFrame f = io::rest_frame(set, 0.5);
  f.alive[3] = 0;
  const auto msg = encode_frame_message(0x0102030405060708ull, f, set.size());
  CHECK(msg[0] == 0x08);
  CHECK(msg[7] == 0x01);
  CHECK(msg.size() == 8 + 4 + 100 * io::kRecordBytes + 13 + 4);
  std::uint64_t id = 0;
  const auto back = decode_frame_message(msg, set.size(), id);
  CHECK(id == 0x0102030405060708ull);
  CHECK(back.alive[3] == 0);
  CHECK(back.centers[5].isApprox(f.centers[5], 1e-6));
  auto longer = msg;
  longer.push_back(0);
  CHECK_THROWS_AS(decode_frame_message(longer, set.size(), id), Error);
  CHECK_THROWS_AS(decode_frame_message(std::vector<std::uint8_t>(5), set.size(), id), Error);
}

TEST_CASE("session ticks, pauses and resets") {
  Session session(exemplar("elastic_jump"), cube());
  const auto hello = nlohmann::json::parse(session.hello());
  CHECK(hello["type"] == "hello");
  CHECK(hello["version"] == kProtocolVersion);
  CHECK(hello["gaussian_count"] == 1500);
  CHECK(hello["fps"] == 30.0);
  CHECK(hello["frame"]["record_bytes"] == 36);
  CHECK(hello["params"]["gravity"]["value"][2] == -9.81);
  CHECK(hello["params"]["material.youngs_E"]["enabled"] == true);
  CHECK(hello["params"]["material.surface_tension"]["enabled"] == false);

  auto t0 = session.tick();
  REQUIRE(t0);
  CHECK(t0->id == 0);
  CHECK(t0->frame.timestamp == 0.0);
  const auto first = session.encode(*t0);

  std::uint64_t last = 0;
  for (int k = 0; k < 5; ++k) {
    auto t = session.tick();
    REQUIRE(t);
    CHECK(t->id == last + 1);
    last = t->id;
  }
  session.submit(Pause{});
  CHECK(!session.tick());
  CHECK(session.paused());
  session.submit(SetParam{"gravity", {0, 0, -1.62}});
  CHECK(!session.tick());
  CHECK(session.animator().sim().world().gravity.z() == -1.62);
  session.submit(Resume{});
  auto t = session.tick();
  REQUIRE(t);
  CHECK(t->id == last + 1);
  CHECK(t->frame.timestamp > 0.1);

  session.submit(Reset{});
  auto r = session.tick();
  REQUIRE(r);
  CHECK(r->id > t->id);
  CHECK(block(session.encode(*r)) == block(first));
}

TEST_CASE("an upward push lifts the body, then gravity brings it down") {
  auto s = exemplar("elastic_jump");
  s.forces.clear();
  Session session(s, cube());
  double rest = 0.0;
  for (int k = 0; k < 10; ++k) rest = mean_z(session.tick()->frame);  // let it settle on the ground
  session.submit(Push{Vec3(0, 0, 1), 2.0, std::nullopt});
  std::vector<double> z;
  for (int k = 0; k < 30; ++k) z.push_back(mean_z(session.tick()->frame));
  const auto peak = std::max_element(z.begin(), z.end());
  // Within 0.5 s (15 frames) the body is clearly higher.
  CHECK(*std::max_element(z.begin(), z.begin() + 15) > rest + 0.05);
  CHECK(peak - z.begin() < 15);
  CHECK(z.back() < *peak - 0.05);
}

TEST_CASE("session errors are reported per tick and do not stop the session") {
  auto s = exemplar("rigid_drop");
  Session session(s, cube());
  session.tick();
  session.submit(SetParam{"material.restitution", {5.0}});
  auto t = session.tick();
  REQUIRE(t);
  CHECK(t->has_frame);
  CHECK(t->errors.size() == 1);
  CHECK(session.tick()->errors.empty());
}

TEST_CASE("websocket clients get HELLO, then frames with increasing ids") {
  SessionServer server(exemplar("elastic_jump"), cube());
  server.start();
  REQUIRE(server.port() != 0);

  const auto t0 = std::chrono::steady_clock::now();
  WsClient client("127.0.0.1", server.port());
  auto hello = client.receive(std::chrono::milliseconds(1000));
  REQUIRE(hello);
  REQUIRE(hello->text);
  const auto h = nlohmann::json::parse(hello->data);
  CHECK(h["type"] == "hello");
  const std::size_t count = h["gaussian_count"];
  CHECK(count == 1500);

  auto first = client.receive(std::chrono::milliseconds(1000));
  REQUIRE(first);
  CHECK(!first->text);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(1));

  std::uint64_t prev = 0;
  auto frame = decode_frame_message(first->bytes(), count, prev);
  CHECK(frame.size() == count);
  for (int k = 0; k < 5; ++k) {
    auto m = client.receive(std::chrono::milliseconds(1000));
    REQUIRE(m);
    std::uint64_t id = 0;
    decode_frame_message(m->bytes(), count, id);
    CHECK(id > prev);
    prev = id;
  }

  client.send("{\"type\":\"fly\"}");
  bool got_error = false;
  for (int k = 0; k < 20 && !got_error; ++k) {
    auto m = client.receive(std::chrono::milliseconds(1000));
    REQUIRE(m);
    if (m->text) {
      const auto j = nlohmann::json::parse(m->data);
      CHECK(j["type"] == "error");
      got_error = true;
    }
  }
  CHECK(got_error);
  server.stop();
}

TEST_CASE("a push over the wire raises the mean height, which then falls") {
  auto s = exemplar("elastic_jump");
  s.forces.clear();
  SessionServer server(s, cube());
  server.start();
  WsClient client("127.0.0.1", server.port());
  const std::size_t count = nlohmann::json::parse(client.receive(std::chrono::milliseconds(1000))->data)["gaussian_count"];

  auto next_frame = [&] {
    for (;;) {
      auto m = client.receive(std::chrono::milliseconds(2000));
      REQUIRE(m);
      if (m->text) continue;
      std::uint64_t id = 0;
      return decode_frame_message(m->bytes(), count, id);
    }
  };
  io::AnimFrame f;
  for (int k = 0; k < 10; ++k) f = next_frame();
  const double rest = mean_z(f);
  const double pushed_at = f.timestamp;
  client.send(R"({"type":"push","dir":[0,0,1],"mag":2.0})");

  double peak = rest;
  double peak_t = pushed_at;
  double last = rest;
  while (f.timestamp < pushed_at + 1.2) {
    f = next_frame();
    last = mean_z(f);
    if (last > peak) {
      peak = last;
      peak_t = f.timestamp;
    }
  }
  CHECK(peak > rest + 0.05);
  CHECK(peak_t - pushed_at < 0.5);
  CHECK(last < peak - 0.05);
  server.stop();
}

TEST_CASE("a client that never reads does not stall the loop or other clients") {
  SessionServer server(exemplar("elastic_jump"), cube());
  server.start();
  WsClient idle("127.0.0.1", server.port());  // never reads
  WsClient active("127.0.0.1", server.port());
  const std::size_t count = nlohmann::json::parse(active.receive(std::chrono::milliseconds(1000))->data)["gaussian_count"];
  const auto before = server.stats().frames;
  int received = 0;
  const auto until = std::chrono::steady_clock::now() + std::chrono::milliseconds(1500);
  while (std::chrono::steady_clock::now() < until) {
    auto m = active.receive(std::chrono::milliseconds(1000));
    REQUIRE(m);
    if (!m->text) {
      std::uint64_t id = 0;
      CHECK(decode_frame_message(m->bytes(), count, id).size() == count);
      ++received;
    }
  }
  CHECK(received >= 5);
  CHECK(server.stats().frames - before >= 5);
  CHECK(server.client_count() == 2);
  server.stop();
}

TEST_CASE("binding a taken port fails with an io error") {
  SessionServer a(exemplar("rigid_drop"), cube(300));
  a.start();
  SessionServer b(exemplar("rigid_drop"), cube(300), {"127.0.0.1", a.port()});
  try {
    b.start();
    FAIL("second bind succeeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}

TEST_CASE("command line exit codes") {
  TempDir dir;
  std::string out;
  CHECK(run_cli("", &out) == 2);
  CHECK(run_cli("simulate --spec x.spec", &out) == 2);
  CHECK(run_cli("simulate --scene /nonexistent.ply --spec /nonexistent.spec --out x.gsanim", &out) == 1);
  CHECK(out.find("spec: ") != std::string::npos);

  const auto ply = dir / "cube.ply";
  REQUIRE(run_cli("synth --shape cube --count 1500 --out " + ply.string(), &out) == 0);

  const auto spec_path = dir / "jump.spec";
  auto s = exemplar("elastic_jump");
  gsphys::testing::write_text(spec_path, spec::serialize(s));
  CHECK(run_cli("simulate --scene /nonexistent.ply --spec " + spec_path.string() + " --out x.gsanim", &out) == 1);
  CHECK(out.find("load: ") != std::string::npos);

  const auto anim = dir / "jump.gsanim";
  CHECK(run_cli("simulate --scene " + ply.string() + " --spec " + spec_path.string() + " --frames 12 --out " +
                    anim.string(),
                &out) == 0);
  CHECK(io::read_anim(anim).frames.size() == 12);

  const auto prompted = dir / "prompted.spec";
  CHECK(run_cli("prompt --offline --scene " + ply.string() + " --prompt \"push it forward\" --out-spec " +
                    prompted.string(),
                &out) == 0);
  const auto bytes = gsphys::testing::read_bytes(prompted);
  const auto parsed = spec::parse_spec(std::string(bytes.begin(), bytes.end()));
  REQUIRE(parsed.forces.size() == 1);
  CHECK(parsed.forces[0].direction.y() > 0.0);
  CHECK(parsed.scene.ply == ply.string());

  const auto camera = dir / "cam.json";
  gsphys::testing::write_text(camera, R"({"eye":[0.8,-0.8,0.5],"target":[0,0,0.1],"width":64,"height":64})");
  CHECK(run_cli("render --anim " + anim.string() + " --camera " + camera.string() + " --every 6 --out-dir " +
                    (dir / "png").string(),
                &out) == 0);
  CHECK(std::filesystem::exists(dir / "png" / "frame_00006.png"));
  CHECK(run_cli("render --anim " + anim.string() + " --camera " + camera.string() + " --scene " +
                    (dir / "missing.ply").string() + " --out-dir " + (dir / "png").string(),
                &out) == 1);
}
