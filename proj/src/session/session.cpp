#include "gsphys/session/session.hpp"

#include <array>
#include <cmath>

#include <json.hpp>

namespace gsphys::session {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 4> kParams{"gravity", "material.surface_tension", "material.youngs_E",
                                                  "material.restitution"};

std::string canonical_param(std::string_view path) {
  if (path == "gravity") return "gravity";
  if (path == "surface_tension" || path == "material.surface_tension") return "material.surface_tension";
  if (path == "youngs_E" || path == "material.youngs_E" || path == "youngs_modulus" ||
      path == "material.youngs_modulus") {
    return "material.youngs_E";
  }
  if (path == "restitution" || path == "material.restitution") return "material.restitution";
  return {};
}

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::invalid_input, what); }

Vec3 vec3_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_array() || it->size() != 3) bad(std::string("'") + key + "' must be [x, y, z]");
  Vec3 v;
  for (int a = 0; a < 3; ++a) {
    if (!(*it)[a].is_number()) bad(std::string("'") + key + "' must hold numbers");
    v[a] = (*it)[a].get<double>();
  }
  if (!v.allFinite()) bad(std::string("'") + key + "' must be finite");
  return v;
}

}  // namespace

std::span<const std::string_view> settable_params() { return kParams; }

Command parse_command(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("command is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) bad("command needs a string 'type'");
  const std::string type = j["type"];
  if (type == "push") {
    Push p;
    p.direction = vec3_field(j, "dir");
    if (!(p.direction.norm() > 0.0)) bad("push direction must be nonzero");
    if (!j.contains("mag") || !j["mag"].is_number()) bad("push needs a numeric 'mag'");
    p.magnitude = j["mag"].get<double>();
    if (!(p.magnitude >= 0.0) || !std::isfinite(p.magnitude)) bad("push magnitude must be finite and >= 0");
    if (j.contains("point") && !j["point"].is_null()) p.point = vec3_field(j, "point");
    return p;
  }
  if (type == "set") {
    if (!j.contains("path") || !j["path"].is_string()) bad("set needs a string 'path'");
    SetParam s;
    s.path = canonical_param(j["path"].get<std::string>());
    if (s.path.empty()) {
      bad("'" + j["path"].get<std::string>() +
          "' cannot be changed at runtime; settable: gravity, material.surface_tension, material.youngs_E, "
          "material.restitution (other fields need a reset with a new spec)");
    }
    const json& v = j.contains("value") ? j["value"] : json();
    if (s.path == "gravity") {
      if (v.is_number()) {
        s.value = {0.0, 0.0, v.get<double>()};
      } else {
        s.value = {0, 0, 0};
        const Vec3 g = vec3_field(j, "value");
        s.value = {g.x(), g.y(), g.z()};
      }
    } else {
      if (!v.is_number()) bad("'" + s.path + "' needs a numeric value");
      s.value = {v.get<double>()};
    }
    for (double x : s.value) {
      if (!std::isfinite(x)) bad("parameter values must be finite");
    }
    return s;
  }
  if (type == "reset") return Reset{};
  if (type == "pause") return Pause{};
  if (type == "resume") return Resume{};
  bad("unknown command type '" + type + "'");
}

std::string to_json(const Command& command) {
  json j;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Push>) {
          j = {{"type", "push"}, {"dir", {c.direction.x(), c.direction.y(), c.direction.z()}}, {"mag", c.magnitude}};
          if (c.point) j["point"] = {c.point->x(), c.point->y(), c.point->z()};
        } else if constexpr (std::is_same_v<T, SetParam>) {
          j = {{"type", "set"}, {"path", c.path}};
          j["value"] = c.value.size() == 1 ? json(c.value[0]) : json(c.value);
        } else if constexpr (std::is_same_v<T, Reset>) {
          j = {{"type", "reset"}};
        } else if constexpr (std::is_same_v<T, Pause>) {
          j = {{"type", "pause"}};
        } else {
          j = {{"type", "resume"}};
        }
      },
      command);
  return j.dump();
}

std::string encode_hello(std::size_t gaussian_count, double fps, std::string_view params_json) {
  json j{{"type", "hello"},
         {"version", kProtocolVersion},
         {"gaussian_count", gaussian_count},
         {"fps", fps},
         {"frame",
          {{"header", "u64le frame_id"},
           {"block", "f32le timestamp; gaussian_count x record; alive bitset; u32le spawned_count; spawned records"},
           {"record_bytes", io::kRecordBytes},
           {"record", "f32le center[3], f32le cov[6] (xx xy xz yy yz zz)"},
           {"alive_bytes", (gaussian_count + 7) / 8},
           {"spawned_record_bytes", io::kSpawnedRecordBytes},
           {"spawned_record", "f32le center[3], f32le cov[6], u8 rgb[3], f32le opacity_logit"}}},
         {"params", json::parse(params_json)}};
  return j.dump();
}

std::vector<std::uint8_t> encode_frame_message(std::uint64_t id, const io::AnimFrame& frame,
                                               std::size_t gaussian_count) {
  std::vector<std::uint8_t> out(8);
  for (int b = 0; b < 8; ++b) out[b] = static_cast<std::uint8_t>(id >> (8 * b));
  io::encode_frame(frame, gaussian_count, out);
  return out;
}

io::AnimFrame decode_frame_message(std::span<const std::uint8_t> bytes, std::size_t gaussian_count,
                                   std::uint64_t& id) {
  if (bytes.size() < 8) throw Error(Errc::length_mismatch, "frame message shorter than its header");
  id = 0;
  for (int b = 0; b < 8; ++b) id |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  std::size_t offset = 8;
  io::AnimFrame frame = io::decode_frame(bytes, gaussian_count, offset);
  if (offset != bytes.size()) throw Error(Errc::length_mismatch, "trailing bytes after frame block");
  return frame;
}

Session::Session(spec::SimSpec spec, GaussianSet scene) : animator_(std::move(spec), std::move(scene)) {}

void Session::submit(Command command) {
  std::lock_guard lock(mutex_);
  queue_.push_back(std::move(command));
}

std::optional<Session::Tick> Session::tick() {
  std::deque<Command> commands;
  {
    std::lock_guard lock(mutex_);
    commands.swap(queue_);
  }
  Tick t;
  for (const auto& c : commands) apply(c, t.errors);

  if (emit_initial_) {
    emit_initial_ = false;
  } else if (paused_) {
    if (t.errors.empty()) return std::nullopt;
    return t;
  } else {
    animator_.step();
  }
  t.id = next_id_++;
  t.has_frame = true;
  t.frame = animator_.frame();
  return t;
}

void Session::apply(const Command& command, std::vector<std::string>& errors) {
  auto& sim = animator_.sim();
  try {
    if (const auto* p = std::get_if<Push>(&command)) {
      if (p->magnitude == 0.0) return;
      sim::ExternalForce f;
      f.kind = sim::ExternalForce::Kind::impulse;
      f.direction = p->direction;
      f.magnitude = p->magnitude;
      f.per_unit_mass = true;
      f.point = p->point;
      sim.apply_user_push(f);
    } else if (const auto* s = std::get_if<SetParam>(&command)) {
      if (s->path == "gravity") {
        sim.set_gravity(Vec3(s->value.at(0), s->value.at(1), s->value.at(2)));
      } else if (s->path == "material.surface_tension") {
        sim.set_surface_tension(s->value.at(0));
      } else if (s->path == "material.youngs_E") {
        sim.set_youngs_modulus(s->value.at(0));
      } else if (s->path == "material.restitution") {
        sim.set_restitution(s->value.at(0));
      } else {
        errors.push_back("unknown parameter " + s->path);
      }
    } else if (std::holds_alternative<Reset>(command)) {
      animator_.reset();
      emit_initial_ = true;
      paused_ = false;
    } else if (std::holds_alternative<Pause>(command)) {
      paused_ = true;
    } else if (std::holds_alternative<Resume>(command)) {
      paused_ = false;
    }
  } catch (const Error& e) {
    errors.push_back(e.what());
  }
}

std::string Session::hello() const { return encode_hello(gaussian_count(), fps(), params_json()); }

std::vector<std::uint8_t> Session::encode(const Tick& tick) const {
  return encode_frame_message(tick.id, tick.frame, gaussian_count());
}

std::string Session::params_json() const {
  const auto& sim = animator_.sim();
  const Vec3 g = sim.world().gravity;
  json params;
  params["gravity"] = {{"value", {g.x(), g.y(), g.z()}}, {"min", -30.0}, {"max", 30.0}, {"enabled", true}};
  const sim::Material* elastic = nullptr;
  const sim::Material* fluid = nullptr;
  for (const auto& m : sim.materials()) {
    if (m.kind == sim::MaterialKind::elastic && !elastic) elastic = &m;
    if (m.kind == sim::MaterialKind::fluid && !fluid) fluid = &m;
  }
  params["material.youngs_E"] = {
      {"value", elastic ? elastic->youngs_modulus : 0.0}, {"min", 1e3}, {"max", 1e8}, {"enabled", elastic != nullptr}};
  params["material.surface_tension"] = {
      {"value", fluid ? fluid->surface_tension : 0.0}, {"min", 0.0}, {"max", 5.0}, {"enabled", fluid != nullptr}};
  params["material.restitution"] = {
      {"value", sim.materials().empty() ? 0.0 : sim.materials().front().restitution},
      {"min", 0.0},
      {"max", 1.0},
      {"enabled", true}};
  return params.dump();
}

}  // namespace gsphys::session
