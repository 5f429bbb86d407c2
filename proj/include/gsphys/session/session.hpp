#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gsphys/session/pipeline.hpp"

namespace gsphys::session {

inline constexpr int kProtocolVersion = 1;

struct Push {
  Vec3 direction = Vec3::UnitZ();
  double magnitude = 0.0;  // velocity change of the selected particles, m/s
  std::optional<Vec3> point;

  friend bool operator==(const Push&, const Push&) = default;
};

struct SetParam {
  std::string path;  // one of settable_params()
  std::vector<double> value;  // one number, or three for gravity

  friend bool operator==(const SetParam&, const SetParam&) = default;
};

struct Reset {
  friend bool operator==(const Reset&, const Reset&) = default;
};
struct Pause {
  friend bool operator==(const Pause&, const Pause&) = default;
};
struct Resume {
  friend bool operator==(const Resume&, const Resume&) = default;
};

using Command = std::variant<Push, SetParam, Reset, Pause, Resume>;

/// Runtime-editable parameters; anything structural needs a new session.
std::span<const std::string_view> settable_params();

/// Parses one client message, e.g. {"type":"push","dir":[0,0,1],"mag":2}.
/// Unknown types, malformed fields and parameters outside the whitelist
/// raise Errc::invalid_input.
Command parse_command(std::string_view text);
std::string to_json(const Command& command);

/// HELLO payload: version, counts, fps, frame layout and parameter bounds.
std::string encode_hello(std::size_t gaussian_count, double fps, std::string_view params_json = "{}");

/// FRAME payload: frame id (u64 little-endian) followed by one .gsanim
/// frame block.
std::vector<std::uint8_t> encode_frame_message(std::uint64_t id, const io::AnimFrame& frame,
                                               std::size_t gaussian_count);
io::AnimFrame decode_frame_message(std::span<const std::uint8_t> bytes, std::size_t gaussian_count,
                                   std::uint64_t& id);

/// One interactive simulation. tick() is called by the single stepping
/// loop; submit() may be called from any thread.
class Session {
 public:
  Session(spec::SimSpec spec, GaussianSet scene);

  void submit(Command command);

  struct Tick {
    std::uint64_t id = 0;
    bool has_frame = false;  // false for an errors-only tick while paused
    io::AnimFrame frame;
    std::vector<std::string> errors;  // commands that could not be applied
  };

  /// Applies every queued command, then steps unless paused. The first
  /// tick and the tick after a reset emit the initial frame without
  /// stepping. While paused it returns nothing, or only the errors.
  std::optional<Tick> tick();

  std::string hello() const;
  std::vector<std::uint8_t> encode(const Tick& tick) const;

  bool paused() const { return paused_; }
  std::size_t gaussian_count() const { return animator_.gaussian_count(); }
  double fps() const { return animator_.spec().fps; }
  const Animator& animator() const { return animator_; }

 private:
  void apply(const Command& command, std::vector<std::string>& errors);
  std::string params_json() const;

  Animator animator_;
  std::mutex mutex_;
  std::deque<Command> queue_;
  bool paused_ = false;
  bool emit_initial_ = true;
  std::uint64_t next_id_ = 0;
};

}  // namespace gsphys::session
