#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsphys {

enum class Errc {
  invalid_rotation,
  invalid_input,
  io,
  schema,
  unsupported_format,
  truncated,
  magic_mismatch,
  version_mismatch,
  length_mismatch,
  degenerate_object,
  degenerate_geometry,
  too_few_particles,
  unstable_config,
  numerical_blowup,
  config,
  spec_invalid,
  translation_failed,
  transport,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

class NumericalBlowup : public Error {
 public:
  NumericalBlowup(std::int64_t frame, const std::string& what)
      : Error(Errc::numerical_blowup, what), frame_(frame) {}
  std::int64_t frame() const noexcept { return frame_; }

 private:
  std::int64_t frame_;
};

class UnstableConfig : public Error {
 public:
  UnstableConfig(double suggested_dt, const std::string& what)
      : Error(Errc::unstable_config, what), suggested_dt_(suggested_dt) {}
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  double suggested_dt_;
};

/// A pipeline failure tagged with the stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, Errc cause, const std::string& what)
      : Error(cause, stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace gsphys
