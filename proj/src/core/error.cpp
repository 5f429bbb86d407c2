#include "gsphys/core/error.hpp"

namespace gsphys {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_rotation: return "invalid-rotation";
    case Errc::invalid_input: return "invalid-input";
    case Errc::io: return "io";
    case Errc::schema: return "schema";
    case Errc::unsupported_format: return "unsupported-format";
    case Errc::truncated: return "truncated";
    case Errc::magic_mismatch: return "magic-mismatch";
    case Errc::version_mismatch: return "version-mismatch";
    case Errc::length_mismatch: return "length-mismatch";
    case Errc::degenerate_object: return "degenerate-object";
    case Errc::degenerate_geometry: return "degenerate-geometry";
    case Errc::too_few_particles: return "too-few-particles";
    case Errc::unstable_config: return "unstable-config";
    case Errc::numerical_blowup: return "numerical-blowup";
    case Errc::config: return "config";
    case Errc::spec_invalid: return "spec-invalid";
    case Errc::translation_failed: return "translation-failed";
    case Errc::transport: return "transport";
  }
  return "unknown";
}

}  // namespace gsphys
