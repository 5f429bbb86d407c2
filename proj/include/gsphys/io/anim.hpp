#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gsphys/core/covariance.hpp"
#include "gsphys/core/gaussian.hpp"

namespace gsphys::io {

/// A Gaussian inserted by hole filling; not part of the base set.
struct SpawnedGaussian {
  Vec3 center = Vec3::Zero();
  SymCov covariance;
  std::array<std::uint8_t, 3> rgb{};
  double opacity_logit = 0.0;
};

struct AnimFrame {
  double timestamp = 0.0;
  std::vector<Vec3> centers;
  std::vector<SymCov> covariances;
  std::vector<std::uint8_t> alive;  // one flag per base Gaussian
  // Every spawned Gaussian alive at this frame; spawns persist, so a frame
  // lists earlier spawns first and appends this frame's new ones.
  std::vector<SpawnedGaussian> spawned;

  std::size_t size() const { return centers.size(); }
};

/// Rest-pose frame of a set: base centers and covariances, all alive.
AnimFrame rest_frame(const GaussianSet& base, double timestamp = 0.0);

struct AnimSequence {
  GaussianSet base;  // not stored in .gsanim; empty after read_anim
  std::vector<AnimFrame> frames;
  double fps = 30.0;

  std::size_t gaussian_count() const { return frames.empty() ? base.size() : frames.front().size(); }
};

inline constexpr std::uint32_t kAnimVersion = 1;
inline constexpr std::size_t kRecordBytes = 36;
inline constexpr std::size_t kSpawnedRecordBytes = 43;

/// Appends one frame block (timestamp, fixed records, alive bitset, spawned
/// block) in the .gsanim layout. Throws Errc::length_mismatch when the
/// frame's arrays disagree with `gaussian_count`.
void encode_frame(const AnimFrame& frame, std::size_t gaussian_count, std::vector<std::uint8_t>& out);

/// Decodes one frame block starting at `offset`, advancing it.
/// Throws Errc::length_mismatch if the buffer ends early.
AnimFrame decode_frame(std::span<const std::uint8_t> bytes, std::size_t gaussian_count, std::size_t& offset);

std::vector<std::uint8_t> encode_anim(const AnimSequence& seq);
AnimSequence decode_anim(std::span<const std::uint8_t> bytes);

void write_anim(const AnimSequence& seq, const std::filesystem::path& path);
/// Errors: Errc::magic_mismatch, Errc::version_mismatch, Errc::length_mismatch.
AnimSequence read_anim(const std::filesystem::path& path);

/// Base set posed by `frame`: centers replaced, covariances refit into
/// rotation/log-scale, dead Gaussians dropped and spawned ones appended.
GaussianSet materialize_frame(const GaussianSet& base, const AnimFrame& frame);

}  // namespace gsphys::io
