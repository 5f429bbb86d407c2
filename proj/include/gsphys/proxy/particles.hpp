#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gsphys/proxy/hull.hpp"

namespace gsphys::proxy {

struct ParticleSeed {
  std::vector<Vec3> positions;
  std::vector<double> rest_volume;
  std::vector<std::uint32_t> region;  // index into the region list
  double spacing = 0.0;
  Vec3 bbox_min = Vec3::Zero();  // hull bounds, reference frame for fractional predicates
  Vec3 bbox_max = Vec3::Zero();

  std::size_t size() const { return positions.size(); }
};

inline constexpr std::size_t kMinParticles = 64;

/// Spacing giving roughly `target_count` particles inside the hull.
double spacing_for_count(const ConvexHull& hull, std::size_t target_count = 4000);

/// Jittered regular grid (jitter length <= spacing/4) filtered to the hull
/// interior. rest_volume = spacing^3, all particles in region 0.
/// Throws Errc::config for non-positive spacing and Errc::too_few_particles
/// when fewer than kMinParticles survive.
ParticleSeed sample_particles(const ConvexHull& hull, double spacing, std::uint64_t seed = 0);

/// Geometric region test. Fractional half-spaces are measured against the
/// seed's bounding box (0 = min face, 1 = max face).
struct RegionPredicate {
  enum class Kind { all, half_space, sphere };
  Kind kind = Kind::all;
  int axis = 2;
  bool above = true;
  bool fractional = false;
  double value = 0.0;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;

  static RegionPredicate catch_all() { return {}; }
  bool contains(const Vec3& p, const Vec3& bbox_min, const Vec3& bbox_max) const;
  friend bool operator==(const RegionPredicate&, const RegionPredicate&) = default;
};

/// Labels every particle with the first matching predicate. The last
/// predicate must be a catch-all (Errc::config otherwise).
ParticleSeed assign_regions(ParticleSeed seed, std::span<const RegionPredicate> predicates);

}  // namespace gsphys::proxy
