#include "gsphys/proxy/particles.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "gsphys/core/error.hpp"

namespace gsphys::proxy {

double spacing_for_count(const ConvexHull& hull, std::size_t target_count) {
  return std::cbrt(hull.volume() / static_cast<double>(std::max<std::size_t>(1, target_count)));
}

ParticleSeed sample_particles(const ConvexHull& hull, double spacing, std::uint64_t seed) {
  if (!(spacing > 0.0)) throw Error(Errc::config, "particle spacing must be positive");
  const Vec3 lo = hull.bbox_min(), hi = hull.bbox_max();
  const Vec3 mid = 0.5 * (lo + hi);
  const double margin = 1e-9 * (hi - lo).norm();

  std::array<long, 3> n{};
  Vec3 origin;
  for (int a = 0; a < 3; ++a) {
    n[a] = std::max(1L, static_cast<long>(std::ceil((hi[a] - lo[a]) / spacing)));
    origin[a] = mid[a] - 0.5 * static_cast<double>(n[a] - 1) * spacing;
  }
  const double cells = static_cast<double>(n[0]) * static_cast<double>(n[1]) * static_cast<double>(n[2]);
  if (cells > 5e7) throw Error(Errc::config, "particle spacing is too fine for the object size");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.25 * spacing / std::sqrt(3.0), 0.25 * spacing / std::sqrt(3.0));
  ParticleSeed out;
  out.spacing = spacing;
  out.bbox_min = lo;
  out.bbox_max = hi;
  for (long k = 0; k < n[2]; ++k) {
    for (long j = 0; j < n[1]; ++j) {
      for (long i = 0; i < n[0]; ++i) {
        // draw jitter unconditionally so the stream does not depend on the filter
        const Vec3 offset(jitter(rng), jitter(rng), jitter(rng));
        const Vec3 p = origin + spacing * Vec3(static_cast<double>(i), static_cast<double>(j),
                                               static_cast<double>(k)) + offset;
        if (hull.plane_distance(p) < -margin) out.positions.push_back(p);
      }
    }
  }
  if (out.positions.size() < kMinParticles) {
    std::ostringstream msg;
    msg << "spacing " << spacing << " yields only " << out.positions.size() << " particles (need at least "
        << kMinParticles << "); try a spacing of " << 0.8 * std::cbrt(hull.volume() / kMinParticles) << " or less";
    throw Error(Errc::too_few_particles, msg.str());
  }
  out.rest_volume.assign(out.positions.size(), spacing * spacing * spacing);
  out.region.assign(out.positions.size(), 0);
  return out;
}

bool RegionPredicate::contains(const Vec3& p, const Vec3& bbox_min, const Vec3& bbox_max) const {
  switch (kind) {
    case Kind::all: return true;
    case Kind::half_space: {
      const double cut = fractional ? bbox_min[axis] + value * (bbox_max[axis] - bbox_min[axis]) : value;
      return above ? p[axis] > cut : p[axis] < cut;
    }
    case Kind::sphere: return (p - center).norm() <= radius;
  }
  return false;
}

ParticleSeed assign_regions(ParticleSeed seed, std::span<const RegionPredicate> predicates) {
  if (predicates.empty() || predicates.back().kind != RegionPredicate::Kind::all) {
    throw Error(Errc::config, "region list must end with a catch-all region");
  }
  for (std::size_t i = 0; i < seed.size(); ++i) {
    for (std::size_t r = 0; r < predicates.size(); ++r) {
      if (predicates[r].contains(seed.positions[i], seed.bbox_min, seed.bbox_max)) {
        seed.region[i] = static_cast<std::uint32_t>(r);
        break;
      }
    }
  }
  return seed;
}

}  // namespace gsphys::proxy
