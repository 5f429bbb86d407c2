#pragma once

#include <optional>

#include "gsphys/core/types.hpp"

namespace gsphys::sim {

struct GroundPlane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();

  double signed_distance(const Vec3& x) const { return normal.dot(x - point); }
  friend bool operator==(const GroundPlane&, const GroundPlane&) = default;
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  friend bool operator==(const Box&, const Box&) = default;
};

struct WorldConfig {
  Vec3 gravity{0.0, 0.0, -9.81};
  std::optional<GroundPlane> ground;
  double fps = 30.0;
  int substeps = 0;  // 0: derived from the CFL bound
  int grid_resolution = 64;
  std::optional<Box> domain;  // simulation bounds; padded particle bounds when absent

  double frame_dt() const { return 1.0 / fps; }
  friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

struct ExternalForce {
  enum class Kind { impulse, continuous };
  Kind kind = Kind::impulse;
  Vec3 direction = Vec3::UnitZ();
  // N*s for impulses, N for continuous forces; with per_unit_mass the value is
  // a velocity change (m/s) or an acceleration (m/s^2) of the affected mass.
  double magnitude = 0.0;
  bool per_unit_mass = false;
  std::optional<Vec3> point;    // whole body when absent
  std::optional<double> radius;  // selection radius around `point`
  double start = 0.0;  // impulse time, or continuous window start
  double end = 0.0;    // continuous window end

  friend bool operator==(const ExternalForce&, const ExternalForce&) = default;
};

}  // namespace gsphys::sim
