#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "gsphys/core/types.hpp"

namespace gsphys::proxy {

struct ConvexHull {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;  // counter-clockwise seen from outside
  std::vector<Vec3> normals;                        // unit, outward
  std::vector<double> offsets;                      // normals[f].dot(x) == offsets[f] on face f

  Vec3 bbox_min() const;
  Vec3 bbox_max() const;
  double bbox_diagonal() const { return (bbox_max() - bbox_min()).norm(); }
  double volume() const;
  std::size_t edge_count() const { return faces.size() * 3 / 2; }

  /// max over faces of n.x - d: positive outside, <= 0 inside.
  double plane_distance(const Vec3& x) const;
  bool contains(const Vec3& x, double tolerance = 0.0) const { return plane_distance(x) <= tolerance; }
};

/// Quickhull over the input points. Needs at least four non-coplanar points;
/// collinear or coplanar input raises Errc::degenerate_geometry. If the
/// result fails its topology check the construction is retried on slightly
/// perturbed copies of the points.
ConvexHull build_hull(std::span<const Vec3> points);

/// Watertightness and Euler characteristic check (V - E + F == 2, every
/// directed edge paired with its reverse exactly once).
bool is_watertight(const ConvexHull& hull);

}  // namespace gsphys::proxy
