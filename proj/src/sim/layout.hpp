#pragma once

#include <array>
#include <optional>

#include "gsphys/sim/world.hpp"

namespace gsphys::sim::detail {

// Padding of the default domain, in multiples of the largest particle extent.
inline constexpr double kSidePad = 1.0;
inline constexpr double kTopPad = 1.5;
inline constexpr double kFloorPad = 0.15;
inline constexpr double kMinCellSpacings = 2.0;

Box default_domain(const Vec3& lo, const Vec3& hi, const std::optional<GroundPlane>& ground);

struct GridLayout {
  Vec3 origin = Vec3::Zero();
  double dx = 1.0;
  std::array<int, 3> n{0, 0, 0};  // nodes per axis

  std::size_t node_count() const { return std::size_t(n[0]) * n[1] * n[2]; }
  std::size_t index(int i, int j, int k) const { return (std::size_t(i) * n[1] + j) * n[2] + k; }
  Vec3 node_position(int i, int j, int k) const { return origin + dx * Vec3(i, j, k); }
};

/// Cell size is the domain's longest extent over `resolution`, but never
/// below two particle spacings: MPM needs several particles per cell.
GridLayout make_layout(const Box& domain, double spacing, int resolution);

}  // namespace gsphys::sim::detail
