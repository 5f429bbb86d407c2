#include "layout.hpp"

#include <algorithm>
#include <cmath>

namespace gsphys::sim::detail {

Box default_domain(const Vec3& lo, const Vec3& hi, const std::optional<GroundPlane>& ground) {
  const double extent = std::max((hi - lo).maxCoeff(), 1e-6);
  Box box;
  box.min = lo.array() - kSidePad * extent;
  box.max = hi.array() + kSidePad * extent;
  box.max.z() = hi.z() + kTopPad * extent;
  if (ground) {
    box.min.z() = std::min(lo.z(), ground->point.z()) - kFloorPad * extent;
  }
  return box;
}

GridLayout make_layout(const Box& domain, double spacing, int resolution) {
  const Vec3 extent = domain.max - domain.min;
  GridLayout g;
  g.origin = domain.min;
  g.dx = std::max(extent.maxCoeff() / std::max(resolution, 4), kMinCellSpacings * spacing);
  for (int a = 0; a < 3; ++a) {
    g.n[a] = std::max(6, static_cast<int>(std::ceil(extent[a] / g.dx)) + 1);
  }
  return g;
}

}  // namespace gsphys::sim::detail
