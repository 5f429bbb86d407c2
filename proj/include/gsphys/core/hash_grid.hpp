#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "gsphys/core/types.hpp"

namespace gsphys {

/// Uniform hash grid for incremental radius queries.
class HashGrid {
 public:
  explicit HashGrid(double cell) : cell_(cell) {}

  void insert(const Vec3& p) {
    cells_[key(cell_of(p))].push_back(static_cast<std::uint32_t>(points_.size()));
    points_.push_back(p);
  }

  /// True if any stored point lies strictly closer than `radius` (radius <= cell).
  bool any_within(const Vec3& q, double radius) const {
    const double r2 = radius * radius;
    const Eigen::Vector3i c = cell_of(q);
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          auto it = cells_.find(key(c + Eigen::Vector3i(dx, dy, dz)));
          if (it == cells_.end()) continue;
          for (std::uint32_t i : it->second) {
            if ((points_[i] - q).squaredNorm() < r2) return true;
          }
        }
      }
    }
    return false;
  }

  std::size_t size() const { return points_.size(); }

 private:
  Eigen::Vector3i cell_of(const Vec3& p) const {
    return Eigen::Vector3i(static_cast<int>(std::floor(p.x() / cell_)), static_cast<int>(std::floor(p.y() / cell_)),
                           static_cast<int>(std::floor(p.z() / cell_)));
  }
  static std::uint64_t key(const Eigen::Vector3i& c) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x()) & 0x1fffff) << 42) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.y()) & 0x1fffff) << 21) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.z()) & 0x1fffff));
  }

  double cell_;
  std::vector<Vec3> points_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace gsphys
