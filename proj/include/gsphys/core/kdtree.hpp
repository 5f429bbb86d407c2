#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gsphys/core/types.hpp"

namespace gsphys {

struct Neighbor {
  std::uint32_t index;
  double dist2;
};

/// Static 3-d tree over a point cloud (copied at build time).
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points, std::size_t leaf_size = 8);

  std::size_t size() const { return points_.size(); }

  /// Exact k nearest points sorted by (distance, index); ties go to the lower
  /// index. Returns min(k, size()) entries.
  std::vector<Neighbor> nearest(const Vec3& query, std::size_t k) const;
  void nearest(const Vec3& query, std::size_t k, std::vector<Neighbor>& out) const;

  /// Number of points with |p - query| <= radius.
  std::size_t count_within(const Vec3& query, double radius) const;
  /// Indices of points with |p - query| <= radius, ascending.
  std::vector<std::uint32_t> within(const Vec3& query, double radius) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range into order_
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_ = 8;
};

}  // namespace gsphys
