#include "gsphys/core/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace gsphys {
namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 2);
    build(0, static_cast<std::uint32_t>(points_.size()), 0);
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  (void)depth;
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis] || (points_[a][axis] == points_[b][axis] && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  Node& n = nodes_[id];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

std::vector<Neighbor> KdTree::nearest(const Vec3& query, std::size_t k) const {
  std::vector<Neighbor> out;
  nearest(query, k, out);
  return out;
}

void KdTree::nearest(const Vec3& query, std::size_t k, std::vector<Neighbor>& out) const {
  out.clear();
  k = std::min(k, points_.size());
  if (k == 0) return;
  out.reserve(k + 1);

  // Sorted insertion into a bounded list; k is small (typically 8).
  auto offer = [&](std::uint32_t idx) {
    const Neighbor cand{idx, (points_[idx] - query).squaredNorm()};
    if (out.size() == k && !closer(cand, out.back())) return;
    auto pos = std::upper_bound(out.begin(), out.end(), cand, closer);
    out.insert(pos, cand);
    if (out.size() > k) out.pop_back();
  };

  struct Pending {
    std::int32_t node;
    double bound2;
  };
  Pending stack[128];
  int top = 0;
  stack[top++] = {0, 0.0};
  while (top > 0) {
    const Pending p = stack[--top];
    // Equal bound still visited so that equidistant lower indices win.
    if (out.size() == k && p.bound2 > out.back().dist2) continue;
    const Node& n = nodes_[p.node];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) offer(order_[i]);
      continue;
    }
    const double diff = query[n.axis] - n.split;
    const std::int32_t near = diff < 0 ? n.left : n.right;
    const std::int32_t far = diff < 0 ? n.right : n.left;
    stack[top++] = {far, std::max(p.bound2, diff * diff)};
    stack[top++] = {near, p.bound2};
  }
}

std::size_t KdTree::count_within(const Vec3& query, double radius) const {
  if (points_.empty()) return 0;
  const double r2 = radius * radius;
  std::size_t count = 0;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        if ((points_[order_[i]] - query).squaredNorm() <= r2) ++count;
      }
      continue;
    }
    const double diff = query[n.axis] - n.split;
    if (diff - radius <= 0.0) stack[top++] = n.left;
    if (diff + radius >= 0.0) stack[top++] = n.right;
  }
  return count;
}

std::vector<std::uint32_t> KdTree::within(const Vec3& query, double radius) const {
  std::vector<std::uint32_t> out;
  if (points_.empty()) return out;
  const double r2 = radius * radius;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        if ((points_[order_[i]] - query).squaredNorm() <= r2) out.push_back(order_[i]);
      }
      continue;
    }
    const double diff = query[n.axis] - n.split;
    if (diff - radius <= 0.0) stack[top++] = n.left;
    if (diff + radius >= 0.0) stack[top++] = n.right;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gsphys
