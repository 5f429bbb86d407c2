#include "gsphys/proxy/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "gsphys/core/error.hpp"

namespace gsphys::proxy {

Vec3 ConvexHull::bbox_min() const {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  for (const Vec3& v : vertices) lo = lo.cwiseMin(v);
  return lo;
}

Vec3 ConvexHull::bbox_max() const {
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  for (const Vec3& v : vertices) hi = hi.cwiseMax(v);
  return hi;
}

double ConvexHull::volume() const {
  if (vertices.empty()) return 0.0;
  const Vec3 o = vertices.front();
  double six_v = 0.0;
  for (const auto& f : faces) {
    six_v += (vertices[f[0]] - o).dot((vertices[f[1]] - o).cross(vertices[f[2]] - o));
  }
  return six_v / 6.0;
}

double ConvexHull::plane_distance(const Vec3& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < faces.size(); ++f) worst = std::max(worst, normals[f].dot(x) - offsets[f]);
  return worst;
}

bool is_watertight(const ConvexHull& hull) {
  std::unordered_map<std::uint64_t, int> directed;
  std::unordered_set<std::uint32_t> used;
  for (const auto& f : hull.faces) {
    for (int e = 0; e < 3; ++e) {
      const std::uint64_t key = (static_cast<std::uint64_t>(f[e]) << 32) | f[(e + 1) % 3];
      if (++directed[key] != 1) return false;
      used.insert(f[e]);
    }
  }
  for (const auto& [key, count] : directed) {
    const std::uint64_t twin = (key << 32) | (key >> 32);
    if (!directed.contains(twin)) return false;
  }
  const auto v = static_cast<long>(used.size());
  const auto e = static_cast<long>(directed.size() / 2);
  const auto f = static_cast<long>(hull.faces.size());
  return v - e + f == 2;
}

namespace {

struct Face {
  std::array<std::uint32_t, 3> v;
  Vec3 normal;
  double offset;
  std::vector<std::uint32_t> outside;
  bool alive = true;
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

class Quickhull {
 public:
  Quickhull(std::span<const Vec3> pts, double eps) : pts_(pts), eps_(eps) {}

  // Returns false when a degenerate face is produced (caller perturbs).
  bool run() {
    const auto simplex = initial_simplex();
    const Vec3 inner = 0.25 * (pts_[simplex[0]] + pts_[simplex[1]] + pts_[simplex[2]] + pts_[simplex[3]]);
    const std::array<std::array<std::uint32_t, 3>, 4> tris = {{{simplex[0], simplex[1], simplex[2]},
                                                               {simplex[0], simplex[1], simplex[3]},
                                                               {simplex[0], simplex[2], simplex[3]},
                                                               {simplex[1], simplex[2], simplex[3]}}};
    std::vector<std::uint32_t> new_faces;
    for (auto t : tris) {
      const Vec3 n = (pts_[t[1]] - pts_[t[0]]).cross(pts_[t[2]] - pts_[t[0]]);
      if (n.dot(inner - pts_[t[0]]) > 0) std::swap(t[1], t[2]);
      const auto id = add_face(t[0], t[1], t[2]);
      if (!id) return false;
      new_faces.push_back(*id);
    }
    std::vector<std::uint32_t> rest;
    rest.reserve(pts_.size());
    for (std::uint32_t i = 0; i < pts_.size(); ++i) {
      if (std::find(simplex.begin(), simplex.end(), i) == simplex.end()) rest.push_back(i);
    }
    assign(rest, new_faces);

    std::vector<std::uint32_t> work(new_faces);
    std::vector<std::uint32_t> visible, orphans;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> horizon;
    std::vector<int> mark(faces_.size(), 0);
    int stamp = 0;
    while (!work.empty()) {
      const std::uint32_t fid = work.back();
      work.pop_back();
      if (!faces_[fid].alive || faces_[fid].outside.empty()) continue;

      const std::uint32_t eye = furthest(faces_[fid]);
      const Vec3& p = pts_[eye];

      ++stamp;
      mark.resize(faces_.size(), 0);
      visible.assign(1, fid);
      mark[fid] = stamp;
      horizon.clear();
      for (std::size_t k = 0; k < visible.size(); ++k) {
        const Face& f = faces_[visible[k]];
        for (int e = 0; e < 3; ++e) {
          const std::uint32_t a = f.v[e], b = f.v[(e + 1) % 3];
          const std::uint32_t g = edges_.at(edge_key(b, a));
          if (mark[g] == stamp) continue;
          if (faces_[g].normal.dot(p) - faces_[g].offset > eps_) {
            mark[g] = stamp;
            visible.push_back(g);
          }
        }
      }
      for (std::uint32_t vid : visible) {
        const Face& f = faces_[vid];
        for (int e = 0; e < 3; ++e) {
          const std::uint32_t a = f.v[e], b = f.v[(e + 1) % 3];
          const std::uint32_t g = edges_.at(edge_key(b, a));
          if (mark[g] != stamp) horizon.emplace_back(a, b);
        }
      }
      orphans.clear();
      for (std::uint32_t vid : visible) {
        Face& f = faces_[vid];
        f.alive = false;
        for (int e = 0; e < 3; ++e) edges_.erase(edge_key(f.v[e], f.v[(e + 1) % 3]));
        for (std::uint32_t q : f.outside) {
          if (q != eye) orphans.push_back(q);
        }
        f.outside.clear();
        f.outside.shrink_to_fit();
      }
      new_faces.clear();
      for (const auto& [a, b] : horizon) {
        const auto id = add_face(a, b, eye);
        if (!id) return false;
        new_faces.push_back(*id);
      }
      // A broken horizon leaves unmatched edges behind.
      for (std::uint32_t nf : new_faces) {
        const Face& f = faces_[nf];
        for (int e = 0; e < 3; ++e) {
          if (!edges_.contains(edge_key(f.v[(e + 1) % 3], f.v[e]))) return false;
        }
      }
      assign(orphans, new_faces);
      for (std::uint32_t nf : new_faces) {
        if (!faces_[nf].outside.empty()) work.push_back(nf);
      }
    }
    return true;
  }

  ConvexHull extract(std::span<const Vec3> coords) const {
    ConvexHull hull;
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    for (const Face& f : faces_) {
      if (!f.alive) continue;
      std::array<std::uint32_t, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        auto [it, inserted] = remap.try_emplace(f.v[k], static_cast<std::uint32_t>(hull.vertices.size()));
        if (inserted) hull.vertices.push_back(coords[f.v[k]]);
        tri[k] = it->second;
      }
      hull.faces.push_back(tri);
    }
    for (const auto& t : hull.faces) {
      const Vec3 n =
          (hull.vertices[t[1]] - hull.vertices[t[0]]).cross(hull.vertices[t[2]] - hull.vertices[t[0]]).normalized();
      hull.normals.push_back(n);
      hull.offsets.push_back(n.dot(hull.vertices[t[0]]));
    }
    return hull;
  }

 private:
  std::array<std::uint32_t, 4> initial_simplex() const {
    const auto n = static_cast<std::uint32_t>(pts_.size());
    std::uint32_t lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (std::uint32_t i = 1; i < n; ++i) {
      for (int a = 0; a < 3; ++a) {
        if (pts_[i][a] < pts_[lo[a]][a]) lo[a] = i;
        if (pts_[i][a] > pts_[hi[a]][a]) hi[a] = i;
      }
    }
    std::uint32_t i0 = lo[0], i1 = hi[0];
    double best = -1.0;
    for (int a = 0; a < 3; ++a) {
      const double d = (pts_[hi[a]] - pts_[lo[a]]).squaredNorm();
      if (d > best) {
        best = d;
        i0 = lo[a];
        i1 = hi[a];
      }
    }
    if (std::sqrt(best) <= eps_) throw Error(Errc::degenerate_geometry, "hull input points are coincident");

    const Vec3 axis = (pts_[i1] - pts_[i0]).normalized();
    std::uint32_t i2 = i0;
    best = -1.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      const Vec3 d = pts_[i] - pts_[i0];
      const double dist = (d - d.dot(axis) * axis).norm();
      if (dist > best) {
        best = dist;
        i2 = i;
      }
    }
    if (best <= eps_) throw Error(Errc::degenerate_geometry, "hull input points are collinear");

    const Vec3 normal = (pts_[i1] - pts_[i0]).cross(pts_[i2] - pts_[i0]).normalized();
    std::uint32_t i3 = i0;
    best = -1.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      const double dist = std::abs(normal.dot(pts_[i] - pts_[i0]));
      if (dist > best) {
        best = dist;
        i3 = i;
      }
    }
    if (best <= eps_) throw Error(Errc::degenerate_geometry, "hull input points are coplanar");
    return {i0, i1, i2, i3};
  }

  std::optional<std::uint32_t> add_face(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    Face f;
    f.v = {a, b, c};
    const Vec3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    const double len = n.norm();
    if (!(len > eps_ * eps_ * 1e-3) || !std::isfinite(len)) return std::nullopt;
    f.normal = n / len;
    f.offset = f.normal.dot(pts_[a]);
    const auto id = static_cast<std::uint32_t>(faces_.size());
    for (int e = 0; e < 3; ++e) {
      if (!edges_.emplace(edge_key(f.v[e], f.v[(e + 1) % 3]), id).second) return std::nullopt;
    }
    faces_.push_back(std::move(f));
    return id;
  }

  void assign(const std::vector<std::uint32_t>& candidates, const std::vector<std::uint32_t>& targets) {
    for (std::uint32_t q : candidates) {
      double best = eps_;
      std::int64_t pick = -1;
      for (std::uint32_t t : targets) {
        const double d = faces_[t].normal.dot(pts_[q]) - faces_[t].offset;
        if (d > best) {
          best = d;
          pick = t;
        }
      }
      if (pick >= 0) faces_[static_cast<std::size_t>(pick)].outside.push_back(q);
    }
  }

  std::uint32_t furthest(const Face& f) const {
    std::uint32_t pick = f.outside.front();
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint32_t q : f.outside) {
      const double d = f.normal.dot(pts_[q]) - f.offset;
      if (d > best) {
        best = d;
        pick = q;
      }
    }
    return pick;
  }

  std::span<const Vec3> pts_;
  double eps_;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, std::uint32_t> edges_;
};

bool convex_and_closed(const ConvexHull& hull, double tol) {
  if (!is_watertight(hull)) return false;
  for (std::size_t f = 0; f < hull.faces.size(); ++f) {
    if (!hull.normals[f].allFinite()) return false;
    for (const Vec3& v : hull.vertices) {
      if (hull.normals[f].dot(v) - hull.offsets[f] > tol) return false;
    }
  }
  return true;
}

}  // namespace

ConvexHull build_hull(std::span<const Vec3> points) {
  if (points.size() < 4) throw Error(Errc::degenerate_geometry, "convex hull needs at least 4 points");
  Vec3 lo = points.front(), hi = lo;
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw Error(Errc::invalid_input, "hull input contains non-finite coordinates");
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  if (!(diag > 0.0)) throw Error(Errc::degenerate_geometry, "hull input points are coincident");
  const double eps = 1e-10 * diag;
  const double tol = 1e-7 * diag;

  {
    Quickhull qh(points, eps);
    if (qh.run()) {
      ConvexHull hull = qh.extract(points);
      if (convex_and_closed(hull, tol)) return hull;
    }
  }
  // Fallback: break exact coplanarity/collinearity with a tiny deterministic
  // jitter. The jitter stays far below the containment tolerance.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec3> jittered(points.begin(), points.end());
  for (double scale : {1e-9, 1e-8, 1e-7}) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      jittered[i] = points[i] + scale * diag * Vec3(unit(rng), unit(rng), unit(rng));
    }
    Quickhull qh(jittered, eps);
    if (!qh.run()) continue;
    ConvexHull hull = qh.extract(jittered);
    if (convex_and_closed(hull, tol)) return hull;
  }
  throw Error(Errc::degenerate_geometry, "convex hull construction failed after perturbation retries");
}

}  // namespace gsphys::proxy
