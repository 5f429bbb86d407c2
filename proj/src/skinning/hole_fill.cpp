#include "gsphys/skinning/hole_fill.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

#include "gsphys/core/error.hpp"
#include "gsphys/core/hash_grid.hpp"
#include "gsphys/core/kdtree.hpp"

namespace gsphys::skinning {
namespace {

// Icosahedron vertex directions.
const std::array<Vec3, 12>& shell_directions() {
  static const std::array<Vec3, 12> dirs = [] {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::array<Vec3, 12> d = {Vec3(-1, phi, 0), Vec3(1, phi, 0),   Vec3(-1, -phi, 0), Vec3(1, -phi, 0),
                              Vec3(0, -1, phi), Vec3(0, 1, phi),   Vec3(0, -1, -phi), Vec3(0, 1, -phi),
                              Vec3(phi, 0, -1), Vec3(phi, 0, 1),   Vec3(-phi, 0, -1), Vec3(-phi, 0, 1)};
    for (Vec3& v : d) v.normalize();
    return d;
  }();
  return dirs;
}

std::uint8_t to_u8(double c) { return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); }

}  // namespace

HoleFiller::HoleFiller(const GaussianSet& base, const Binding& binding, HoleFillConfig config)
    : config_(std::move(config)), gaussian_ids_(binding.gaussian_ids) {
  if (!(config_.spacing_ratio_threshold > 1.0)) throw Error(Errc::config, "hole-fill threshold must exceed 1");
  const std::size_t n = gaussian_ids_.size();
  std::vector<Vec3> rest(n);
  rgb_.resize(n);
  opacity_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Gaussian& g = base.gaussians.at(gaussian_ids_[j]);
    rest[j] = g.center;
    rgb_[j] = g.dc_rgb();
    opacity_[j] = g.opacity();
  }
  graph_degree_ = std::min(kHoleGraphDegree, n > 0 ? n - 1 : 0);
  graph_.resize(n * graph_degree_);
  graph_rest_.resize(n * graph_degree_);
  rest_spacing_.assign(n, 0.0);
  if (graph_degree_ > 0) {
    const KdTree tree(rest);
    std::vector<Neighbor> nn;
    for (std::size_t j = 0; j < n; ++j) {
      tree.nearest(rest[j], graph_degree_ + 1, nn);
      std::size_t e = 0;
      for (const Neighbor& nb : nn) {
        if (nb.index == j || e == graph_degree_) continue;
        graph_[j * graph_degree_ + e] = nb.index;
        graph_rest_[j * graph_degree_ + e] = std::sqrt(nb.dist2);
        rest_spacing_[j] += std::sqrt(nb.dist2);
        ++e;
      }
      rest_spacing_[j] /= static_cast<double>(graph_degree_);
    }
  }
  if (config_.poisson_radius) {
    poisson_radius_ = *config_.poisson_radius;
  } else if (n > 0) {
    std::vector<double> sorted = rest_spacing_;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    poisson_radius_ = 0.9 * sorted[sorted.size() / 2];
  }
  max_spawn_ = config_.max_spawn_per_frame.value_or(static_cast<std::size_t>(0.05 * static_cast<double>(n)));
}

void HoleFiller::reset() { spawns_.clear(); }

void HoleFiller::fill(io::AnimFrame& frame, std::span<const Vec3> particles) {
  frame.spawned.clear();
  for (Spawn& s : spawns_) {
    if (!particles.empty() && s.particle >= 0) {
      s.gaussian.center = particles[static_cast<std::size_t>(s.particle)] + s.offset;
    }
    frame.spawned.push_back(s.gaussian);
  }
  if (graph_degree_ == 0 || max_spawn_ == 0 || !(poisson_radius_ > 0.0)) return;

  const double tau = config_.spacing_ratio_threshold;
  struct Candidate {
    double priority;
    std::uint32_t a, b;  // local Gaussian indices
    Vec3 position;
    double spacing;
  };
  std::vector<Candidate> candidates;
  const auto& dirs = shell_directions();
  const std::size_t n = gaussian_ids_.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint32_t gj = gaussian_ids_[j];
    if (!frame.alive[gj]) continue;
    const Vec3& cj = frame.centers[gj];
    double mean = 0.0;
    for (std::size_t e = 0; e < graph_degree_; ++e) {
      mean += (frame.centers[gaussian_ids_[graph_[j * graph_degree_ + e]]] - cj).norm();
    }
    mean /= static_cast<double>(graph_degree_);
    if (mean <= tau * rest_spacing_[j]) continue;

    for (std::size_t e = 0; e < graph_degree_; ++e) {
      const std::uint32_t k = graph_[j * graph_degree_ + e];
      const Vec3& ck = frame.centers[gaussian_ids_[k]];
      if ((ck - cj).norm() <= tau * graph_rest_[j * graph_degree_ + e]) continue;
      const Vec3 mid = 0.5 * (cj + ck);
      for (double shell : config_.shell_radii) {
        const double r = shell * rest_spacing_[j];
        for (const Vec3& d : dirs) {
          candidates.push_back({r, static_cast<std::uint32_t>(j), k, mid + r * d, rest_spacing_[j]});
        }
      }
    }
  }
  if (candidates.empty()) return;
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) { return x.priority < y.priority; });

  HashGrid grid(poisson_radius_);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (frame.alive[i]) grid.insert(frame.centers[i]);
  }
  for (const io::SpawnedGaussian& s : frame.spawned) grid.insert(s.center);

  std::unique_ptr<KdTree> particle_tree;
  if (!particles.empty()) particle_tree = std::make_unique<KdTree>(particles);

  std::size_t accepted = 0;
  for (const Candidate& c : candidates) {
    if (accepted == max_spawn_) break;
    if (grid.any_within(c.position, poisson_radius_)) continue;
    grid.insert(c.position);
    ++accepted;

    const Vec3& pa = frame.centers[gaussian_ids_[c.a]];
    const Vec3& pb = frame.centers[gaussian_ids_[c.b]];
    const double da = (c.position - pa).norm(), db = (c.position - pb).norm();
    const double wa = (da + db) > 0.0 ? db / (da + db) : 0.5;
    Spawn s;
    s.gaussian.center = c.position;
    const double sigma = 0.5 * c.spacing;
    s.gaussian.covariance = SymCov{{sigma * sigma, 0.0, 0.0, sigma * sigma, 0.0, sigma * sigma}};
    const Vec3 rgb = wa * rgb_[c.a] + (1.0 - wa) * rgb_[c.b];
    s.gaussian.rgb = {to_u8(rgb[0]), to_u8(rgb[1]), to_u8(rgb[2])};
    s.gaussian.opacity_logit = logit(wa * opacity_[c.a] + (1.0 - wa) * opacity_[c.b]);
    if (particle_tree) {
      const auto nn = particle_tree->nearest(c.position, 1);
      s.particle = nn.front().index;
      s.offset = c.position - particles[nn.front().index];
    }
    frame.spawned.push_back(s.gaussian);
    spawns_.push_back(std::move(s));
  }
}

io::AnimFrame fill_holes(io::AnimFrame frame, const Binding& binding, const GaussianSet& base,
                         const HoleFillConfig& config) {
  HoleFiller filler(base, binding, config);
  filler.fill(frame);
  return frame;
}

}  // namespace gsphys::skinning
