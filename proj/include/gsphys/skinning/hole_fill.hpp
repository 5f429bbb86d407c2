#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gsphys/io/anim.hpp"
#include "gsphys/skinning/binding.hpp"

namespace gsphys::skinning {

struct HoleFillConfig {
  double spacing_ratio_threshold = 1.6;          // tau
  std::vector<double> shell_radii{1.0, 2.0};     // multiples of local rest spacing
  std::optional<double> poisson_radius;          // default 0.9 * median rest spacing
  std::optional<std::size_t> max_spawn_per_frame;  // default 5% of bound Gaussians

  friend bool operator==(const HoleFillConfig&, const HoleFillConfig&) = default;
};

/// Detects gaps between bound Gaussians and inserts spawned Gaussians.
///
/// Spacing is measured on a rest-pose graph linking each bound Gaussian to
/// its nearest bound Gaussians. A Gaussian whose current mean distance to
/// those neighbors exceeds tau times the rest value is a hole; for every
/// neighbor pair stretched beyond tau, candidates are placed on shells
/// around the pair midpoint and accepted greedily (shell radius first) when
/// no center of the frame, earlier spawn, or accepted candidate is closer
/// than the Poisson radius.
///
/// Spawns persist: when particle positions are supplied each spawn follows
/// its nearest particle on later frames.
class HoleFiller {
 public:
  HoleFiller(const GaussianSet& base, const Binding& binding, HoleFillConfig config);

  /// Re-emits earlier spawns (advected when `particles` is non-empty and the
  /// filler has seen particle positions before), then fills new holes.
  void fill(io::AnimFrame& frame, std::span<const Vec3> particles = {});
  void reset();

  double poisson_radius() const { return poisson_radius_; }
  std::size_t max_spawn_per_frame() const { return max_spawn_; }
  std::size_t spawned_count() const { return spawns_.size(); }

 private:
  struct Spawn {
    io::SpawnedGaussian gaussian;
    std::int64_t particle = -1;
    Vec3 offset = Vec3::Zero();
  };

  HoleFillConfig config_;
  double poisson_radius_ = 0.0;
  std::size_t max_spawn_ = 0;
  std::vector<std::uint32_t> gaussian_ids_;
  std::vector<std::uint32_t> graph_;     // graph_degree_ entries per bound Gaussian (local indices)
  std::vector<double> graph_rest_;       // rest distances of the graph edges
  std::vector<double> rest_spacing_;     // mean of graph_rest_ per Gaussian
  std::vector<Vec3> rgb_;
  std::vector<double> opacity_;
  std::size_t graph_degree_ = 0;
  std::vector<Spawn> spawns_;
};

inline constexpr std::size_t kHoleGraphDegree = 6;

/// Single-frame hole filling with no spawn history.
io::AnimFrame fill_holes(io::AnimFrame frame, const Binding& binding, const GaussianSet& base,
                         const HoleFillConfig& config);

}  // namespace gsphys::skinning
