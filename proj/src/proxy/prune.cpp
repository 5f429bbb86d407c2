#include "gsphys/proxy/prune.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsphys/core/error.hpp"
#include "gsphys/core/kdtree.hpp"

namespace gsphys::proxy {

PruneParams default_prune_params(const GaussianSet& set) {
  const std::vector<Vec3> centers = set.object_centers();
  if (centers.size() < 2) throw Error(Errc::degenerate_object, "object has fewer than two Gaussians");
  const KdTree tree(centers);
  const std::size_t stride = std::max<std::size_t>(1, (centers.size() + 999) / 1000);
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<Neighbor> nn;
  for (std::size_t i = 0; i < centers.size(); i += stride) {
    tree.nearest(centers[i], 2, nn);
    sum += std::sqrt(nn.back().dist2);
    ++count;
  }
  PruneParams params;
  params.radius = 3.0 * sum / static_cast<double>(count);
  params.min_neighbors = 4;
  if (!(params.radius > 0.0)) params.radius = 1e-9;
  return params;
}

std::vector<std::size_t> prune_outliers(const GaussianSet& set, double radius, std::size_t min_neighbors) {
  if (!(radius > 0.0)) throw Error(Errc::config, "pruning radius must be positive");
  if (min_neighbors < 1) throw Error(Errc::config, "min_neighbors must be at least 1");
  std::vector<std::size_t> mask = set.object_mask;
  std::sort(mask.begin(), mask.end());
  std::vector<Vec3> centers;
  centers.reserve(mask.size());
  for (std::size_t idx : mask) centers.push_back(set.gaussians[idx].center);
  const KdTree tree(centers);

  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    // count_within includes the point itself
    if (tree.count_within(centers[k], radius) >= min_neighbors + 1) kept.push_back(mask[k]);
  }
  if (kept.empty()) {
    throw Error(Errc::degenerate_object, "outlier pruning removed every object Gaussian (radius " +
                                             std::to_string(radius) + ")");
  }
  return kept;
}

}  // namespace gsphys::proxy
