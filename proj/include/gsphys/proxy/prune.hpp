#pragma once

#include <cstddef>
#include <vector>

#include "gsphys/core/gaussian.hpp"

namespace gsphys::proxy {

struct PruneParams {
  double radius = 0.0;
  std::size_t min_neighbors = 4;
};

/// radius = 3x the mean nearest-neighbor distance over a strided subsample
/// of at most 1000 object centers; min_neighbors = 4.
PruneParams default_prune_params(const GaussianSet& set);

/// Object Gaussians (indices into `set.gaussians`, ascending) having at
/// least `min_neighbors` other object centers within `radius`.
/// Throws Errc::config on bad parameters, Errc::degenerate_object when
/// nothing survives.
std::vector<std::size_t> prune_outliers(const GaussianSet& set, double radius, std::size_t min_neighbors);

}  // namespace gsphys::proxy
