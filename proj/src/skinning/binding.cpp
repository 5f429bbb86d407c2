#include "gsphys/skinning/binding.hpp"

#include <cmath>
#include <string>

#include "gsphys/core/error.hpp"
#include "gsphys/core/kdtree.hpp"

namespace gsphys::skinning {

double default_epsilon(std::span<const Vec3> rest_particles) {
  if (rest_particles.empty()) return 0.0;
  Vec3 lo = rest_particles.front(), hi = lo;
  for (const Vec3& p : rest_particles) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return 1e-8 * (hi - lo).squaredNorm();
}

void inverse_distance_weights(std::span<const double> dist2, double epsilon, std::span<double> out) {
  std::size_t zeros = 0;
  for (double d : dist2) zeros += (d + epsilon == 0.0);
  if (zeros > 0) {
    for (std::size_t i = 0; i < dist2.size(); ++i) out[i] = (dist2[i] + epsilon == 0.0) ? 1.0 / zeros : 0.0;
    return;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < dist2.size(); ++i) {
    out[i] = 1.0 / (dist2[i] + epsilon);
    total += out[i];
  }
  for (double& w : out) w /= total;
}

Binding bind(const GaussianSet& set, std::span<const std::size_t> ids, std::span<const Vec3> rest_particles,
             std::size_t k, double epsilon) {
  if (k == 0) throw Error(Errc::config, "skinning needs K >= 1");
  if (k > rest_particles.size()) {
    throw Error(Errc::config, "K = " + std::to_string(k) + " exceeds the particle count " +
                                  std::to_string(rest_particles.size()));
  }
  if (epsilon < 0.0) epsilon = default_epsilon(rest_particles);

  Binding b;
  b.k = k;
  b.epsilon = epsilon;
  b.particle_count = rest_particles.size();
  b.gaussian_ids.reserve(ids.size());
  b.neighbors.resize(ids.size() * k);
  b.weights.resize(ids.size() * k);
  b.offsets.resize(ids.size() * k);
  b.rest_spacing.resize(ids.size());

  const KdTree tree(rest_particles);
  std::vector<Neighbor> nn;
  std::vector<double> d2(k);
  for (std::size_t j = 0; j < ids.size(); ++j) {
    const Vec3& c = set.gaussians.at(ids[j]).center;
    b.gaussian_ids.push_back(static_cast<std::uint32_t>(ids[j]));
    tree.nearest(c, k, nn);
    double spacing = 0.0;
    for (std::size_t n = 0; n < k; ++n) {
      b.neighbors[j * k + n] = nn[n].index;
      b.offsets[j * k + n] = c - rest_particles[nn[n].index];
      d2[n] = nn[n].dist2;
      spacing += std::sqrt(nn[n].dist2);
    }
    b.rest_spacing[j] = spacing / static_cast<double>(k);
    inverse_distance_weights(d2, epsilon, std::span<double>(b.weights.data() + j * k, k));
  }
  return b;
}

Binding bind(const GaussianSet& set, std::span<const Vec3> rest_particles, std::size_t k, double epsilon) {
  return bind(set, std::span<const std::size_t>(set.object_mask), rest_particles, k, epsilon);
}

}  // namespace gsphys::skinning
