#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gsphys/core/gaussian.hpp"

namespace gsphys::skinning {

inline constexpr std::size_t kDefaultNeighbors = 8;

/// Rest-pose association of Gaussians with their K nearest particles.
/// Per-Gaussian arrays are flattened with stride `k`.
struct Binding {
  std::size_t k = kDefaultNeighbors;
  double epsilon = 0.0;
  std::size_t particle_count = 0;
  std::vector<std::uint32_t> gaussian_ids;  // bound Gaussians, indices into the base set
  std::vector<std::uint32_t> neighbors;     // gaussian_ids.size() * k particle ids
  std::vector<double> weights;              // matching normalized weights
  std::vector<Vec3> offsets;                // c_j - p_i(0) per entry
  std::vector<double> rest_spacing;         // mean rest distance to the k particles

  std::size_t size() const { return gaussian_ids.size(); }
  std::span<const std::uint32_t> neighbors_of(std::size_t j) const { return {neighbors.data() + j * k, k}; }
  std::span<const double> weights_of(std::size_t j) const { return {weights.data() + j * k, k}; }
};

/// epsilon = 1e-8 * (bbox diagonal of the particles)^2.
double default_epsilon(std::span<const Vec3> rest_particles);

/// Binds the Gaussians `ids` of `set`: exact K nearest rest particles (ties to
/// the lower particle index, via a k-d tree) with weights proportional to
/// 1 / (|c_j - p_i|^2 + epsilon), normalized to sum to one.
/// Throws Errc::config if k == 0 or k exceeds the particle count.
Binding bind(const GaussianSet& set, std::span<const std::size_t> ids, std::span<const Vec3> rest_particles,
             std::size_t k = kDefaultNeighbors, double epsilon = -1.0);

/// Binds every Gaussian in the object mask.
Binding bind(const GaussianSet& set, std::span<const Vec3> rest_particles, std::size_t k = kDefaultNeighbors,
             double epsilon = -1.0);

/// Normalized inverse-squared-distance weights for the given squared
/// distances. Coincident points (dist2 + epsilon == 0) share the weight.
void inverse_distance_weights(std::span<const double> dist2, double epsilon, std::span<double> out);

}  // namespace gsphys::skinning
