#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gsphys/sim/material.hpp"
#include "gsphys/sim/simulator.hpp"

namespace gsphys::sim::detail {

inline constexpr double kSmoothingRatio = 1.2;  // h / particle spacing

/// Weakly-compressible SPH: cubic spline kernel with support 2h, Tait
/// pressure clamped at zero, Monaghan artificial viscosity and pairwise
/// cohesion scaled by each material's surface_tension.
class SphSolver {
 public:
  SphSolver(std::vector<std::uint32_t> fluid, const ParticleState& state, std::span<const Material> materials,
            double spacing, const Box& domain);

  double smoothing_length() const { return h_; }
  void substep(ParticleState& state, std::span<const Material> materials, const WorldConfig& world, double dt);

 private:
  void build_cells(const ParticleState& state);
  // Lists every pair closer than the support once and sums density.
  void gather_pairs(const ParticleState& state);

  std::vector<std::uint32_t> fluid_;
  double h_ = 0.0;
  Box domain_;
  double cell_ = 0.0;
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<double> rest_density_;  // per local particle, from its region's calibration
  std::vector<double> density_;
  std::vector<double> pressure_;
  std::vector<Vec3> accel_;
  std::vector<std::uint32_t> cell_of_;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> sorted_;
  std::vector<double> pi_, visc_, tension_;  // per-particle factors of the pair loop
  struct Pair {
    std::uint32_t a, b;
    double r;
  };
  std::vector<Pair> pairs_;
};

/// Cubic spline kernel with support 2h.
class CubicKernel {
 public:
  explicit CubicKernel(double h);
  double operator()(double r) const {
    const double q = r * inv_h_;
    if (q < 1.0) return sigma_ * (1.0 - 1.5 * q * q + 0.75 * q * q * q);
    if (q < 2.0) return sigma_ * 0.25 * (2.0 - q) * (2.0 - q) * (2.0 - q);
    return 0.0;
  }
  /// dW/dr
  double derivative(double r) const {
    const double q = r * inv_h_;
    if (q < 1.0) return dsigma_ * (-3.0 * q + 2.25 * q * q);
    if (q < 2.0) return dsigma_ * -0.75 * (2.0 - q) * (2.0 - q);
    return 0.0;
  }

 private:
  double inv_h_, sigma_, dsigma_;
};

/// Cohesion spline of a given support, support-only factors precomputed.
class CohesionKernel {
 public:
  explicit CohesionKernel(double support);
  double operator()(double r) const;

 private:
  double support_, scale_, offset_;
};

}  // namespace gsphys::sim::detail
