#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gsphys/sim/material.hpp"
#include "gsphys/sim/simulator.hpp"
#include "layout.hpp"
#include "rigid.hpp"

namespace gsphys::sim::detail {

/// Explicit MLS-MPM with APIC transfer and quadratic B-splines on a dense
/// grid. Rigid bodies act as moving boundaries: their particles splat mass
/// only, nodes where rigid mass outweighs elastic mass take the body's
/// velocity, and the momentum the elastic mass loses there is returned to
/// the body as an impulse at the node.
class MpmSolver {
 public:
  MpmSolver(GridLayout layout, std::vector<std::uint32_t> elastic);

  const GridLayout& layout() const { return layout_; }

  /// One substep. Bodies enter with this substep's gravity and ground
  /// contact already applied and leave with the elastic reaction added.
  void substep(ParticleState& state, std::span<const Material> materials, std::vector<RigidBody>& bodies,
               const WorldConfig& world, double ground_friction, double dt);

  void reset_affine();

 private:
  struct Stencil {
    std::array<int, 3> base;
    std::array<std::array<double, 3>, 3> w;  // [axis][offset]
    Vec3 fx;
  };
  Stencil stencil(const Vec3& x) const;
  void clear();
  void update_grid(std::vector<RigidBody>& bodies, const WorldConfig& world, double ground_friction, double dt);

  GridLayout layout_;
  double inv_dx_ = 1.0;
  std::vector<std::uint32_t> elastic_;
  std::vector<Mat3> affine_;           // APIC C per elastic particle
  std::vector<Eigen::Vector4d> nodes_;  // momentum xyz, mass
  std::vector<std::uint8_t> touched_;
  std::vector<std::uint32_t> active_;
  std::vector<double> rigid_mass_;     // per node
  std::vector<double> rigid_weight_;   // largest single rigid weight, picks the owner
  std::vector<std::int32_t> owner_;    // body index per node, -1 when none
};

}  // namespace gsphys::sim::detail
