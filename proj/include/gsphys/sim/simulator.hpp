#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "gsphys/proxy/particles.hpp"
#include "gsphys/sim/material.hpp"
#include "gsphys/sim/world.hpp"

namespace gsphys::sim {

/// Pose of a rigid region: x = rotation * x_rest + translation.
struct RigidPose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 translation = Vec3::Zero();
};

struct ParticleState {
  std::vector<Vec3> rest_positions;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<Mat3> gradients;
  std::vector<double> masses;
  std::vector<std::uint32_t> region;
  std::vector<RigidPose> rigid_poses;  // one per region; identity for non-rigid regions

  std::size_t size() const { return positions.size(); }
};

struct Snapshot {
  std::vector<Vec3> displacements;
  std::vector<Mat3> gradients;
};

/// Solver-facing view of one rigid region.
struct RigidBodyInfo {
  std::uint32_t region = 0;
  double mass = 0.0;
  Vec3 center_of_mass = Vec3::Zero();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
};

/// Time-step bounds of a configuration.
struct StepPlan {
  double max_dt = 0.0;  // CFL limit
  double dt = 0.0;
  int substeps = 0;
};

/// Upper bound on the substep for the given particles, materials and world:
/// 0.3 dx / sqrt(E / rho) for elastic regions, 0.25 h / c_s for fluid regions
/// and 1e-3 s for rigid-only objects.
StepPlan plan_steps(const proxy::ParticleSeed& seed, std::span<const Material> materials, const WorldConfig& world);

/// Lower bound on the stable substep of any object sampled at
/// `particle_spacing` using every material in the list (the grid cell is
/// never finer than two spacings). Usable before a scene is loaded.
double conservative_max_dt(std::span<const Material> materials, double particle_spacing);

/// Rigid, elastic and fluid particles advanced together, one frame per step.
///
/// Rigid regions are single bodies whose particles follow the body pose.
/// Elastic regions run MLS-MPM on a shared background grid that rigid
/// particles also write to when both are present, so impacts reach the
/// elastic part and the grid's reaction acts back on the body. Fluid
/// regions run weakly-compressible SPH against the ground and domain walls.
class Simulator {
 public:
  /// materials[r] is the material of region r. Throws Errc::config for a
  /// missing or invalid material and UnstableConfig when world.substeps is
  /// set and the resulting dt breaks the CFL bound.
  Simulator(const proxy::ParticleSeed& seed, std::vector<Material> materials, WorldConfig world);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  const ParticleState& state() const { return state_; }
  const WorldConfig& world() const { return world_; }
  std::span<const Material> materials() const { return materials_; }
  std::int64_t frame() const { return frame_; }
  double time() const { return static_cast<double>(frame_) / world_.fps; }
  double dt() const { return plan_.dt; }
  int substeps() const { return plan_.substeps; }
  double max_stable_dt() const { return plan_.max_dt; }
  Box domain() const;
  double particle_spacing() const { return spacing_; }
  std::vector<RigidBodyInfo> rigid_bodies() const;

  /// Advances one frame. Impulses in `scheduled` fire in the substep that
  /// contains their start time; continuous forces act over the overlap of
  /// their window with each substep. Throws NumericalBlowup with the index
  /// of the offending frame when any particle turns non-finite.
  void step(std::span<const ExternalForce> scheduled = {});

  /// Queues an impulse for the start of the next step. The momentum
  /// magnitude * direction is split mass-proportionally over the particles
  /// within `radius` of `point`, or the whole object when no point is given.
  void apply_user_push(const ExternalForce& push);

  Snapshot snapshot() const;

  // Runtime parameter edits. Auto-substepping follows the new CFL bound;
  // with fixed substeps a violating edit throws UnstableConfig and leaves
  // the simulator unchanged.
  void set_gravity(const Vec3& gravity) { world_.gravity = gravity; }
  void set_youngs_modulus(double youngs);
  void set_surface_tension(double gamma);
  void set_restitution(double restitution);

 private:
  struct Impl;

  void replan();
  void apply_impulse(const ExternalForce& force, double duration_scale);
  void check_finite() const;

  WorldConfig world_;
  std::vector<Material> materials_;
  ParticleState state_;
  double spacing_ = 0.0;
  StepPlan plan_;
  std::int64_t frame_ = 0;
  std::vector<ExternalForce> pending_;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper matching the pipeline vocabulary.
inline Simulator init_sim(const proxy::ParticleSeed& seed, std::vector<Material> materials, WorldConfig world) {
  return Simulator(seed, std::move(materials), std::move(world));
}

}  // namespace gsphys::sim
