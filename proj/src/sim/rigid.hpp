#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "gsphys/sim/material.hpp"
#include "gsphys/sim/world.hpp"

namespace gsphys::sim::detail {

struct RigidBody {
  std::uint32_t region = 0;
  std::vector<std::uint32_t> particles;
  std::vector<Vec3> offsets;   // rest position minus rest center of mass
  std::vector<Vec3> contacts;  // convex hull vertices of the offsets
  double mass = 0.0;
  Mat3 inertia_inv = Mat3::Identity();  // body frame
  Vec3 rest_com = Vec3::Zero();
  Vec3 com = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 angular_momentum = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }
  Mat3 world_inertia_inv() const {
    const Mat3 r = rotation_matrix();
    return r * inertia_inv * r.transpose();
  }
  Vec3 angular_velocity() const { return world_inertia_inv() * angular_momentum; }

  void apply_impulse(const Vec3& j, const Vec3& at) {
    velocity += j / mass;
    angular_momentum += (at - com).cross(j);
  }
};

/// Body over the given particles. Inertia sums point masses plus the
/// inertia of a cube of side `spacing` per particle, so a single particle
/// still has a well-defined inertia.
RigidBody make_rigid_body(std::uint32_t region, std::vector<std::uint32_t> particles, std::span<const Vec3> rest,
                          std::span<const double> masses, double spacing);

/// Velocity-level ground contact on hull vertices that would reach the
/// plane within `dt`: projected Gauss-Seidel over non-penetration and
/// Coulomb friction impulses, with restitution for approach speeds above a
/// small threshold. Returns true when any vertex was in contact.
bool solve_ground_contact(RigidBody& body, const GroundPlane& ground, const Material& material, double dt);

/// Integrates the pose. With `exact` the translation uses the trapezoid of
/// the old and new velocity, exact under constant acceleration.
void advance_pose(RigidBody& body, const Vec3& old_velocity, bool exact, double dt);

/// Pushes penetrating hull vertices back onto the ground plane.
void project_out_of_ground(RigidBody& body, const GroundPlane& ground);

}  // namespace gsphys::sim::detail
