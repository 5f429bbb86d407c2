#include "rigid.hpp"

#include <algorithm>
#include <cmath>

#include "gsphys/core/error.hpp"
#include "gsphys/proxy/hull.hpp"

namespace gsphys::sim::detail {

namespace {

constexpr int kContactIterations = 24;
constexpr double kBounceThreshold = 0.05;  // m/s

double effective_mass_inv(const RigidBody& body, const Mat3& iinv, const Vec3& r, const Vec3& d) {
  return 1.0 / body.mass + d.dot((iinv * r.cross(d)).cross(r));
}

}  // namespace

RigidBody make_rigid_body(std::uint32_t region, std::vector<std::uint32_t> particles, std::span<const Vec3> rest,
                          std::span<const double> masses, double spacing) {
  if (particles.empty()) throw Error(Errc::config, "rigid region " + std::to_string(region) + " has no particles");
  RigidBody body;
  body.region = region;
  body.particles = std::move(particles);

  Vec3 weighted = Vec3::Zero();
  for (auto i : body.particles) {
    body.mass += masses[i];
    weighted += masses[i] * rest[i];
  }
  body.rest_com = weighted / body.mass;
  body.com = body.rest_com;

  Mat3 inertia = Mat3::Zero();
  body.offsets.reserve(body.particles.size());
  for (auto i : body.particles) {
    const Vec3 r = rest[i] - body.rest_com;
    body.offsets.push_back(r);
    inertia += masses[i] * (r.squaredNorm() * Mat3::Identity() - r * r.transpose());
    inertia += masses[i] * spacing * spacing / 6.0 * Mat3::Identity();
  }
  body.inertia_inv = inertia.inverse();

  try {
    body.contacts = proxy::build_hull(body.offsets).vertices;
  } catch (const Error&) {
    body.contacts = body.offsets;  // flat or tiny regions: every particle is a contact
  }
  return body;
}

bool solve_ground_contact(RigidBody& body, const GroundPlane& ground, const Material& material, double dt) {
  const Mat3 rot = body.rotation_matrix();
  const Mat3 iinv = body.world_inertia_inv();
  const Vec3& n = ground.normal;

  struct Contact {
    Vec3 r;
    double target = 0.0;
    double k_normal = 0.0;
    double lambda_n = 0.0;
    Vec3 lambda_t = Vec3::Zero();
  };
  std::vector<Contact> contacts;
  const Vec3 omega = iinv * body.angular_momentum;
  for (const Vec3& o : body.contacts) {
    const Vec3 r = rot * o;
    const double gap = ground.signed_distance(body.com + r);
    const double vn = n.dot(body.velocity + omega.cross(r));
    // Speculative: vertices that would cross the plane within this substep.
    if (gap + dt * std::min(vn, 0.0) >= 0.0) continue;
    Contact c;
    c.r = r;
    c.target = gap > 0.0 ? -gap / dt : 0.0;
    if (vn < -kBounceThreshold) c.target = std::max(c.target, -material.restitution * vn);
    c.k_normal = effective_mass_inv(body, iinv, r, n);
    contacts.push_back(c);
  }
  if (contacts.empty()) return false;

  for (int it = 0; it < kContactIterations; ++it) {
    for (auto& c : contacts) {
      const Vec3 at = body.com + c.r;
      Vec3 vel = body.velocity + (iinv * body.angular_momentum).cross(c.r);
      const double vn = n.dot(vel);
      const double old_n = c.lambda_n;
      c.lambda_n = std::max(0.0, old_n + (c.target - vn) / c.k_normal);
      body.apply_impulse((c.lambda_n - old_n) * n, at);

      vel = body.velocity + (iinv * body.angular_momentum).cross(c.r);
      const Vec3 vt = vel - n.dot(vel) * n;
      const double speed = vt.norm();
      if (speed < 1e-14) continue;
      const Vec3 t = vt / speed;
      const Vec3 old_t = c.lambda_t;
      Vec3 lt = old_t - (speed / effective_mass_inv(body, iinv, c.r, t)) * t;
      const double limit = material.friction * c.lambda_n;
      if (lt.norm() > limit) lt *= limit / lt.norm();
      c.lambda_t = lt;
      body.apply_impulse(lt - old_t, at);
    }
  }
  return true;
}

void advance_pose(RigidBody& body, const Vec3& old_velocity, bool exact, double dt) {
  if (exact) {
    body.com += 0.5 * dt * (old_velocity + body.velocity);
  } else {
    body.com += dt * body.velocity;
  }
  const Vec3 omega = body.angular_velocity();
  const double angle = omega.norm() * dt;
  if (angle > 0.0) {
    body.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(angle, omega.normalized())) * body.rotation;
    body.rotation.normalize();
  }
}

void project_out_of_ground(RigidBody& body, const GroundPlane& ground) {
  const Mat3 rot = body.rotation_matrix();
  double deepest = 0.0;
  for (const Vec3& o : body.contacts) deepest = std::min(deepest, ground.signed_distance(body.com + rot * o));
  if (deepest < 0.0) body.com -= deepest * ground.normal;
}

}  // namespace gsphys::sim::detail
