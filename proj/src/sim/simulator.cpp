#include "gsphys/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "gsphys/core/error.hpp"
#include "layout.hpp"
#include "mpm.hpp"
#include "rigid.hpp"
#include "sph.hpp"

namespace gsphys::sim {

namespace {

constexpr double kMaxDt = 2e-3;
constexpr double kRigidMaxDt = 1e-3;
constexpr double kAutoSafety = 0.9;
constexpr double kDefaultPushRadius = 3.0;  // in particle spacings
constexpr std::size_t kMaxSphCells = 20'000'000;

double seed_spacing(const proxy::ParticleSeed& seed) {
  if (seed.spacing > 0.0) return seed.spacing;
  if (!seed.rest_volume.empty() && seed.rest_volume.front() > 0.0) return std::cbrt(seed.rest_volume.front());
  throw Error(Errc::config, "particle seed has no spacing");
}

Box particle_domain(const proxy::ParticleSeed& seed, const WorldConfig& world) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& p : seed.positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if (!world.domain) return detail::default_domain(lo, hi, world.ground);
  const Box& box = *world.domain;
  if ((lo.array() < box.min.array()).any() || (hi.array() > box.max.array()).any()) {
    throw Error(Errc::config, "particles extend outside the simulation domain");
  }
  return box;
}

struct Kinds {
  bool rigid = false, elastic = false, fluid = false;
};

Kinds present_kinds(const proxy::ParticleSeed& seed, std::span<const Material> materials) {
  Kinds k;
  std::vector<bool> used(materials.size(), false);
  for (auto r : seed.region) used[r] = true;
  for (std::size_t r = 0; r < materials.size(); ++r) {
    if (!used[r]) continue;
    switch (materials[r].kind) {
      case MaterialKind::rigid: k.rigid = true; break;
      case MaterialKind::elastic: k.elastic = true; break;
      case MaterialKind::fluid: k.fluid = true; break;
    }
  }
  return k;
}

StepPlan make_plan(double max_dt, const WorldConfig& world) {
  StepPlan plan;
  plan.max_dt = max_dt;
  const double frame_dt = world.frame_dt();
  if (world.substeps > 0) {
    plan.substeps = world.substeps;
    plan.dt = frame_dt / world.substeps;
    if (plan.dt > max_dt * (1.0 + 1e-12)) {
      const double suggested = kAutoSafety * max_dt;
      std::ostringstream msg;
      msg << "dt " << plan.dt << " s exceeds the stability bound " << max_dt << " s; use dt <= " << suggested
          << " s (" << static_cast<int>(std::ceil(frame_dt / suggested)) << " substeps per frame)";
      throw UnstableConfig(suggested, msg.str());
    }
  } else {
    plan.substeps = std::max(1, static_cast<int>(std::ceil(frame_dt / (kAutoSafety * max_dt))));
    plan.dt = frame_dt / plan.substeps;
  }
  return plan;
}

double stable_dt(const Kinds& kinds, std::span<const Material> materials, double dx, double h) {
  double max_dt = kMaxDt;
  for (const auto& m : materials) {
    if (m.kind == MaterialKind::elastic && kinds.elastic) {
      max_dt = std::min(max_dt, 0.3 * dx / std::sqrt(m.youngs_modulus / m.density));
    }
    if (m.kind == MaterialKind::fluid && kinds.fluid) max_dt = std::min(max_dt, 0.25 * h / m.sound_speed());
  }
  if (kinds.rigid) max_dt = std::min(max_dt, kRigidMaxDt);
  return max_dt;
}

void validate_inputs(const proxy::ParticleSeed& seed, std::span<const Material> materials, const WorldConfig& world) {
  if (seed.positions.empty()) throw Error(Errc::config, "particle seed is empty");
  if (seed.rest_volume.size() != seed.size() || seed.region.size() != seed.size()) {
    throw Error(Errc::config, "particle seed arrays differ in length");
  }
  for (auto r : seed.region) {
    if (r >= materials.size()) {
      throw Error(Errc::config, "no material for region " + std::to_string(r));
    }
  }
  for (const auto& m : materials) m.validate();
  if (!(world.fps > 0.0) || !std::isfinite(world.fps)) throw Error(Errc::config, "fps must be positive");
  if (world.substeps < 0) throw Error(Errc::config, "substeps must be >= 0");
  if (world.grid_resolution < 4) throw Error(Errc::config, "grid_resolution must be >= 4");
  if (!world.gravity.allFinite()) throw Error(Errc::config, "gravity must be finite");
  if (world.ground && std::abs(world.ground->normal.norm() - 1.0) > 1e-6) {
    throw Error(Errc::config, "ground normal must be a unit vector");
  }
}

}  // namespace

struct Simulator::Impl {
  Box domain;
  detail::GridLayout layout;
  double smoothing = 0.0;
  Kinds kinds;
  std::vector<detail::RigidBody> bodies;
  std::optional<detail::MpmSolver> mpm;
  std::optional<detail::SphSolver> sph;
  double ground_friction = 0.5;

  void write_rigid(ParticleState& state) const {
    for (const auto& body : bodies) {
      const Mat3 rot = body.rotation_matrix();
      const Vec3 omega = body.angular_velocity();
      for (std::size_t q = 0; q < body.particles.size(); ++q) {
        const auto p = body.particles[q];
        const Vec3 r = rot * body.offsets[q];
        state.positions[p] = body.com + r;
        state.velocities[p] = body.velocity + omega.cross(r);
        state.gradients[p] = rot;
      }
      state.rigid_poses[body.region] = RigidPose{body.rotation, body.com - rot * body.rest_com};
    }
  }
};

StepPlan plan_steps(const proxy::ParticleSeed& seed, std::span<const Material> materials, const WorldConfig& world) {
  validate_inputs(seed, materials, world);
  const double spacing = seed_spacing(seed);
  const auto layout = detail::make_layout(particle_domain(seed, world), spacing, world.grid_resolution);
  const double max_dt =
      stable_dt(present_kinds(seed, materials), materials, layout.dx, detail::kSmoothingRatio * spacing);
  return make_plan(max_dt, world);
}

double conservative_max_dt(std::span<const Material> materials, double particle_spacing) {
  Kinds all;
  for (const auto& m : materials) {
    all.rigid |= m.kind == MaterialKind::rigid;
    all.elastic |= m.kind == MaterialKind::elastic;
    all.fluid |= m.kind == MaterialKind::fluid;
  }
  return stable_dt(all, materials, detail::kMinCellSpacings * particle_spacing,
                   detail::kSmoothingRatio * particle_spacing);
}

Simulator::Simulator(const proxy::ParticleSeed& seed, std::vector<Material> materials, WorldConfig world)
    : world_(std::move(world)), materials_(std::move(materials)), impl_(std::make_unique<Impl>()) {
  validate_inputs(seed, materials_, world_);
  spacing_ = seed_spacing(seed);
  impl_->domain = particle_domain(seed, world_);
  impl_->layout = detail::make_layout(impl_->domain, spacing_, world_.grid_resolution);
  impl_->smoothing = detail::kSmoothingRatio * spacing_;
  impl_->kinds = present_kinds(seed, materials_);
  replan();

  const std::size_t n = seed.size();
  state_.rest_positions = seed.positions;
  state_.positions = seed.positions;
  state_.velocities.assign(n, Vec3::Zero());
  state_.gradients.assign(n, Mat3::Identity());
  state_.region = seed.region;
  state_.masses.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    state_.masses[i] = materials_[seed.region[i]].density * seed.rest_volume[i];
  }
  state_.rigid_poses.assign(materials_.size(), RigidPose{});

  std::vector<std::vector<std::uint32_t>> by_region(materials_.size());
  for (std::size_t i = 0; i < n; ++i) by_region[seed.region[i]].push_back(static_cast<std::uint32_t>(i));
  std::vector<std::uint32_t> elastic, fluid;
  bool friction_set = false;
  for (std::uint32_t r = 0; r < materials_.size(); ++r) {
    if (by_region[r].empty()) continue;
    switch (materials_[r].kind) {
      case MaterialKind::rigid:
        impl_->bodies.push_back(
            detail::make_rigid_body(r, by_region[r], state_.rest_positions, state_.masses, spacing_));
        break;
      case MaterialKind::elastic:
        elastic.insert(elastic.end(), by_region[r].begin(), by_region[r].end());
        if (!friction_set) {
          impl_->ground_friction = materials_[r].friction;
          friction_set = true;
        }
        break;
      case MaterialKind::fluid:
        fluid.insert(fluid.end(), by_region[r].begin(), by_region[r].end());
        break;
    }
  }
  std::sort(elastic.begin(), elastic.end());
  std::sort(fluid.begin(), fluid.end());
  if (!elastic.empty()) impl_->mpm.emplace(impl_->layout, std::move(elastic));
  if (!fluid.empty()) {
    const Vec3 extent = impl_->domain.max - impl_->domain.min;
    const double cell = 2.0 * impl_->smoothing;
    const double cells = std::ceil(extent.x() / cell) * std::ceil(extent.y() / cell) * std::ceil(extent.z() / cell);
    if (cells > static_cast<double>(kMaxSphCells)) {
      throw Error(Errc::config, "simulation domain is too large for the fluid particle spacing");
    }
    impl_->sph.emplace(std::move(fluid), state_, materials_, spacing_, impl_->domain);
  }
  impl_->write_rigid(state_);
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

Box Simulator::domain() const { return impl_->domain; }

std::vector<RigidBodyInfo> Simulator::rigid_bodies() const {
  std::vector<RigidBodyInfo> out;
  for (const auto& b : impl_->bodies) {
    out.push_back({b.region, b.mass, b.com, b.velocity, b.angular_velocity()});
  }
  return out;
}

void Simulator::replan() {
  plan_ = make_plan(stable_dt(impl_->kinds, materials_, impl_->layout.dx, impl_->smoothing), world_);
}

void Simulator::apply_impulse(const ExternalForce& force, double scale) {
  if (force.magnitude == 0.0 || scale == 0.0) return;
  const double len = force.direction.norm();
  if (!(len > 0.0) || !std::isfinite(len)) throw Error(Errc::config, "force direction must be a nonzero vector");
  const Vec3 dir = force.direction / len;

  std::vector<std::uint32_t> selected;
  if (force.point) {
    const double radius = force.radius.value_or(kDefaultPushRadius * spacing_);
    const double r2 = radius * radius;
    std::uint32_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t i = 0; i < state_.size(); ++i) {
      const double d2 = (state_.positions[i] - *force.point).squaredNorm();
      if (d2 <= r2) selected.push_back(i);
      if (d2 < best) {
        best = d2;
        nearest = i;
      }
    }
    if (selected.empty()) selected.push_back(nearest);
  } else {
    selected.resize(state_.size());
    for (std::uint32_t i = 0; i < state_.size(); ++i) selected[i] = i;
  }

  double mass = 0.0;
  for (auto i : selected) mass += state_.masses[i];
  const double amount = force.magnitude * scale;
  const Vec3 dv = force.per_unit_mass ? Vec3(amount * dir) : Vec3(amount * dir / mass);

  std::vector<std::int64_t> body_of(materials_.size(), -1);
  for (std::size_t b = 0; b < impl_->bodies.size(); ++b) body_of[impl_->bodies[b].region] = std::int64_t(b);
  for (auto i : selected) {
    const auto body = body_of[state_.region[i]];
    if (body >= 0) {
      impl_->bodies[body].apply_impulse(state_.masses[i] * dv, state_.positions[i]);
    } else {
      state_.velocities[i] += dv;
    }
  }
}

void Simulator::apply_user_push(const ExternalForce& push) { pending_.push_back(push); }

void Simulator::step(std::span<const ExternalForce> scheduled) {
  const double t0 = time();
  const double t1 = static_cast<double>(frame_ + 1) / world_.fps;
  const int substeps = plan_.substeps;
  const double dt = plan_.dt;

  for (const auto& push : pending_) apply_impulse(push, 1.0);
  pending_.clear();

  std::vector<Vec3> old_velocity(impl_->bodies.size());
  std::vector<std::uint8_t> contact(impl_->bodies.size(), 0);
  for (int s = 0; s < substeps; ++s) {
    const double ts = t0 + (t1 - t0) * s / substeps;
    const double te = s + 1 == substeps ? t1 : t0 + (t1 - t0) * (s + 1) / substeps;
    for (const auto& f : scheduled) {
      if (f.kind == ExternalForce::Kind::impulse) {
        if (f.start >= ts && f.start < te) apply_impulse(f, 1.0);
      } else {
        const double overlap = std::min(te, f.end) - std::max(ts, f.start);
        if (overlap > 0.0) apply_impulse(f, overlap);
      }
    }

    for (std::size_t b = 0; b < impl_->bodies.size(); ++b) {
      auto& body = impl_->bodies[b];
      old_velocity[b] = body.velocity;
      body.velocity += dt * world_.gravity;
      contact[b] = world_.ground && detail::solve_ground_contact(body, *world_.ground, materials_[body.region], dt);
    }
    if (impl_->mpm) {
      impl_->mpm->substep(state_, materials_, impl_->bodies, world_, impl_->ground_friction, dt);
      // Elastic material may have pushed a body towards the ground.
      for (std::size_t b = 0; b < impl_->bodies.size(); ++b) {
        auto& body = impl_->bodies[b];
        if (world_.ground && detail::solve_ground_contact(body, *world_.ground, materials_[body.region], dt)) {
          contact[b] = 1;
        }
      }
    }
    for (std::size_t b = 0; b < impl_->bodies.size(); ++b) {
      auto& body = impl_->bodies[b];
      detail::advance_pose(body, old_velocity[b], !contact[b], dt);
      if (world_.ground) detail::project_out_of_ground(body, *world_.ground);
    }
    if (impl_->sph) impl_->sph->substep(state_, materials_, world_, dt);
  }
  impl_->write_rigid(state_);
  ++frame_;
  check_finite();
}

void Simulator::check_finite() const {
  for (std::size_t i = 0; i < state_.size(); ++i) {
    if (!state_.positions[i].allFinite() || !state_.velocities[i].allFinite() || !state_.gradients[i].allFinite()) {
      throw NumericalBlowup(frame_, "particle " + std::to_string(i) + " became non-finite at frame " +
                                        std::to_string(frame_) + "; lower dt or soften the material");
    }
  }
}

Snapshot Simulator::snapshot() const {
  Snapshot snap;
  snap.displacements.resize(state_.size());
  for (std::size_t i = 0; i < state_.size(); ++i) {
    snap.displacements[i] = state_.positions[i] - state_.rest_positions[i];
  }
  snap.gradients = state_.gradients;
  return snap;
}

void Simulator::set_youngs_modulus(double youngs) {
  auto saved = materials_;
  for (auto& m : materials_) {
    if (m.kind == MaterialKind::elastic) m.youngs_modulus = youngs;
  }
  try {
    for (const auto& m : materials_) m.validate();
    replan();
  } catch (...) {
    materials_ = std::move(saved);
    throw;
  }
}

void Simulator::set_surface_tension(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error(Errc::config, "surface_tension must be >= 0");
  for (auto& m : materials_) {
    if (m.kind == MaterialKind::fluid) m.surface_tension = gamma;
  }
}

void Simulator::set_restitution(double restitution) {
  if (!(restitution >= 0.0 && restitution <= 1.0)) throw Error(Errc::config, "restitution must be in [0, 1]");
  for (auto& m : materials_) m.restitution = restitution;
}

}  // namespace gsphys::sim
