#include "mpm.hpp"

#include <algorithm>
#include <cmath>

#include "gsphys/sim/constitutive.hpp"

namespace gsphys::sim::detail {

MpmSolver::MpmSolver(GridLayout layout, std::vector<std::uint32_t> elastic)
    : layout_(layout),
      inv_dx_(1.0 / layout.dx),
      elastic_(std::move(elastic)),
      affine_(elastic_.size(), Mat3::Zero()),
      nodes_(layout.node_count(), Eigen::Vector4d::Zero()),
      touched_(layout.node_count(), 0),
      rigid_mass_(layout.node_count(), 0.0),
      rigid_weight_(layout.node_count(), 0.0),
      owner_(layout.node_count(), -1) {}

void MpmSolver::reset_affine() { std::fill(affine_.begin(), affine_.end(), Mat3::Zero()); }

MpmSolver::Stencil MpmSolver::stencil(const Vec3& x) const {
  Stencil s;
  for (int a = 0; a < 3; ++a) {
    double g = (x[a] - layout_.origin[a]) * inv_dx_;
    // NaN lands on the lower clamp; the simulator reports it after the frame.
    g = g >= 1.5 ? std::min(g, layout_.n[a] - 2.5) : 1.5;
    const int base = static_cast<int>(std::floor(g - 0.5));
    const double f = g - base;
    s.base[a] = base;
    s.fx[a] = f;
    s.w[a][0] = 0.5 * (1.5 - f) * (1.5 - f);
    s.w[a][1] = 0.75 - (f - 1.0) * (f - 1.0);
    s.w[a][2] = 0.5 * (f - 0.5) * (f - 0.5);
  }
  return s;
}

void MpmSolver::clear() {
  for (auto idx : active_) {
    nodes_[idx].setZero();
    touched_[idx] = 0;
    rigid_mass_[idx] = 0.0;
    rigid_weight_[idx] = 0.0;
    owner_[idx] = -1;
  }
  active_.clear();
}

void MpmSolver::update_grid(std::vector<RigidBody>& bodies, const WorldConfig& world, double ground_friction,
                            double dt) {
  const auto& n = layout_.n;
  // Keep a deterministic node order regardless of particle order.
  std::sort(active_.begin(), active_.end());
  std::vector<Vec3> impulse(bodies.size(), Vec3::Zero());
  std::vector<Vec3> angular(bodies.size(), Vec3::Zero());
  std::vector<Vec3> omega(bodies.size());
  for (std::size_t b = 0; b < bodies.size(); ++b) omega[b] = bodies[b].angular_velocity();

  for (auto idx : active_) {
    Eigen::Vector4d& node = nodes_[idx];
    const double m = node.w();
    const int k = static_cast<int>(idx % n[2]);
    const int j = static_cast<int>((idx / n[2]) % n[1]);
    const int i = static_cast<int>(idx / (std::size_t(n[2]) * n[1]));
    const Vec3 x = layout_.node_position(i, j, k);

    if (owner_[idx] >= 0 && rigid_mass_[idx] >= m) {
      const auto b = owner_[idx];
      const Vec3 vr = bodies[b].velocity + omega[b].cross(x - bodies[b].com);
      if (m > 0.0) {
        const Vec3 change = node.head<3>() + m * dt * world.gravity - m * vr;
        impulse[b] += change;
        angular[b] += (x - bodies[b].com).cross(change);
      }
      node.head<3>() = vr;
      continue;
    }
    if (m <= 0.0) continue;
    Vec3 v = node.head<3>() / m + dt * world.gravity;

    const std::array<int, 3> ijk{i, j, k};
    for (int a = 0; a < 3; ++a) {
      if (ijk[a] < 2 && v[a] < 0.0) v[a] = 0.0;
      if (ijk[a] > n[a] - 3 && v[a] > 0.0) v[a] = 0.0;
    }
    if (world.ground) {
      const GroundPlane& g = *world.ground;
      if (g.signed_distance(x) < 0.0) {
        const double vn = v.dot(g.normal);
        if (vn < 0.0) {
          const Vec3 vt = v - vn * g.normal;
          const double speed = vt.norm();
          v = speed > 0.0 ? Vec3(vt * std::max(0.0, 1.0 - ground_friction * (-vn) / speed)) : Vec3::Zero();
        }
      }
    }
    node.head<3>() = v;
  }
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    bodies[b].velocity += impulse[b] / bodies[b].mass;
    bodies[b].angular_momentum += angular[b];
  }
}

void MpmSolver::substep(ParticleState& state, std::span<const Material> materials, std::vector<RigidBody>& bodies,
                        const WorldConfig& world, double ground_friction, double dt) {
  clear();
  const double stress_scale = -dt * 4.0 * inv_dx_ * inv_dx_;
  const auto& n = layout_.n;

  // affine * (node - x) splits into a per-particle constant plus one column
  // of affine * dx per stencil offset.
  auto scatter = [&](const Stencil& s, const Vec3& mv, const Mat3& affine, double m) {
    const Mat3 ad = affine * layout_.dx;
    const Vec3 base = mv - ad * s.fx;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double wab = s.w[0][a] * s.w[1][b];
        const Vec3 row_v = base + a * ad.col(0) + b * ad.col(1);
        const std::size_t row = layout_.index(s.base[0] + a, s.base[1] + b, s.base[2]);
        for (int c = 0; c < 3; ++c) {
          const double w = wab * s.w[2][c];
          const std::size_t idx = row + c;
          Eigen::Vector4d& node = nodes_[idx];
          node.head<3>() += w * (row_v + c * ad.col(2));
          node.w() += w * m;
          if (!touched_[idx]) {
            touched_[idx] = 1;
            active_.push_back(static_cast<std::uint32_t>(idx));
          }
        }
      }
    }
  };

  for (std::size_t e = 0; e < elastic_.size(); ++e) {
    const auto p = elastic_[e];
    const Material& mat = materials[state.region[p]];
    const double m = state.masses[p];
    const double vol = m / mat.density;
    const Mat3 stress =
        stress_scale * vol * fixed_corotated_kirchhoff(state.gradients[p], mat.lame_mu(), mat.lame_lambda());
    scatter(stencil(state.positions[p]), m * state.velocities[p], stress + m * affine_[e], m);
  }

  for (std::size_t b = 0; b < bodies.size(); ++b) {
    const auto& body = bodies[b];
    const Mat3 rot = body.rotation_matrix();
    for (std::size_t q = 0; q < body.particles.size(); ++q) {
      const double m = state.masses[body.particles[q]];
      const Stencil st = stencil(body.com + rot * body.offsets[q]);
      for (int a = 0; a < 3; ++a) {
        for (int bb = 0; bb < 3; ++bb) {
          const std::size_t row = layout_.index(st.base[0] + a, st.base[1] + bb, st.base[2]);
          for (int c = 0; c < 3; ++c) {
            const double w = st.w[0][a] * st.w[1][bb] * st.w[2][c];
            const std::size_t idx = row + c;
            rigid_mass_[idx] += w * m;
            if (w > rigid_weight_[idx]) {
              rigid_weight_[idx] = w;
              owner_[idx] = static_cast<std::int32_t>(b);
            }
            if (!touched_[idx]) {
              touched_[idx] = 1;
              active_.push_back(static_cast<std::uint32_t>(idx));
            }
          }
        }
      }
    }
  }

  update_grid(bodies, world, ground_friction, dt);

  // C = 4 / dx^2 sum w v (node - x)^T, with node - x = dx ((a, b, c) - fx).
  auto gather = [&](const Stencil& s, Vec3& v, Mat3& c) {
    v.setZero();
    Mat3 moment = Mat3::Zero();  // column k: sum of w v times the k-th stencil offset
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double wab = s.w[0][a] * s.w[1][b];
        const std::size_t row = layout_.index(s.base[0] + a, s.base[1] + b, s.base[2]);
        Vec3 sum = Vec3::Zero();
        Vec3 sum_c = Vec3::Zero();
        for (int cc = 0; cc < 3; ++cc) {
          const Vec3 wv = (wab * s.w[2][cc]) * nodes_[row + cc].head<3>();
          sum += wv;
          sum_c += cc * wv;
        }
        v += sum;
        moment.col(0) += a * sum;
        moment.col(1) += b * sum;
        moment.col(2) += sum_c;
      }
    }
    c = (4.0 * inv_dx_) * (moment - v * s.fx.transpose());
  };

  const Vec3 lo = layout_.origin + Vec3::Constant(1.5 * layout_.dx);
  const Vec3 hi = layout_.origin + layout_.dx * Vec3(n[0] - 2.5, n[1] - 2.5, n[2] - 2.5);
  for (std::size_t e = 0; e < elastic_.size(); ++e) {
    const auto p = elastic_[e];
    Vec3 v;
    Mat3 c;
    gather(stencil(state.positions[p]), v, c);
    state.velocities[p] = v;
    affine_[e] = c;
    state.positions[p] = (state.positions[p] + dt * v).cwiseMax(lo).cwiseMin(hi);
    state.gradients[p] = (Mat3::Identity() + dt * c) * state.gradients[p];
  }
}

}  // namespace gsphys::sim::detail
