#include "sph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gsphys::sim::detail {

CubicKernel::CubicKernel(double h)
    : inv_h_(1.0 / h), sigma_(1.0 / (std::numbers::pi * h * h * h)), dsigma_(sigma_ / h) {}

CohesionKernel::CohesionKernel(double support)
    : support_(support),
      scale_(32.0 / (std::numbers::pi * std::pow(support, 9))),
      offset_(std::pow(support, 6) / 64.0) {}

double CohesionKernel::operator()(double r) const {
  if (r <= 0.0 || r >= support_) return 0.0;
  const double t = (support_ - r) * (support_ - r) * (support_ - r) * r * r * r;
  return 2.0 * r > support_ ? scale_ * t : scale_ * (2.0 * t - offset_);
}

SphSolver::SphSolver(std::vector<std::uint32_t> fluid, const ParticleState& state,
                     std::span<const Material> materials, double spacing, const Box& domain)
    : fluid_(std::move(fluid)), h_(kSmoothingRatio * spacing), domain_(domain) {
  cell_ = 2.0 * h_;
  for (int a = 0; a < 3; ++a) {
    dims_[a] = std::max(1, static_cast<int>(std::ceil((domain_.max[a] - domain_.min[a]) / cell_)));
  }
  density_.assign(fluid_.size(), 0.0);
  pressure_.assign(fluid_.size(), 0.0);
  accel_.assign(fluid_.size(), Vec3::Zero());
  pi_.assign(fluid_.size(), 0.0);
  visc_.assign(fluid_.size(), 0.0);
  tension_.assign(fluid_.size(), 0.0);

  // Calibrate each region's rest density to its densest initial particle, so
  // the sampled rest configuration is pressure-free.
  build_cells(state);
  gather_pairs(state);
  std::vector<double> region_max(materials.size(), 0.0);
  for (std::size_t l = 0; l < fluid_.size(); ++l) {
    auto& m = region_max[state.region[fluid_[l]]];
    m = std::max(m, density_[l]);
  }
  rest_density_.resize(fluid_.size());
  for (std::size_t l = 0; l < fluid_.size(); ++l) rest_density_[l] = region_max[state.region[fluid_[l]]];
}

void SphSolver::build_cells(const ParticleState& state) {
  const std::size_t cells = std::size_t(dims_[0]) * dims_[1] * dims_[2];
  cell_of_.resize(fluid_.size());
  cell_start_.assign(cells + 1, 0);
  for (std::size_t l = 0; l < fluid_.size(); ++l) {
    const Vec3& x = state.positions[fluid_[l]];
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) {
      const double g = (x[a] - domain_.min[a]) / cell_;
      c[a] = g >= 0.0 ? static_cast<int>(std::min(g, dims_[a] - 1.0)) : 0;
    }
    cell_of_[l] = static_cast<std::uint32_t>((std::size_t(c[0]) * dims_[1] + c[1]) * dims_[2] + c[2]);
    ++cell_start_[cell_of_[l] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  sorted_.resize(fluid_.size());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t l = 0; l < fluid_.size(); ++l) sorted_[fill[cell_of_[l]]++] = static_cast<std::uint32_t>(l);
}

void SphSolver::gather_pairs(const ParticleState& state) {
  pairs_.clear();
  const CubicKernel kernel(h_);
  for (std::size_t l = 0; l < fluid_.size(); ++l) {
    density_[l] = state.masses[fluid_[l]] * kernel(0.0);
  }
  const double support2 = cell_ * cell_;
  auto visit = [&](std::uint32_t a, std::uint32_t b) {
    const Vec3 d = state.positions[fluid_[a]] - state.positions[fluid_[b]];
    const double r2 = d.squaredNorm();
    if (r2 >= support2) return;
    const double r = std::sqrt(r2);
    const double w = kernel(r);
    density_[a] += state.masses[fluid_[b]] * w;
    density_[b] += state.masses[fluid_[a]] * w;
    if (r > 0.0) pairs_.push_back({a, b, r});
  };
  // Each unordered pair once: same cell with a later slot, plus the 13
  // neighboring cells that come after this one in lexicographic order.
  static constexpr int kForward[13][3] = {{0, 0, 1},  {0, 1, -1}, {0, 1, 0},  {0, 1, 1},  {1, -1, -1},
                                          {1, -1, 0}, {1, -1, 1}, {1, 0, -1}, {1, 0, 0},  {1, 0, 1},
                                          {1, 1, -1}, {1, 1, 0},  {1, 1, 1}};
  for (int cx = 0; cx < dims_[0]; ++cx) {
    for (int cy = 0; cy < dims_[1]; ++cy) {
      for (int cz = 0; cz < dims_[2]; ++cz) {
        const std::size_t c = (std::size_t(cx) * dims_[1] + cy) * dims_[2] + cz;
        const auto begin = cell_start_[c], end = cell_start_[c + 1];
        if (begin == end) continue;
        for (auto s = begin; s < end; ++s) {
          for (auto t = s + 1; t < end; ++t) visit(sorted_[s], sorted_[t]);
        }
        for (const auto& o : kForward) {
          const int nx = cx + o[0], ny = cy + o[1], nz = cz + o[2];
          if (nx >= dims_[0] || ny < 0 || ny >= dims_[1] || nz < 0 || nz >= dims_[2]) continue;
          const std::size_t n = (std::size_t(nx) * dims_[1] + ny) * dims_[2] + nz;
          for (auto s = begin; s < end; ++s) {
            for (auto t = cell_start_[n]; t < cell_start_[n + 1]; ++t) visit(sorted_[s], sorted_[t]);
          }
        }
      }
    }
  }
}

void SphSolver::substep(ParticleState& state, std::span<const Material> materials, const WorldConfig& world,
                        double dt) {
  if (fluid_.empty()) return;
  build_cells(state);
  gather_pairs(state);
  for (std::size_t l = 0; l < fluid_.size(); ++l) {
    const Material& m = materials[state.region[fluid_[l]]];
    const double ratio = density_[l] / rest_density_[l];
    pressure_[l] = std::max(0.0, m.eos_stiffness * (std::pow(ratio, m.eos_exponent) - 1.0));
  }

  const CubicKernel kernel(h_);
  const CohesionKernel cohesion(2.0 * h_);
  for (std::size_t l = 0; l < fluid_.size(); ++l) {
    const Material& mat = materials[state.region[fluid_[l]]];
    accel_[l] = world.gravity;
    pi_[l] = pressure_[l] / (density_[l] * density_[l]);
    visc_[l] = mat.viscosity * mat.sound_speed();
    tension_[l] = mat.surface_tension;
  }
  // Pairwise terms are applied equal and opposite; mixed-material pairs use
  // the mean viscosity.
  for (const auto& [l, o, r] : pairs_) {
    const auto p = fluid_[l], q = fluid_[o];
    const Vec3 d = state.positions[p] - state.positions[q];
    const Vec3 dir = d / r;
    const Vec3 grad = kernel.derivative(r) * dir;
    double coeff = pi_[l] + pi_[o];
    const double vx = (state.velocities[p] - state.velocities[q]).dot(d);
    if (vx < 0.0) {
      const double mu = h_ * vx / (r * r + 0.01 * h_ * h_);
      coeff -= (visc_[l] + visc_[o]) * mu / (density_[l] + density_[o]);
    }
    const double mi = state.masses[p], mj = state.masses[q];
    accel_[l] -= mj * coeff * grad;
    accel_[o] += mi * coeff * grad;
    if (tension_[l] > 0.0 || tension_[o] > 0.0) {
      const double c = cohesion(r);
      accel_[l] -= tension_[l] * mj * c * dir;
      accel_[o] += tension_[o] * mi * c * dir;
    }
  }

  for (std::size_t l = 0; l < fluid_.size(); ++l) {
    const auto p = fluid_[l];
    Vec3& v = state.velocities[p];
    Vec3& x = state.positions[p];
    v += dt * accel_[l];
    x += dt * v;
    if (world.ground) {
      const GroundPlane& g = *world.ground;
      const double dist = g.signed_distance(x);
      if (dist < 0.0) {
        x -= dist * g.normal;
        const double vn = v.dot(g.normal);
        if (vn < 0.0) {
          const Vec3 vt = v - vn * g.normal;
          const double speed = vt.norm();
          const double friction = materials[state.region[p]].friction;
          v = speed > 0.0 ? Vec3(vt * std::max(0.0, 1.0 - friction * (-vn) / speed)) : Vec3::Zero();
        }
      }
    }
    for (int ax = 0; ax < 3; ++ax) {
      if (x[ax] < domain_.min[ax]) {
        x[ax] = domain_.min[ax];
        v[ax] = std::max(v[ax], 0.0);
      } else if (x[ax] > domain_.max[ax]) {
        x[ax] = domain_.max[ax];
        v[ax] = std::min(v[ax], 0.0);
      }
    }
  }
}

}  // namespace gsphys::sim::detail
