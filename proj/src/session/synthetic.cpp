#include "gsphys/session/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "gsphys/core/error.hpp"

namespace gsphys::session {
namespace {

// Vase profile radius at normalized height h in [0, 1].
double vase_radius(double h) { return 0.05 + 0.03 * std::sin(std::numbers::pi * (1.4 * h + 0.1)); }

Gaussian make(std::mt19937_64& rng, const Vec3& c, const Vec3& rgb, double log_scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Gaussian g;
  g.center = c;
  const Vec3 axis = Vec3(u(rng), u(rng), u(rng)).normalized();
  const Eigen::Quaterniond q(Eigen::AngleAxisd(std::numbers::pi * u(rng), axis));
  g.rotation = QuatWXYZ(q.w(), q.x(), q.y(), q.z());
  g.log_scale = Vec3::Constant(log_scale) + 0.3 * Vec3(u(rng), u(rng), u(rng));
  g.opacity_logit = 2.0;
  for (int k = 0; k < 3; ++k) g.color[k] = static_cast<float>((rgb[k] - 0.5) / kShC0);
  return g;
}

}  // namespace

SyntheticShape parse_shape(std::string_view name) {
  if (name == "cube") return SyntheticShape::cube;
  if (name == "vase") return SyntheticShape::vase;
  throw Error(Errc::invalid_input, "unknown shape '" + std::string(name) + "' (cube or vase)");
}

GaussianSet synthetic_scene(SyntheticShape shape, std::size_t count, std::uint64_t seed) {
  if (count < 64) throw Error(Errc::invalid_input, "a synthetic object needs at least 64 Gaussians");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  GaussianSet set;
  set.gaussians.reserve(count);

  const double side = 0.2;
  // Typical spacing between neighbors sets the splat size.
  const double log_scale = std::log(0.5 * side / std::cbrt(static_cast<double>(count)));
  for (std::size_t i = 0; i < count; ++i) {
    Vec3 c;
    Vec3 rgb;
    if (shape == SyntheticShape::cube) {
      c = Vec3(side * (u01(rng) - 0.5), side * (u01(rng) - 0.5), side * u01(rng));
      rgb = Vec3(0.8, 0.3 + 0.4 * c.z() / side, 0.2);
    } else {
      // Solid of revolution; radius drawn so the density is uniform in area.
      const double h = u01(rng);
      const double r = vase_radius(h) * std::sqrt(u01(rng));
      const double phi = 2.0 * std::numbers::pi * u01(rng);
      c = Vec3(r * std::cos(phi), r * std::sin(phi), 0.3 * h);
      rgb = Vec3(0.2, 0.4, 0.8 - 0.3 * h);
    }
    set.gaussians.push_back(make(rng, c, rgb, log_scale));
  }
  set.select_all();
  return set;
}

}  // namespace gsphys::session
