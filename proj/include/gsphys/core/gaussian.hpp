#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "gsphys/core/types.hpp"

namespace gsphys {

inline constexpr std::size_t kShCoeffs = 48;  // 3 DC + 45 rest
inline constexpr double kShC0 = 0.28209479177387814;

struct Gaussian {
  Vec3 center = Vec3::Zero();
  QuatWXYZ rotation{1.0, 0.0, 0.0, 0.0};
  Vec3 log_scale = Vec3::Zero();
  double opacity_logit = 0.0;
  // f_dc_0..2 followed by f_rest_0..44, PLY channel-major order.
  std::array<float, kShCoeffs> color{};

  Vec3 scale() const { return log_scale.array().exp(); }
  double opacity() const;
  /// DC color mapped to [0,1] RGB (0.5 + C0 * f_dc), clamped.
  Vec3 dc_rgb() const;
};

struct GaussianSet {
  std::vector<Gaussian> gaussians;
  // Indices of the simulated object; everything else is static background.
  std::vector<std::size_t> object_mask;

  std::size_t size() const { return gaussians.size(); }
  bool empty() const { return gaussians.empty(); }

  /// Marks every Gaussian as part of the object.
  void select_all();
  /// Throws Errc::invalid_input when a mask index is out of range or repeated.
  void validate_mask() const;
  std::vector<Vec3> object_centers() const;
};

double sigmoid(double x);
double logit(double p);

}  // namespace gsphys
