#include "gsphys/core/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gsphys/core/error.hpp"

namespace gsphys {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
  p = std::clamp(p, 1e-7, 1.0 - 1e-7);
  return std::log(p / (1.0 - p));
}

double Gaussian::opacity() const { return sigmoid(opacity_logit); }

Vec3 Gaussian::dc_rgb() const {
  Vec3 rgb;
  for (int c = 0; c < 3; ++c) {
    rgb[c] = std::clamp(0.5 + kShC0 * static_cast<double>(color[c]), 0.0, 1.0);
  }
  return rgb;
}

void GaussianSet::select_all() {
  object_mask.resize(gaussians.size());
  std::iota(object_mask.begin(), object_mask.end(), std::size_t{0});
}

void GaussianSet::validate_mask() const {
  std::vector<bool> seen(gaussians.size(), false);
  for (std::size_t idx : object_mask) {
    if (idx >= gaussians.size()) {
      throw Error(Errc::invalid_input, "object mask index " + std::to_string(idx) + " out of range");
    }
    if (seen[idx]) {
      throw Error(Errc::invalid_input, "object mask index " + std::to_string(idx) + " repeated");
    }
    seen[idx] = true;
  }
}

std::vector<Vec3> GaussianSet::object_centers() const {
  std::vector<Vec3> out;
  out.reserve(object_mask.size());
  for (std::size_t idx : object_mask) out.push_back(gaussians[idx].center);
  return out;
}

}  // namespace gsphys
