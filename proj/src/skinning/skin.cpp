#include "gsphys/skinning/skin.hpp"

#include "gsphys/core/error.hpp"

namespace gsphys::skinning {
namespace {

void check_lengths(const Binding& binding, const io::AnimFrame& rest, std::size_t d, std::size_t f) {
  if (d != binding.particle_count || f != binding.particle_count) {
    throw Error(Errc::invalid_input, "displacement/gradient arrays do not match the bound particle count");
  }
  for (std::uint32_t id : binding.gaussian_ids) {
    if (id >= rest.size()) throw Error(Errc::invalid_input, "binding refers to a Gaussian outside the base set");
  }
}

}  // namespace

io::AnimFrame skin_frame(const Binding& binding, const io::AnimFrame& rest, std::span<const Vec3> displacements,
                         std::span<const Mat3> gradients, const SkinOptions& options) {
  check_lengths(binding, rest, displacements.size(), gradients.size());
  io::AnimFrame out = rest;
  out.spawned.clear();
  const std::size_t k = binding.k;
  for (std::size_t j = 0; j < binding.size(); ++j) {
    const std::uint32_t gid = binding.gaussian_ids[j];
    Vec3 shift = Vec3::Zero();
    Mat3 f_hat = Mat3::Zero();
    for (std::size_t n = 0; n < k; ++n) {
      const std::size_t e = j * k + n;
      const std::uint32_t p = binding.neighbors[e];
      const double w = binding.weights[e];
      const Mat3& f = gradients[p];
      f_hat.noalias() += w * f;
      if (options.center == CenterUpdate::affine) {
        shift.noalias() += w * (displacements[p] + f * binding.offsets[e] - binding.offsets[e]);
      } else {
        shift.noalias() += w * displacements[p];
      }
    }
    out.centers[gid] = rest.centers[gid] + shift;
    out.covariances[gid] = transform_covariance(rest.covariances[gid], f_hat);
  }
  return out;
}

io::AnimFrame skin_frame(const Binding& binding, const GaussianSet& base, std::span<const Vec3> displacements,
                         std::span<const Mat3> gradients, const SkinOptions& options) {
  return skin_frame(binding, io::rest_frame(base), displacements, gradients, options);
}

io::AnimFrame skin_fluid_frame(const Binding& binding, const io::AnimFrame& rest,
                               std::span<const Vec3> displacements) {
  check_lengths(binding, rest, displacements.size(), displacements.size());
  io::AnimFrame out = rest;
  out.spawned.clear();
  const std::size_t k = binding.k;
  for (std::size_t j = 0; j < binding.size(); ++j) {
    Vec3 shift = Vec3::Zero();
    for (std::size_t n = 0; n < k; ++n) {
      shift.noalias() += binding.weights[j * k + n] * displacements[binding.neighbors[j * k + n]];
    }
    const std::uint32_t gid = binding.gaussian_ids[j];
    out.centers[gid] = rest.centers[gid] + shift;
  }
  return out;
}

}  // namespace gsphys::skinning
