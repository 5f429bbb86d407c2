#pragma once

#include <span>

#include "gsphys/io/anim.hpp"
#include "gsphys/skinning/binding.hpp"

namespace gsphys::skinning {

enum class CenterUpdate {
  // c_j + sum_i w_ji d_i
  displacement_blend,
  // c_j + sum_i w_ji (d_i + (F_i - I)(c_j - p_i(0))): each particle carries the
  // Gaussian with its own local affine motion. Identical to the plain blend
  // when every F_i = I, and exact for any global rigid motion.
  affine,
};

struct SkinOptions {
  CenterUpdate center = CenterUpdate::affine;
};

/// Poses the bound Gaussians of `rest` (a rest frame of the base set) with
/// particle displacements and deformation gradients. Unbound Gaussians keep
/// their rest center and covariance. Covariances use the blended gradient
/// F_hat = sum_i w_ji F_i as F_hat Sigma F_hat^T.
io::AnimFrame skin_frame(const Binding& binding, const io::AnimFrame& rest, std::span<const Vec3> displacements,
                         std::span<const Mat3> gradients, const SkinOptions& options = {});

io::AnimFrame skin_frame(const Binding& binding, const GaussianSet& base, std::span<const Vec3> displacements,
                         std::span<const Mat3> gradients, const SkinOptions& options = {});

/// Fluid variant: centers from blended displacements, covariances untouched
/// (F_hat = I).
io::AnimFrame skin_fluid_frame(const Binding& binding, const io::AnimFrame& rest,
                               std::span<const Vec3> displacements);

}  // namespace gsphys::skinning
