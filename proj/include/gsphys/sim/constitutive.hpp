#pragma once

#include "gsphys/core/types.hpp"

namespace gsphys::sim {

/// Rotation factor of the polar decomposition F = R S for det(F) > 0,
/// by scaled Newton iteration; falls back to the SVD for inverted or
/// near-singular F.
Mat3 polar_rotation(const Mat3& f);

/// Fixed-corotated energy density mu |F - R|^2 + lambda/2 (J - 1)^2.
double fixed_corotated_energy(const Mat3& f, double mu, double lambda);

/// First Piola-Kirchhoff stress 2 mu (F - R) + lambda (J - 1) J F^-T.
Mat3 fixed_corotated_stress(const Mat3& f, double mu, double lambda);

/// P F^T, the form the MPM transfer needs; avoids the inverse.
Mat3 fixed_corotated_kirchhoff(const Mat3& f, double mu, double lambda);

}  // namespace gsphys::sim
