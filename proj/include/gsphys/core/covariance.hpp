#pragma once

#include <array>

#include "gsphys/core/types.hpp"

namespace gsphys {

/// Upper triangle of a symmetric 3x3 matrix: xx, xy, xz, yy, yz, zz.
struct SymCov {
  std::array<double, 6> v{};

  static SymCov identity() { return SymCov{{1.0, 0.0, 0.0, 1.0, 0.0, 1.0}}; }
  /// Symmetrizes the input as (M + M^T) / 2.
  static SymCov from_matrix(const Mat3& m);
  Mat3 matrix() const;

  double xx() const { return v[0]; }
  double xy() const { return v[1]; }
  double xz() const { return v[2]; }
  double yy() const { return v[3]; }
  double yz() const { return v[4]; }
  double zz() const { return v[5]; }

  friend bool operator==(const SymCov&, const SymCov&) = default;
};

/// Rotation matrix of a (w, x, y, z) quaternion after normalization.
/// Throws Errc::invalid_rotation for a zero or non-finite quaternion.
Mat3 rotation_from_quat(const QuatWXYZ& q);

/// Sigma = R diag(exp(ls))^2 R^T.
SymCov covariance_from_params(const QuatWXYZ& rotation, const Vec3& log_scale);

/// F Sigma F^T, symmetrized. F may be singular.
SymCov transform_covariance(const SymCov& sigma, const Mat3& f);

}  // namespace gsphys
