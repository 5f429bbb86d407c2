#pragma once

#include "gsphys/core/types.hpp"

namespace gsphys {

struct Decomp {
  Mat3 rotation;  // U V^T, det +1
  Mat3 stretch;   // V diag(s) V^T
  Mat3 u;
  Vec3 singular_values;
  Mat3 v;
};

/// Rotation/stretch split of a deformation gradient through its SVD.
///
/// When det(U V^T) < 0 the last column of U and the last singular value are
/// negated, so `rotation` is always proper and `rotation * stretch == F`.
/// Throws Errc::invalid_input for non-finite entries.
Decomp polar_decompose(const Mat3& f);

}  // namespace gsphys
