#include "gsphys/core/polar.hpp"

#include <Eigen/SVD>

#include "gsphys/core/error.hpp"

namespace gsphys {

Decomp polar_decompose(const Mat3& f) {
  if (!f.allFinite()) throw Error(Errc::invalid_input, "deformation gradient has non-finite entries");

  Eigen::JacobiSVD<Mat3> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Decomp d;
  d.u = svd.matrixU();
  d.v = svd.matrixV();
  d.singular_values = svd.singularValues();
  if ((d.u * d.v.transpose()).determinant() < 0.0) {
    d.u.col(2) *= -1.0;
    d.singular_values[2] *= -1.0;
  }
  d.rotation = d.u * d.v.transpose();
  d.stretch = d.v * d.singular_values.asDiagonal() * d.v.transpose();
  return d;
}

}  // namespace gsphys
