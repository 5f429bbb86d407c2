#include "gsphys/sim/constitutive.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>

#include "gsphys/core/polar.hpp"

namespace gsphys::sim {

namespace {

// Columns are cross products of the other two columns, so cofactor(x) = det(x) x^-T.
Mat3 cofactor(const Mat3& x) {
  Mat3 c;
  c.col(0) = x.col(1).cross(x.col(2));
  c.col(1) = x.col(2).cross(x.col(0));
  c.col(2) = x.col(0).cross(x.col(1));
  return c;
}

}  // namespace

Mat3 polar_rotation(const Mat3& f) {
  // Let non-finite input propagate; the simulator reports it per frame.
  if (!f.allFinite()) return Mat3::Constant(std::numeric_limits<double>::quiet_NaN());
  const double norm = f.norm();
  if (f.determinant() > 1e-6 * norm * norm * norm) {
    Mat3 x = f;
    // Determinant scaling speeds up the first iterations; near convergence it
    // is ~1 and skipped.
    bool scale = true;
    for (int it = 0; it < 30; ++it) {
      const Mat3 c = cofactor(x);
      const double d = x.col(0).dot(c.col(0));
      const double zeta = scale ? std::cbrt(1.0 / d) : 1.0;
      const Mat3 next = 0.5 * (zeta * x + c / (d * zeta));
      const double change = (next - x).squaredNorm();
      x = next;
      // Quadratic convergence: the error left after a step of 1e-9 is far
      // below rounding.
      if (change < 1e-18) return x;
      if (change < 1e-4) scale = false;
    }
    return x;
  }
  return polar_decompose(f).rotation;
}

double fixed_corotated_energy(const Mat3& f, double mu, double lambda) {
  const Mat3 r = polar_rotation(f);
  const double j = f.determinant();
  return mu * (f - r).squaredNorm() + 0.5 * lambda * (j - 1.0) * (j - 1.0);
}

Mat3 fixed_corotated_stress(const Mat3& f, double mu, double lambda) {
  const Mat3 r = polar_rotation(f);
  const double j = f.determinant();
  // J F^-T is the cofactor matrix, well defined even for singular F.
  return 2.0 * mu * (f - r) + lambda * (j - 1.0) * cofactor(f);
}

Mat3 fixed_corotated_kirchhoff(const Mat3& f, double mu, double lambda) {
  const Mat3 r = polar_rotation(f);
  const double j = f.determinant();
  return 2.0 * mu * (f - r) * f.transpose() + Mat3::Identity() * (lambda * (j - 1.0) * j);
}

}  // namespace gsphys::sim
