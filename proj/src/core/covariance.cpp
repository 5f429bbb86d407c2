#include "gsphys/core/covariance.hpp"

#include <cmath>

#include "gsphys/core/error.hpp"

namespace gsphys {

SymCov SymCov::from_matrix(const Mat3& m) {
  return SymCov{{m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)), m(1, 1),
                 0.5 * (m(1, 2) + m(2, 1)), m(2, 2)}};
}

Mat3 SymCov::matrix() const {
  Mat3 m;
  m << v[0], v[1], v[2],
       v[1], v[3], v[4],
       v[2], v[4], v[5];
  return m;
}

Mat3 rotation_from_quat(const QuatWXYZ& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(Errc::invalid_rotation, "quaternion has zero or non-finite norm");
  }
  const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

SymCov covariance_from_params(const QuatWXYZ& rotation, const Vec3& log_scale) {
  const Mat3 m = rotation_from_quat(rotation) * log_scale.array().exp().matrix().asDiagonal();
  return SymCov::from_matrix(m * m.transpose());
}

SymCov transform_covariance(const SymCov& sigma, const Mat3& f) {
  return SymCov::from_matrix(f * sigma.matrix() * f.transpose());
}

}  // namespace gsphys
