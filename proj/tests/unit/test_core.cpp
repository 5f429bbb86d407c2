#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>

#include "generators.hpp"
#include "gsphys/core/covariance.hpp"
#include "gsphys/core/error.hpp"
#include "gsphys/core/hash_grid.hpp"
#include "gsphys/core/kdtree.hpp"
#include "gsphys/core/polar.hpp"

using namespace gsphys;
using gsphys::testing::Gen;

namespace {

// Straight matrix product, independent of the SymCov helpers.
Mat3 reference_covariance(const QuatWXYZ& q, const Vec3& ls) {
  const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  const Mat3 r = quat.normalized().toRotationMatrix();
  Mat3 s = Mat3::Zero();
  for (int i = 0; i < 3; ++i) s(i, i) = std::exp(ls[i]);
  return r * s * s.transpose() * r.transpose();
}

Vec3 sorted_eigenvalues(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("identity quaternion and zero log-scale give the identity covariance") {
  const SymCov c = covariance_from_params({1, 0, 0, 0}, Vec3::Zero());
  CHECK((c.matrix() - Mat3::Identity()).norm() < 1e-15);
}

TEST_CASE("90 degree z rotation swaps the stretched axis") {
  const double h = std::sqrt(0.5);
  const SymCov c = covariance_from_params({h, 0, 0, h}, Vec3(std::log(2.0), 0, 0));
  Mat3 expected = Mat3::Zero();
  expected.diagonal() << 1, 4, 1;
  CHECK((c.matrix() - expected).norm() < 1e-12);
}

TEST_CASE("isotropic covariance is rotation invariant") {
  Gen gen(1);
  for (int i = 0; i < 100; ++i) {
    CHECK((covariance_from_params(gen.quat(gen.uniform(0.1, 3.0)), Vec3::Zero()).matrix() - Mat3::Identity()).norm() <
          1e-12);
  }
}

TEST_CASE("zero or non-finite quaternion is an invalid-rotation error") {
  try {
    covariance_from_params({0, 0, 0, 0}, Vec3::Zero());
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_rotation);
  }
  CHECK_THROWS_AS(rotation_from_quat({std::numeric_limits<double>::quiet_NaN(), 0, 0, 1}), Error);
}

TEST_CASE("covariance matches the matrix-product oracle and is symmetric PSD") {
  Gen gen(2);
  for (int i = 0; i < 1000; ++i) {
    const QuatWXYZ q = gen.quat(gen.uniform(0.1, 5.0));
    const Vec3 ls = gen.vec3(-4.0, 1.0);
    const Mat3 m = covariance_from_params(q, ls).matrix();
    const Mat3 ref = reference_covariance(q, ls);
    CHECK((m - ref).norm() <= 1e-12 * std::max(1.0, ref.norm()));
    CHECK((m - m.transpose()).norm() == 0.0);
    CHECK(sorted_eigenvalues(m)[0] >= -1e-9);
    // q and -q are the same rotation.
    CHECK(covariance_from_params(-q, ls).matrix() == m);
  }
}

TEST_CASE("transform_covariance basics") {
  Gen gen(3);
  const SymCov c = covariance_from_params(gen.quat(), gen.vec3(-1, 1));
  CHECK(transform_covariance(c, Mat3::Identity()) == c);
  CHECK((transform_covariance(SymCov::identity(), 2.0 * Mat3::Identity()).matrix() - 4.0 * Mat3::Identity()).norm() <
        1e-15);
  // Singular F is allowed.
  Mat3 flat = Mat3::Identity();
  flat(2, 2) = 0.0;
  CHECK(transform_covariance(c, flat).zz() == 0.0);
}

TEST_CASE("rotation preserves covariance eigenvalues") {
  Gen gen(4);
  for (int i = 0; i < 200; ++i) {
    const SymCov c = covariance_from_params(gen.quat(), gen.vec3(-2, 1));
    const Vec3 a = sorted_eigenvalues(c.matrix());
    const Vec3 b = sorted_eigenvalues(transform_covariance(c, gen.rotation()).matrix());
    CHECK((a - b).norm() < 1e-9);
  }
}

TEST_CASE("transform composition law") {
  Gen gen(5);
  for (int i = 0; i < 200; ++i) {
    const SymCov c = covariance_from_params(gen.quat(), gen.vec3(-2, 1));
    const Mat3 a = gen.any_matrix(1.5), b = gen.any_matrix(1.5);
    const Mat3 lhs = transform_covariance(transform_covariance(c, a), b).matrix();
    const Mat3 rhs = transform_covariance(c, b * a).matrix();
    CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("polar decomposition of pure stretch and pure rotation") {
  Mat3 f = Mat3::Identity();
  f(0, 0) = 2.0;
  Decomp d = polar_decompose(f);
  CHECK((d.rotation - Mat3::Identity()).norm() < 1e-12);
  CHECK((d.stretch - f).norm() < 1e-12);

  Gen gen(6);
  const Mat3 r = gen.rotation();
  d = polar_decompose(r);
  CHECK((d.rotation - r).norm() < 1e-12);
  CHECK((d.stretch - Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("polar decomposition properties on random F") {
  Gen gen(7);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 f = i % 3 == 0 ? gen.any_matrix() : gen.well_conditioned();
    const Decomp d = polar_decompose(f);
    CHECK((d.rotation.transpose() * d.rotation - Mat3::Identity()).norm() < 1e-9);
    CHECK(std::abs(d.rotation.determinant() - 1.0) < 1e-9);
    CHECK((d.stretch - d.stretch.transpose()).norm() < 1e-9);
    CHECK((f - d.rotation * d.stretch).norm() < 1e-6 * std::max(1.0, f.norm()));
    CHECK((d.u * d.singular_values.asDiagonal() * d.v.transpose() - f).norm() < 1e-9 * std::max(1.0, f.norm()));
  }
}

TEST_CASE("polar decomposition flips the smallest singular value for reflections") {
  Mat3 f = Mat3::Identity();
  f(2, 2) = -0.5;
  const Decomp d = polar_decompose(f);
  CHECK(std::abs(d.rotation.determinant() - 1.0) < 1e-12);
  CHECK(d.singular_values.minCoeff() < 0.0);
  CHECK((d.rotation * d.stretch - f).norm() < 1e-12);
}

TEST_CASE("polar decomposition rejects non-finite input") {
  Mat3 f = Mat3::Identity();
  f(1, 2) = std::numeric_limits<double>::infinity();
  try {
    polar_decompose(f);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_input);
  }
}

TEST_CASE("kd-tree k-nearest matches brute force with index tie-break") {
  Gen gen(8);
  for (int round = 0; round < 20; ++round) {
    std::vector<Vec3> pts;
    const std::size_t n = 50 + gen.index(400);
    for (std::size_t i = 0; i < n; ++i) {
      // Snap to a coarse lattice on even rounds to force distance ties.
      Vec3 p = gen.vec3(-1, 1);
      if (round % 2 == 0) p = (p * 4.0).array().round() / 4.0;
      pts.push_back(p);
    }
    KdTree tree(pts);
    for (int q = 0; q < 30; ++q) {
      Vec3 query = gen.vec3(-1.2, 1.2);
      if (round % 2 == 0) query = (query * 4.0).array().round() / 4.0;
      const std::size_t k = 1 + gen.index(12);
      std::vector<std::pair<double, std::uint32_t>> all;
      for (std::uint32_t i = 0; i < n; ++i) all.push_back({(pts[i] - query).squaredNorm(), i});
      std::sort(all.begin(), all.end());
      const auto got = tree.nearest(query, k);
      REQUIRE(got.size() == k);
      for (std::size_t i = 0; i < k; ++i) {
        CHECK(got[i].index == all[i].second);
        CHECK(got[i].dist2 == all[i].first);
      }
      const double r = gen.uniform(0.0, 0.8);
      std::size_t count = 0;
      for (const auto& [d2, idx] : all) count += d2 <= r * r;
      CHECK(tree.count_within(query, r) == count);
      CHECK(tree.within(query, r).size() == count);
    }
  }
}

TEST_CASE("hash grid radius query matches brute force") {
  Gen gen(9);
  std::vector<Vec3> pts;
  HashGrid grid(0.1);
  for (int i = 0; i < 500; ++i) {
    pts.push_back(gen.vec3(-1, 1));
    grid.insert(pts.back());
  }
  for (int q = 0; q < 500; ++q) {
    const Vec3 x = gen.vec3(-1.1, 1.1);
    const double r = gen.uniform(0.0, 0.1);
    bool brute = false;
    for (const auto& p : pts) brute = brute || (p - x).norm() < r;
    CHECK(grid.any_within(x, r) == brute);
  }
}

TEST_CASE("sigmoid and logit are inverse") {
  Gen gen(10);
  for (int i = 0; i < 100; ++i) {
    const double x = gen.uniform(-10, 10);
    CHECK(std::abs(logit(sigmoid(x)) - x) < 1e-9);
  }
  Gaussian g;
  g.color[0] = g.color[1] = g.color[2] = 0.0f;
  CHECK((g.dc_rgb() - Vec3::Constant(0.5)).norm() < 1e-12);
  CHECK(g.opacity() == doctest::Approx(0.5));
}

TEST_CASE("object mask validation") {
  GaussianSet set;
  set.gaussians.resize(3);
  set.object_mask = {0, 2};
  CHECK_NOTHROW(set.validate_mask());
  set.object_mask = {0, 0};
  CHECK_THROWS_AS(set.validate_mask(), Error);
  set.object_mask = {3};
  CHECK_THROWS_AS(set.validate_mask(), Error);
}
