#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "viewpos/error.hpp"
#include "viewpos/geom.hpp"

using namespace viewpos;
using testing::random_pose;

namespace {

bool near(const Vec3& a, const Vec3& b, double tol) { return (a - b).norm() <= tol; }

Mat3 rz(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

}  // namespace

TEST_CASE("rotvec to rotation basics") {
  CHECK((rotvec_to_rotation({Vec3::Zero()}).matrix() - Mat3::Identity()).norm() < 1e-15);
  const Rotation q = rotvec_to_rotation({Vec3(0, 0, kPi / 2)});
  CHECK(near(q * Vec3::UnitX(), Vec3::UnitY(), 1e-12));
  const Vec3 v(0.3, -0.2, 0.5);
  CHECK(near(rotation_to_rotvec(rotvec_to_rotation({v})).value, v, 1e-9));
}

TEST_CASE("rotvec canonicalization folds the angle into [0, pi]") {
  const Vec3 axis = Vec3(1, 2, -1).normalized();
  const Rotation r = rotvec_to_rotation({axis * 1.5 * kPi});
  const RotVec c = rotation_to_rotvec(r);
  CHECK(c.angle() == doctest::Approx(0.5 * kPi).epsilon(1e-12));
  CHECK(near(c.value.normalized(), -axis, 1e-9));
  CHECK((rotvec_to_rotation(c).matrix() - r.matrix()).norm() < 1e-12);
}

TEST_CASE("rotvec round trip over random vectors with |v| <= pi") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Vec3 v(u(rng), u(rng), u(rng));
    v *= (kPi - 1e-6) * std::abs(u(rng)) / std::max(v.norm(), 1e-12);
    CHECK(near(rotation_to_rotvec(rotvec_to_rotation({v})).value, v, 1e-9));
  }
}

TEST_CASE("rotation validation") {
  CHECK_NOTHROW(Rotation::from_matrix(rz(0.3)));
  Mat3 skew = rz(0.3);
  skew(0, 1) += 1e-3;
  CHECK_THROWS_AS(Rotation::from_matrix(skew), NumericError);
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1;
  CHECK_THROWS_AS(Rotation::from_matrix(reflect), NumericError);
}

TEST_CASE("geodesic distance") {
  const Rotation id;
  CHECK(geodesic_distance(id, id) == 0.0);
  CHECK(geodesic_distance(Rotation::about_z(kPi / 2), id) == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(geodesic_distance(Rotation::about_x(kPi), id) == doctest::Approx(kPi).epsilon(1e-12));

  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const Rotation a = random_pose(rng).rotation, b = random_pose(rng).rotation;
    const double d = geodesic_distance(a, b);
    CHECK(std::isfinite(d));
    CHECK(d >= 0.0);
    CHECK(d <= kPi);
    CHECK(d == doctest::Approx(geodesic_distance(b, a)).epsilon(1e-12));
    CHECK(geodesic_distance(a, a) < 1e-6);
  }
}

TEST_CASE("fibonacci normals") {
  CHECK_THROWS_AS(fibonacci_normals(0), EmptyInputError);

  const auto one = fibonacci_normals(1);
  REQUIRE(one.size() == 1);
  CHECK(near(one[0], Vec3(1, 0, 0), 1e-12));

  const auto two = fibonacci_normals(2);
  REQUIRE(two.size() == 2);
  CHECK(near(two[0], Vec3(0.8660, 0, 0.5), 1e-3));
  CHECK(near(two[1], Vec3(-0.6385, -0.5853, -0.5), 1e-3));

  const auto many = fibonacci_normals(1500);
  REQUIRE(many.size() == 1500);
  double min_angle = kPi;
  std::vector<double> nn(many.size(), kPi);
  for (std::size_t i = 0; i < many.size(); ++i) {
    CHECK(std::abs(many[i].norm() - 1.0) <= 1e-12);
    for (std::size_t j = i + 1; j < many.size(); ++j) {
      const double a = std::acos(std::clamp(many[i].dot(many[j]), -1.0, 1.0));
      nn[i] = std::min(nn[i], a);
      nn[j] = std::min(nn[j], a);
      min_angle = std::min(min_angle, a);
    }
  }
  CHECK(rad_to_deg(min_angle) > 2.0);
  double mean = 0, var = 0;
  for (double a : nn) mean += a / nn.size();
  for (double a : nn) var += (a - mean) * (a - mean) / nn.size();
  CHECK(std::sqrt(var) / mean <= 0.35);
}

TEST_CASE("rotation between unit vectors") {
  const Vec3 z = Vec3::UnitZ();
  CHECK((rotation_between(z, z).matrix() - Mat3::Identity()).norm() < 1e-12);
  CHECK(near(rotation_between(z, Vec3::UnitX()) * z, Vec3::UnitX(), 1e-12));

  const Rotation flip = rotation_between(z, -z);
  CHECK(near(flip * z, -z, 1e-12));
  // Half turn about the x fallback axis.
  CHECK(near(flip * Vec3::UnitX(), Vec3::UnitX(), 1e-12));

  const Vec3 x = Vec3::UnitX();
  const Rotation flip_x = rotation_between(x, -x);
  CHECK(near(flip_x * x, -x, 1e-12));
  CHECK(near(flip_x * Vec3::UnitY(), Vec3::UnitY(), 1e-12));

  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Vec3 a = Vec3(g(rng), g(rng), g(rng)).normalized();
    const Vec3 b = Vec3(g(rng), g(rng), g(rng)).normalized();
    const Rotation r = rotation_between(a, b);
    CHECK(near(r * a, b, 1e-9));
    // Minimal angle and axis a x b.
    CHECK(geodesic_distance(r, Rotation()) == doctest::Approx(std::acos(a.dot(b))).epsilon(1e-7));
    const Vec3 axis = rotation_to_rotvec(r).value.normalized();
    CHECK(near(axis, a.cross(b).normalized(), 1e-7));
  }
}

TEST_CASE("build pose") {
  const Pose id = build_pose(Vec3::UnitZ(), 0.0, 0.0);
  CHECK((id.rotation.matrix() - Mat3::Identity()).norm() < 1e-15);
  CHECK(id.translation.norm() == 0.0);

  const Pose up = build_pose(Vec3::UnitZ(), 0.0, 10.0);
  CHECK((up.rotation.matrix() - Mat3::Identity()).norm() < 1e-15);
  CHECK(near(up.translation, Vec3(0, 0, 10), 1e-15));

  const Pose side = build_pose(Vec3::UnitX(), kPi / 4, 5.0);
  CHECK(near(side.normal(), Vec3::UnitX(), 1e-12));
  CHECK(side.translation.norm() == doctest::Approx(5.0));
  CHECK(side.translation.dot(side.normal()) == doctest::Approx(5.0));
}

TEST_CASE("in-plane rotation keeps the plane") {
  const auto normals = fibonacci_normals(50);
  for (const Vec3& n : normals) {
    const Pose a = build_pose(n, 0.2, -17.0), b = build_pose(n, 2.9, -17.0);
    CHECK(near(a.normal(), b.normal(), 1e-12));
    CHECK(a.translation.dot(a.normal()) == doctest::Approx(b.translation.dot(b.normal())));
  }
}

TEST_CASE("pose to three point") {
  const SliceGeometry g;  // 181 x 181 at 1 mm
  const ThreePoint id = pose_to_three_point(Pose(), g);
  CHECK(near(id.a1, Vec3(0, 0, 0), 1e-12));
  CHECK(near(id.a2, Vec3(-90, 90, 0), 1e-12));
  CHECK(near(id.a3, Vec3(90, 90, 0), 1e-12));

  const ThreePoint up = pose_to_three_point({Rotation(), Vec3(0, 0, 10)}, g);
  CHECK(near(up.a1, Vec3(0, 0, 10), 1e-12));
  CHECK(near(up.a2, Vec3(-90, 90, 10), 1e-12));
  CHECK(near(up.a3, Vec3(90, 90, 10), 1e-12));

  const ThreePoint turned = pose_to_three_point({Rotation::about_z(kPi / 2), Vec3::Zero()}, g);
  CHECK(near(turned.a2, Vec3(-90, -90, 0), 1e-9));
  CHECK(near(turned.a3, Vec3(-90, 90, 0), 1e-9));

  // a2 is pixel (0, 0), a3 pixel (W-1, 0).
  std::mt19937_64 rng(3);
  const Pose p = random_pose(rng);
  const SliceGeometry odd{64, 40, 0.75};
  const ThreePoint tp = pose_to_three_point(p, odd);
  CHECK(near(tp.a2, slice_point(p, odd, 0, 0), 1e-12));
  CHECK(near(tp.a3, slice_point(p, odd, odd.width - 1, 0), 1e-12));
  CHECK(near(tp.a1, slice_point(p, odd, (odd.width - 1) / 2.0, (odd.height - 1) / 2.0), 1e-12));
}

TEST_CASE("three point to pose") {
  const SliceGeometry g;
  const Pose id = three_point_to_pose({Vec3(0, 0, 0), Vec3(-90, 90, 0), Vec3(90, 90, 0)}, g);
  CHECK((id.rotation.matrix() - Mat3::Identity()).norm() < 1e-12);
  CHECK(id.translation.norm() < 1e-12);

  CHECK_THROWS_AS(three_point_to_pose({Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)}, g), DegenerateLabelError);
  CHECK_THROWS_AS(three_point_to_pose({Vec3(0, 0, 0), Vec3(5, 5, 0), Vec3(5, 5, 0)}, g), DegenerateLabelError);

  std::mt19937_64 rng(21);
  for (int i = 0; i < 1000; ++i) {
    const Pose p = random_pose(rng);
    const ThreePoint tp = pose_to_three_point(p, g);
    const ThreePoint back = pose_to_three_point(three_point_to_pose(tp, g), g);
    CHECK(near(back.a1, tp.a1, 1e-6));
    CHECK(near(back.a2, tp.a2, 1e-6));
    CHECK(near(back.a3, tp.a3, 1e-6));
  }
}

TEST_CASE("three point decoding orthonormalizes skewed labels") {
  const SliceGeometry g;
  ThreePoint tp{Vec3(1, 2, 3), Vec3(-89, 92, 4), Vec3(91, 93, 2)};
  const Pose p = three_point_to_pose(tp, g);
  const Mat3& m = p.rotation.matrix();
  CHECK((m * m.transpose() - Mat3::Identity()).norm() < 1e-9);
  CHECK(m.determinant() == doctest::Approx(1.0));
  CHECK(near(m.col(0), (tp.a3 - tp.a2).normalized(), 1e-12));
}

TEST_CASE("compose pose") {
  std::mt19937_64 rng(33);
  const Pose p = random_pose(rng);
  const Pose same = compose_pose(Pose(), p);
  CHECK((same.rotation.matrix() - p.rotation.matrix()).norm() < 1e-15);
  CHECK(near(same.translation, p.translation, 1e-15));

  const Vec3 t0(3, -4, 5);
  CHECK(near(compose_pose({Rotation(), t0}, Pose()).translation, t0, 1e-15));

  const SliceGeometry g;
  for (int i = 0; i < 100; ++i) {
    const Pose rt = random_pose(rng), q = random_pose(rng);
    const ThreePoint composed = pose_to_three_point(compose_pose(rt, q), g);
    const ThreePoint direct = pose_to_three_point(q, g);
    CHECK(near(composed.a1, rt.apply(direct.a1), 1e-9));
    CHECK(near(composed.a2, rt.apply(direct.a2), 1e-9));
    CHECK(near(composed.a3, rt.apply(direct.a3), 1e-9));
  }
}

TEST_CASE("pose inverse") {
  std::mt19937_64 rng(2);
  const Pose p = random_pose(rng);
  const Pose e = compose_pose(p.inverse(), p);
  CHECK((e.rotation.matrix() - Mat3::Identity()).norm() < 1e-12);
  CHECK(e.translation.norm() < 1e-12);
}

TEST_CASE("slice geometry validation") {
  CHECK_NOTHROW(SliceGeometry{}.validate());
  CHECK_THROWS_AS((SliceGeometry{1, 181, 1.0}.validate()), UsageError);
  CHECK_THROWS_AS((SliceGeometry{181, 181, 0.0}.validate()), UsageError);
}
