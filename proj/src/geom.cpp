#include "viewpos/geom.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <string>

#include "viewpos/error.hpp"

namespace viewpos {

namespace {

constexpr double kAreaEps = 1e-6;  // mm^2, three-point collinearity
constexpr double kAntiparallelEps = 1e-9;

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

}  // namespace

Rotation Rotation::from_matrix(const Mat3& m) {
  if (!m.allFinite()) throw NumericError("rotation matrix has non-finite entries");
  const double ortho = (m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (ortho > 1e-6 || std::abs(det - 1.0) > 1e-6) {
    throw NumericError("matrix is not a proper rotation (orthogonality error " +
                       std::to_string(ortho) + ", det " + std::to_string(det) + ")");
  }
  return Rotation(m);
}

Rotation Rotation::about_x(double a) { return about_axis(Vec3::UnitX(), a); }
Rotation Rotation::about_y(double a) { return about_axis(Vec3::UnitY(), a); }
Rotation Rotation::about_z(double a) { return about_axis(Vec3::UnitZ(), a); }

Rotation Rotation::about_axis(const Vec3& unit_axis, double radians) {
  return Rotation(Eigen::AngleAxisd(radians, unit_axis.normalized()).toRotationMatrix());
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation = rotation.inverse();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

void SliceGeometry::validate() const {
  if (width < 2 || height < 2) {
    throw UsageError("slice geometry needs width, height >= 2 (got " + std::to_string(width) +
                     "x" + std::to_string(height) + ")");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw UsageError("slice spacing must be positive");
  }
}

Rotation rotvec_to_rotation(const RotVec& v) {
  const double angle = v.angle();
  if (!std::isfinite(angle)) throw NumericError("non-finite rotation vector");
  if (angle == 0.0) return Rotation::identity();
  return Rotation::about_axis(v.value / angle, angle);
}

RotVec rotation_to_rotvec(const Rotation& r) {
  // Eigen goes through the quaternion and yields angle in [0, pi].
  const Eigen::AngleAxisd aa(r.matrix());
  RotVec out;
  out.value = aa.axis() * aa.angle();
  return out;
}

double geodesic_distance(const Rotation& r_hat, const Rotation& r) {
  // atan2 form of the clamped arccos: same angle, but no precision loss near 0 and pi.
  const Mat3 m = r_hat.matrix().transpose() * r.matrix();
  const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double s = 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)).norm();
  return std::atan2(s, c);
}

std::vector<Vec3> fibonacci_normals(std::size_t n) {
  if (n == 0) throw EmptyInputError("fibonacci_normals needs at least one sample");
  const double golden = (std::sqrt(5.0) + 1.0) / 2.0;
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double phi = 2.0 * kPi * static_cast<double>(i) / golden;
    const double sin_theta = std::sin(std::acos(z));
    out.emplace_back(sin_theta * std::cos(phi), sin_theta * std::sin(phi), z);
  }
  return out;
}

Rotation rotation_between(const Vec3& a, const Vec3& b) {
  const double c = a.dot(b);
  if (c < -1.0 + kAntiparallelEps) {
    const Vec3 pick = std::abs(a.x()) <= std::abs(a.y()) ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 axis = (pick - pick.dot(a) * a).normalized();
    return Rotation::about_axis(axis, kPi);
  }
  const Vec3 k = a.cross(b);
  const Mat3 s = skew(k);
  const Mat3 m = Mat3::Identity() + s + s * s / (1.0 + c);
  return Rotation::from_matrix(m);
}

Pose build_pose(const Vec3& normal, double inplane, double offset) {
  Pose p;
  p.rotation = rotation_between(Vec3::UnitZ(), normal) * Rotation::about_z(inplane);
  p.translation = offset * normal;
  return p;
}

Vec3 slice_point(const Pose& p, const SliceGeometry& g, double col, double row) {
  const double u = (col - (g.width - 1) / 2.0) * g.spacing;
  const double v = ((g.height - 1) / 2.0 - row) * g.spacing;
  return p.apply(Vec3(u, v, 0.0));
}

ThreePoint pose_to_three_point(const Pose& p, const SliceGeometry& g) {
  ThreePoint tp;
  tp.a1 = p.translation;
  tp.a2 = slice_point(p, g, 0.0, 0.0);
  tp.a3 = slice_point(p, g, g.width - 1.0, 0.0);
  return tp;
}

Pose three_point_to_pose(const ThreePoint& tp, [[maybe_unused]] const SliceGeometry& g) {
  if (!tp.a1.allFinite() || !tp.a2.allFinite() || !tp.a3.allFinite()) {
    throw DegenerateLabelError("three-point label has non-finite coordinates");
  }
  const double area = (tp.a2 - tp.a1).cross(tp.a3 - tp.a1).norm();
  if (area <= kAreaEps || (tp.a2 - tp.a3).norm() <= kAreaEps) {
    throw DegenerateLabelError("three-point label is collinear or has coincident points");
  }
  const Vec3 col_axis = (tp.a3 - tp.a2).normalized();
  const Vec3 up_raw = 0.5 * (tp.a2 + tp.a3) - tp.a1;
  const Vec3 up_orth = up_raw - up_raw.dot(col_axis) * col_axis;
  if (up_orth.norm() <= kAreaEps) {
    throw DegenerateLabelError("three-point label has no in-plane up direction");
  }
  const Vec3 up = up_orth.normalized();
  Mat3 m;
  m.col(0) = col_axis;
  m.col(1) = up;
  m.col(2) = col_axis.cross(up);
  Pose p;
  p.rotation = Rotation::from_matrix(m);
  p.translation = tp.a1;
  return p;
}

Pose compose_pose(const Pose& rt, const Pose& p) {
  Pose out;
  out.rotation = rt.rotation * p.rotation;
  out.translation = rt.rotation * p.translation + rt.translation;
  return out;
}

}  // namespace viewpos
