#pragma once

// Rigid pose algebra for slice planes.
//
// A pose places a slice relative to the initial x-y plane through the volume
// center: the slice frame's x axis maps to rotation*(1,0,0), its normal to
// rotation*(0,0,1), and the slice center to translation (mm).

#include <Eigen/Dense>

#include <vector>

namespace viewpos {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Proper orthonormal 3x3 matrix.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  // Throws NumericError unless m is orthonormal with det +1 (tolerance 1e-6).
  static Rotation from_matrix(const Mat3& m);
  static Rotation identity() { return {}; }
  static Rotation about_x(double radians);
  static Rotation about_y(double radians);
  static Rotation about_z(double radians);
  static Rotation about_axis(const Vec3& unit_axis, double radians);

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose()); }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_); }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

// Axis-angle vector: direction is the axis, magnitude the angle (radians).
struct RotVec {
  Vec3 value = Vec3::Zero();

  double angle() const { return value.norm(); }
};

struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  Pose inverse() const;
  // Plane normal, rotation*(0,0,1).
  Vec3 normal() const { return rotation.matrix().col(2); }
};

// Slice label by three points: a1 center, a2 upper-left corner, a3
// upper-right corner (mm).
struct ThreePoint {
  Vec3 a1 = Vec3::Zero();
  Vec3 a2 = Vec3::Zero();
  Vec3 a3 = Vec3::Zero();
};

struct SliceGeometry {
  int width = 181;
  int height = 181;
  double spacing = 1.0;  // mm per pixel, isotropic

  // Throws UsageError unless width, height >= 2 and spacing > 0.
  void validate() const;
  bool operator==(const SliceGeometry&) const = default;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg_to_rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad_to_deg(double r) { return r * 180.0 / kPi; }

// Rodrigues map; inverse of rotation_to_rotvec up to 2*pi equivalence.
Rotation rotvec_to_rotation(const RotVec& v);
// Canonical rotation vector with angle in [0, pi].
RotVec rotation_to_rotvec(const Rotation& r);

// arccos((tr(r_hat^T r) - 1) / 2) with the cosine clamped to [-1, 1].
double geodesic_distance(const Rotation& r_hat, const Rotation& r);

// Fibonacci sphere sampling: z_i = 1 - (2i+1)/n, phi_i = 2*pi*i/golden,
// direction (sin(theta)cos(phi), sin(theta)sin(phi), z), theta = acos(z).
// Throws EmptyInputError for n == 0.
std::vector<Vec3> fibonacci_normals(std::size_t n);

// Minimal-angle rotation taking unit vector a onto unit vector b. For
// antiparallel inputs the result is a half turn about whichever of x or y is
// more orthogonal to a.
Rotation rotation_between(const Vec3& a, const Vec3& b);

// rotation_between(z, normal) * Rz(inplane); translation = offset * normal.
Pose build_pose(const Vec3& normal, double inplane, double offset);

// Physical position of slice pixel (col, row) under pose. Column runs along
// rotation*(1,0,0), row 0 is the top edge at +(H-1)/2 along rotation*(0,1,0).
Vec3 slice_point(const Pose& p, const SliceGeometry& g, double col, double row);

ThreePoint pose_to_three_point(const Pose& p, const SliceGeometry& g);
// Gram-Schmidt recovers an orthonormal frame from (possibly skewed) points.
// Throws DegenerateLabelError for coincident or collinear points.
Pose three_point_to_pose(const ThreePoint& tp, const SliceGeometry& g);

// Apply rt to a pose: rotation rt.R * p.R, translation rt.R * p.t + rt.t.
Pose compose_pose(const Pose& rt, const Pose& p);

}  // namespace viewpos
