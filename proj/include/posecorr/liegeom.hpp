#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace posecorr {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// so(3) element in axis-angle form [rad]; the angle is the vector norm.
using RotVec = Eigen::Vector3d;

/// Unit quaternion rotation.
///
/// The stored quaternion is renormalized on every construction and kept on
/// the w >= 0 half of the double cover, so two equal rotations always carry
/// the same four components.  Matrices are derived on demand.
class Rotation {
 public:
  Rotation() = default;
  explicit Rotation(const Eigen::Quaterniond& q);

  static Rotation from_wxyz(double w, double x, double y, double z);
  static Rotation from_matrix(const Mat3& R);
  static Rotation about_axis(const Vec3& axis, double angle);
  static Rotation identity() { return Rotation(); }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  /// (w, x, y, z) with w >= 0.
  Eigen::Vector4d wxyz() const { return {q_.w(), q_.x(), q_.y(), q_.z()}; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }

  Rotation inverse() const;
  Rotation operator*(const Rotation& other) const;
  Vec3 operator*(const Vec3& v) const { return q_ * v; }

 private:
  Eigen::Quaterniond q_{1.0, 0.0, 0.0, 0.0};
};

/// Rigid transform x -> R x + t, translation in meters.
class Pose {
 public:
  Pose() : translation_(Vec3::Zero()) {}
  Pose(const Rotation& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static Pose identity() { return Pose(); }
  static Pose from_translation(const Vec3& t) { return Pose(Rotation(), t); }

  const Rotation& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Pose inverse() const;
  Pose operator*(const Pose& other) const;
  Vec3 operator*(const Vec3& p) const { return rotation_ * p + translation_; }
  Eigen::Matrix4d matrix() const;

 private:
  Rotation rotation_;
  Vec3 translation_;
};

/// se(3) coordinates: v is the translational part, omega the rotational part.
struct Twist {
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
};

/// Intrinsic Z-Y-X angles [rad], stored as (yaw, pitch, roll).
struct EulerAngles {
  Vec3 ypr = Vec3::Zero();
  /// Set when |cos(pitch)| < 1e-6; yaw and roll are then not separable.
  bool near_gimbal = false;
};

Mat3 hat(const Vec3& w);

RotVec so3_log(const Rotation& r);
Rotation so3_exp(const RotVec& w);

/// Left Jacobian of SO(3), the V matrix mapping v to translation.
Mat3 so3_left_jacobian(const RotVec& w);
Mat3 so3_left_jacobian_inverse(const RotVec& w);

Twist se3_log(const Pose& p);
Pose se3_exp(const Twist& xi);

EulerAngles euler_from(const Rotation& r);
Rotation euler_to(const Vec3& ypr);

/// Geodesic interpolation; a = 0 returns q0 and a = 1 returns q1 exactly.
Rotation slerp(const Rotation& q0, const Rotation& q1, double a);

/// Geodesic angle between two rotations, in [0, 180] degrees.
double rotation_angle_deg(const Rotation& r1, const Rotation& r2);

/// Max-abs deviation of R^T R from identity.
double orthogonality_error(const Mat3& R);

/// Nearest rotation matrix via polar decomposition. Returns false when the
/// input is not within `tolerance` of SO(3) (orthogonality or determinant).
bool orthonormalize(const Mat3& R, double tolerance, Mat3& out);

}  // namespace posecorr
