#include "posecorr/liegeom.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numbers>

namespace posecorr {

namespace {

Eigen::Quaterniond canonical(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond out = q;
  out.normalize();
  // Keep the w >= 0 hemisphere; at w == 0 the first nonzero vector component
  // decides the sign.
  bool flip = out.w() < 0.0;
  if (out.w() == 0.0) {
    if (out.x() != 0.0) {
      flip = out.x() < 0.0;
    } else if (out.y() != 0.0) {
      flip = out.y() < 0.0;
    } else {
      flip = out.z() < 0.0;
    }
  }
  if (flip) out.coeffs() = -out.coeffs();
  return out;
}

}  // namespace

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(canonical(q)) {}

Rotation Rotation::from_wxyz(double w, double x, double y, double z) {
  return Rotation(Eigen::Quaterniond(w, x, y, z));
}

Rotation Rotation::from_matrix(const Mat3& R) {
  // Eigen picks the largest of w, x, y, z as pivot (Shepperd's method), which
  // is the stable choice near half turns.
  return Rotation(Eigen::Quaterniond(R));
}

Rotation Rotation::about_axis(const Vec3& axis, double angle) {
  return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
}

Rotation Rotation::inverse() const { return Rotation(q_.conjugate()); }

Rotation Rotation::operator*(const Rotation& other) const {
  return Rotation(q_ * other.q_);
}

Pose Pose::inverse() const {
  const Rotation r_inv = rotation_.inverse();
  return Pose(r_inv, -(r_inv * translation_));
}

Pose Pose::operator*(const Pose& other) const {
  return Pose(rotation_ * other.rotation_,
              rotation_ * other.translation_ + translation_);
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_.matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Mat3 hat(const Vec3& w) {
  Mat3 W;
  W << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return W;
}

RotVec so3_log(const Rotation& r) {
  const Eigen::Quaterniond& q = r.quaternion();
  const Vec3 v = q.vec();
  const double n = v.norm();
  const double w = q.w();
  if (n < 1e-8) {
    // atan(n / w) / n expanded around n = 0; w is ~1 here.
    return v * (2.0 / w) * (1.0 - n * n / (3.0 * w * w));
  }
  const double angle = 2.0 * std::atan2(n, w);
  return v * (angle / n);
}

Rotation so3_exp(const RotVec& w) {
  const double theta = w.norm();
  if (theta < 1e-8) {
    const Vec3 half = 0.5 * w;
    return Rotation(Eigen::Quaterniond(1.0 - theta * theta / 8.0, half.x(), half.y(), half.z()));
  }
  const double s = std::sin(0.5 * theta) / theta;
  return Rotation(Eigen::Quaterniond(std::cos(0.5 * theta), s * w.x(), s * w.y(), s * w.z()));
}

Mat3 so3_left_jacobian(const RotVec& w) {
  const double theta = w.norm();
  const Mat3 W = hat(w);
  double a = 0.5;
  if (theta >= 1e-8) {
    const double sh = std::sin(0.5 * theta);
    a = 2.0 * sh * sh / (theta * theta);
  }
  double b;
  if (theta < 1e-3) {
    b = 1.0 / 6.0 - theta * theta / 120.0;
  } else {
    b = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Mat3::Identity() + a * W + b * W * W;
}

Mat3 so3_left_jacobian_inverse(const RotVec& w) {
  const double theta = w.norm();
  const Mat3 W = hat(w);
  double c;
  if (theta < 1e-3) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    const double half = 0.5 * theta;
    c = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  }
  return Mat3::Identity() - 0.5 * W + c * W * W;
}

Twist se3_log(const Pose& p) {
  Twist xi;
  xi.omega = so3_log(p.rotation());
  xi.v = so3_left_jacobian_inverse(xi.omega) * p.translation();
  return xi;
}

Pose se3_exp(const Twist& xi) {
  return Pose(so3_exp(xi.omega), so3_left_jacobian(xi.omega) * xi.v);
}

EulerAngles euler_from(const Rotation& r) {
  const Mat3 R = r.matrix();
  EulerAngles out;
  const double cos_pitch = std::hypot(R(0, 0), R(1, 0));
  const double pitch = std::atan2(-R(2, 0), cos_pitch);
  if (cos_pitch < 1e-6) {
    out.near_gimbal = true;
    // Only yaw - roll (or yaw + roll) is observable; put it all in roll.
    out.ypr = Vec3(0.0, pitch, std::atan2(-R(1, 2), R(1, 1)));
    return out;
  }
  out.ypr = Vec3(std::atan2(R(1, 0), R(0, 0)), pitch, std::atan2(R(2, 1), R(2, 2)));
  return out;
}

Rotation euler_to(const Vec3& ypr) {
  const Eigen::Quaterniond q = Eigen::AngleAxisd(ypr.x(), Vec3::UnitZ()) *
                               Eigen::AngleAxisd(ypr.y(), Vec3::UnitY()) *
                               Eigen::AngleAxisd(ypr.z(), Vec3::UnitX());
  return Rotation(q);
}

Rotation slerp(const Rotation& q0, const Rotation& q1, double a) {
  if (a <= 0.0) return q0;
  if (a >= 1.0) return q1;
  // The relative rotation is canonical (w >= 0), so this is the short arc.
  const RotVec delta = so3_log(q0.inverse() * q1);
  return q0 * so3_exp(a * delta);
}

double rotation_angle_deg(const Rotation& r1, const Rotation& r2) {
  return so3_log(r1.inverse() * r2).norm() * 180.0 / std::numbers::pi;
}

double orthogonality_error(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
}

bool orthonormalize(const Mat3& R, double tolerance, Mat3& out) {
  if (!R.allFinite()) return false;
  if (orthogonality_error(R) > tolerance || std::abs(R.determinant() - 1.0) > tolerance) {
    return false;
  }
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out = svd.matrixU() * svd.matrixV().transpose();
  return true;
}

}  // namespace posecorr
