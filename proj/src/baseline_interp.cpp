#include "posecorr/baseline_interp.hpp"

#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace posecorr {

std::string_view to_string(TransSpace s) {
  switch (s) {
    case TransSpace::Xyz: return "xyz";
    case TransSpace::Se3V: return "se3-v";
  }
  return "?";
}

std::string_view to_string(RotSpace s) {
  switch (s) {
    case RotSpace::Euler: return "euler";
    case RotSpace::Quat: return "quat";
    case RotSpace::So3: return "so3";
  }
  return "?";
}

std::optional<TransSpace> parse_trans_space(std::string_view name) {
  if (name == "xyz") return TransSpace::Xyz;
  if (name == "se3-v" || name == "v") return TransSpace::Se3V;
  return std::nullopt;
}

std::optional<RotSpace> parse_rot_space(std::string_view name) {
  if (name == "euler") return RotSpace::Euler;
  if (name == "quat") return RotSpace::Quat;
  if (name == "so3") return RotSpace::So3;
  return std::nullopt;
}

InterpDiagnostics& InterpDiagnostics::operator+=(const InterpDiagnostics& o) {
  trans_singular_hits += o.trans_singular_hits;
  rot_singular_hits += o.rot_singular_hits;
  quat_renormalizations += o.quat_renormalizations;
  gimbal_warnings += o.gimbal_warnings;
  return *this;
}

namespace {

Eigen::VectorXd rotation_vector(const Rotation& r, RotSpace rs, bool& near_gimbal) {
  switch (rs) {
    case RotSpace::Euler: {
      const EulerAngles e = euler_from(r);
      near_gimbal = e.near_gimbal;
      return e.ypr;
    }
    case RotSpace::Quat:
      return r.wxyz();
    case RotSpace::So3:
      return so3_log(r);
  }
  throw std::logic_error("unknown rotation space");
}

}  // namespace

PoseVector vectorize(const Pose& p, TransSpace ts, RotSpace rs) {
  PoseVector x;
  const Twist xi = se3_log(p);
  x.twist_omega = xi.omega;
  x.trans = ts == TransSpace::Xyz ? p.translation() : xi.v;
  x.rot = rotation_vector(p.rotation(), rs, x.near_gimbal);
  return x;
}

namespace {

Rotation rotation_from_vector(const Eigen::VectorXd& r, RotSpace rs) {
  switch (rs) {
    case RotSpace::Euler: return euler_to(r.head<3>());
    case RotSpace::Quat: return Rotation::from_wxyz(r(0), r(1), r(2), r(3));
    case RotSpace::So3: return so3_exp(r.head<3>());
  }
  throw std::logic_error("unknown rotation space");
}

}  // namespace

Pose devectorize(const PoseVector& x, TransSpace ts, RotSpace rs) {
  const Rotation r = rotation_from_vector(x.rot, rs);
  const Vec3 t = ts == TransSpace::Xyz ? x.trans : Vec3(so3_left_jacobian(x.twist_omega) * x.trans);
  return Pose(r, t);
}

std::size_t interpolate_components(const Eigen::Ref<const Eigen::VectorXd>& x_aj,
                                   const Eigen::Ref<const Eigen::VectorXd>& x_ab,
                                   const Eigen::Ref<const Eigen::VectorXd>& x_ab_new,
                                   const InterpOptions& opts, Eigen::Ref<Eigen::VectorXd> out) {
  std::size_t hits = 0;
  for (Eigen::Index k = 0; k < x_aj.size(); ++k) {
    const bool singular = std::abs(x_ab(k)) < opts.singular_eps;
    if (singular) ++hits;
    if (singular && !opts.raw_division) {
      out(k) = x_aj(k);
      continue;
    }
    out(k) = x_aj(k) + (x_ab_new(k) - x_ab(k)) * (x_aj(k) / x_ab(k));
  }
  return hits;
}

std::vector<Pose> interp_correct_segment(const Segment& seg, const KeyframeUpdate& upd_a,
                                         const KeyframeUpdate& upd_b,
                                         std::optional<TransSpace> ts,
                                         std::optional<RotSpace> rs, const InterpOptions& opts,
                                         InterpDiagnostics* diag) {
  if (seg.terminal()) {
    throw std::invalid_argument("interpolation needs a segment with two keyframes");
  }
  InterpDiagnostics local;
  const Pose old_ab = upd_a.old_pose.inverse() * upd_b.old_pose;
  const Pose new_ab = upd_a.new_pose.inverse() * upd_b.new_pose;

  // Keyframe-to-keyframe vectors are shared by every frame in the segment.
  Eigen::Matrix<double, 6, 1> twist_ab, twist_ab_new;
  if (ts == TransSpace::Se3V) {
    const Twist a = se3_log(old_ab);
    const Twist b = se3_log(new_ab);
    twist_ab << a.v, a.omega;
    twist_ab_new << b.v, b.omega;
  }
  Eigen::VectorXd rot_ab, rot_ab_new;
  if (rs) {
    bool g1 = false, g2 = false;
    rot_ab = rotation_vector(old_ab.rotation(), *rs, g1);
    rot_ab_new = rotation_vector(new_ab.rotation(), *rs, g2);
    local.gimbal_warnings += static_cast<std::size_t>(g1) + static_cast<std::size_t>(g2);
  }

  std::vector<Pose> out;
  out.reserve(seg.rels.size());
  for (const RelativeFrame& rel : seg.rels) {
    Vec3 t = rel.rel_pose.translation();
    Rotation r = rel.rel_pose.rotation();

    if (ts == TransSpace::Xyz) {
      Eigen::VectorXd x(3);
      local.trans_singular_hits += interpolate_components(
          rel.rel_pose.translation(), old_ab.translation(), new_ab.translation(), opts, x);
      t = x;
    } else if (ts == TransSpace::Se3V) {
      // The full twist is interpolated so the corrected v maps back to a
      // translation through its own rotational part.
      const Twist xi = se3_log(rel.rel_pose);
      Eigen::Matrix<double, 6, 1> x_aj;
      x_aj << xi.v, xi.omega;
      Eigen::VectorXd x(6);
      local.trans_singular_hits += interpolate_components(x_aj, twist_ab, twist_ab_new, opts, x);
      t = so3_left_jacobian(x.tail<3>()) * x.head<3>();
    }

    if (rs) {
      bool gimbal = false;
      const Eigen::VectorXd x_aj = rotation_vector(rel.rel_pose.rotation(), *rs, gimbal);
      local.gimbal_warnings += static_cast<std::size_t>(gimbal);
      Eigen::VectorXd x(x_aj.size());
      local.rot_singular_hits += interpolate_components(x_aj, rot_ab, rot_ab_new, opts, x);
      if (*rs == RotSpace::Quat) {
        const double norm = x.norm();
        if (std::abs(norm - 1.0) > 1e-6) {
          ++local.quat_renormalizations;
          spdlog::debug("quaternion interpolation renormalized (|q| = {:.9f}) at t={}", norm,
                        rel.id.stamp);
        }
      }
      r = rotation_from_vector(x, *rs);
    }
    out.emplace_back(r, t);
  }
  if (diag) *diag += local;
  return out;
}

}  // namespace posecorr
