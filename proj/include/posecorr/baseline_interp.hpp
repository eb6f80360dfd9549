#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "posecorr/liegeom.hpp"
#include "posecorr/trajectory.hpp"

namespace posecorr {

enum class TransSpace { Xyz, Se3V };
enum class RotSpace { Euler, Quat, So3 };

std::string_view to_string(TransSpace s);
std::string_view to_string(RotSpace s);
std::optional<TransSpace> parse_trans_space(std::string_view name);
std::optional<RotSpace> parse_rot_space(std::string_view name);

/// A pose flattened for component-wise interpolation.
struct PoseVector {
  Vec3 trans = Vec3::Zero();
  /// 3 components (Euler yaw-pitch-roll, so(3)) or 4 (quaternion w, x, y, z).
  Eigen::VectorXd rot;
  /// se(3) rotational part, kept so a Se3V translation can be mapped back.
  Vec3 twist_omega = Vec3::Zero();
  bool near_gimbal = false;
};

PoseVector vectorize(const Pose& p, TransSpace ts, RotSpace rs);
Pose devectorize(const PoseVector& x, TransSpace ts, RotSpace rs);

struct InterpOptions {
  /// Components of the old keyframe-to-keyframe vector below this magnitude
  /// are singular.
  double singular_eps = 1e-12;
  /// Divide anyway on singular components (IEEE inf/nan propagate).
  bool raw_division = false;
};

struct InterpDiagnostics {
  std::size_t trans_singular_hits = 0;
  std::size_t rot_singular_hits = 0;
  /// Quaternion results whose norm moved by more than 1e-6 on renormalization.
  std::size_t quat_renormalizations = 0;
  std::size_t gimbal_warnings = 0;

  std::size_t singular_hits() const { return trans_singular_hits + rot_singular_hits; }
  InterpDiagnostics& operator+=(const InterpDiagnostics& o);
};

/// x* = x_aj + (x*_ab - x_ab) * x_aj / x_ab, per component. Returns the number
/// of singular components.
std::size_t interpolate_components(const Eigen::Ref<const Eigen::VectorXd>& x_aj,
                                   const Eigen::Ref<const Eigen::VectorXd>& x_ab,
                                   const Eigen::Ref<const Eigen::VectorXd>& x_ab_new,
                                   const InterpOptions& opts, Eigen::Ref<Eigen::VectorXd> out);

/// Corrected relative poses (relative to the updated KF_a) of a full segment.
/// A missing space leaves that half of each pose untouched.
std::vector<Pose> interp_correct_segment(const Segment& seg, const KeyframeUpdate& upd_a,
                                         const KeyframeUpdate& upd_b,
                                         std::optional<TransSpace> ts,
                                         std::optional<RotSpace> rs, const InterpOptions& opts,
                                         InterpDiagnostics* diag = nullptr);

inline std::vector<Pose> interp_correct_segment(const Segment& seg, const KeyframeUpdate& upd_a,
                                                const KeyframeUpdate& upd_b, TransSpace ts,
                                                RotSpace rs, const InterpOptions& opts = {},
                                                InterpDiagnostics* diag = nullptr) {
  return interp_correct_segment(seg, upd_a, upd_b, std::optional(ts), std::optional(rs), opts,
                                diag);
}

}  // namespace posecorr
