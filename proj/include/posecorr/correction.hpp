#pragma once

#include <vector>

#include "posecorr/liegeom.hpp"
#include "posecorr/trajectory.hpp"

namespace posecorr {

/// How the keyframe baseline ratio is formed.
enum class ScaleMode {
  Ratio,         // |t_new| / |t_old|
  SquaredRatio,  // |t_new|^2 / |t_old|^2
};

/// Below this keyframe baseline [m] the scale is fixed to 1.
inline constexpr double kDegenerateBaseline = 1e-9;

/// Ratio between the updated and the original keyframe baseline, used as a
/// stand-in for the depth ratio of features shared by the segment.
struct ScaleFactor {
  double value = 1.0;
  bool degenerate_baseline = false;
};

ScaleFactor scale_factor(const Vec3& t_ab_old, const Vec3& t_ab_new,
                         ScaleMode mode = ScaleMode::Ratio);

/// Corrected relative pose implied by one keyframe's measurement constraint.
struct ConditionSolution {
  Rotation rot;
  Vec3 trans = Vec3::Zero();

  Pose pose() const { return Pose(rot, trans); }
};

/// Keeps the relative rotation and scales the relative translation. Applies
/// to either keyframe of the segment.
ConditionSolution condition_from_kf(const Pose& rel_old, const ScaleFactor& s);

/// Disagreement between the two condition solutions, expressed in the frame
/// given by the KF_a solution.
struct FusionGap {
  Rotation rot;
  Vec3 trans = Vec3::Zero();
};

/// sol_a is relative to the updated KF_a, sol_b to the updated KF_b.
FusionGap fusion_gap(const ConditionSolution& sol_a, const ConditionSolution& sol_b,
                     const Pose& kf_a_new, const Pose& kf_b_new);

struct InterpFactor {
  double alpha = 0.0;
  bool from_timestamps = false;
};

/// alpha = d_a / (d_a + d_b) with distances to both keyframes measured on the
/// pre-update geometry; falls back to the timestamp ratio when both vanish.
InterpFactor interp_factor(const Segment& seg, std::size_t j);

/// R = R_a * slerp(I, dR, alpha), t = t_a + alpha * R * dt.
Pose fuse(const ConditionSolution& sol_a, const FusionGap& gap, double alpha);

struct CorrectionOptions {
  ScaleMode scale_mode = ScaleMode::Ratio;
};

struct SegmentCorrection {
  /// Corrected poses relative to the updated KF_a, in segment order.
  std::vector<Pose> rels;
  ScaleFactor scale;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  bool terminal = false;
};

SegmentCorrection correct_segment(const Segment& seg, const KeyframeUpdate& upd_a,
                                  const KeyframeUpdate& upd_b,
                                  const CorrectionOptions& opts = {});

/// Segment after the last keyframe: only the KF_a condition with unit scale.
SegmentCorrection correct_terminal_segment(const Segment& seg, const KeyframeUpdate& upd_a);

}  // namespace posecorr
