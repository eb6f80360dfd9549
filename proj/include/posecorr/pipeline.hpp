#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "posecorr/baseline_interp.hpp"
#include "posecorr/correction.hpp"
#include "posecorr/trajectory.hpp"

namespace posecorr {

/// Which correction is applied to the translation and rotation of relative
/// frames. Baselines correct one half and leave the other as estimated.
struct CorrectionMethod {
  enum class Kind { NoCorrection, Interp, Proposed };

  Kind kind = Kind::Proposed;
  std::optional<TransSpace> trans;  // Interp only
  std::optional<RotSpace> rot;      // Interp only

  static CorrectionMethod no_correction() { return {Kind::NoCorrection, {}, {}}; }
  static CorrectionMethod proposed() { return {Kind::Proposed, {}, {}}; }
  static CorrectionMethod interp(std::optional<TransSpace> ts, std::optional<RotSpace> rs) {
    return {Kind::Interp, ts, rs};
  }

  /// "no-correction", "xyz", "se3-v", "euler", "quat", "so3", "proposed", or
  /// "interp(<trans>,<rot>)" for a paired baseline.
  std::string name() const;
};

/// The fixed set of report methods, in table order.
const std::vector<std::string>& method_names();
std::optional<CorrectionMethod> parse_method(std::string_view name);

struct DriverOptions {
  CorrectionOptions correction;
  InterpOptions interp;
  unsigned threads = 1;
};

struct SegmentReport {
  std::size_t segment = 0;
  FrameId kf_a;
  std::optional<FrameId> kf_b;
  std::size_t rel_count = 0;
  ScaleFactor scale;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  InterpDiagnostics diag;
  bool terminal = false;
  double elapsed_ms = 0.0;
};

struct CorrectionResult {
  /// Keyframes at their new poses, relative frames re-anchored to them.
  Trajectory corrected;
  std::vector<SegmentReport> segments;
  InterpDiagnostics diag;
};

/// Corrects every segment of `traj` for the given keyframe updates (one per
/// keyframe, in keyframe order). Output does not depend on `threads`.
CorrectionResult correct_trajectory(const Trajectory& traj,
                                    const std::vector<KeyframeUpdate>& updates,
                                    const CorrectionMethod& method, const DriverOptions& opts = {});

/// Corrected relative poses for one segment with the chosen method.
std::vector<Pose> correct_segment_with(const Segment& seg, const KeyframeUpdate& upd_a,
                                       const KeyframeUpdate* upd_b,
                                       const CorrectionMethod& method, const DriverOptions& opts,
                                       SegmentReport* report = nullptr);

}  // namespace posecorr
