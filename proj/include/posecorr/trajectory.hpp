#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "posecorr/liegeom.hpp"

namespace posecorr {

struct FrameId {
  double stamp = 0.0;       // seconds
  std::int64_t index = 0;   // position in the source sequence
};

std::string to_string(const FrameId& id);

struct StampedPose {
  FrameId id;
  Pose pose;
};

struct Keyframe {
  FrameId id;
  Pose world_pose;
};

/// A non-keyframe stored relative to its parent keyframe: rel_pose maps
/// points in the frame to points in the parent keyframe.
struct RelativeFrame {
  FrameId id;
  std::size_t parent = 0;
  Pose rel_pose;
};

/// One keyframe pair and the relative frames between them. The segment after
/// the last keyframe has no kf_b and is flagged terminal.
struct Segment {
  std::size_t index = 0;
  Keyframe kf_a;
  std::optional<Keyframe> kf_b;
  std::vector<RelativeFrame> rels;

  bool terminal() const { return !kf_b.has_value(); }
};

/// Old and new world pose of keyframe `index`.
struct KeyframeUpdate {
  std::size_t index = 0;
  Pose old_pose;
  Pose new_pose;
};

class AssociationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default association window for matching frames by timestamp [s].
inline constexpr double kDefaultAssocTolerance = 0.01;

/// Sorted-by-stamp lookup of the closest pose within a tolerance.
class StampIndex {
 public:
  explicit StampIndex(std::span<const StampedPose> poses);

  /// Position in the original span of the nearest stamp within `tolerance`.
  std::optional<std::size_t> nearest(double stamp, double tolerance) const;

 private:
  std::vector<std::pair<double, std::size_t>> sorted_;
};

std::vector<Segment> segmentize(std::span<const Keyframe> keyframes,
                                std::span<const RelativeFrame> relatives);

class Trajectory {
 public:
  Trajectory(std::vector<Keyframe> keyframes, std::vector<RelativeFrame> relatives);

  /// Builds a trajectory from world-frame poses, rebasing every non-keyframe
  /// onto the latest keyframe at or before its timestamp. `keyframe_positions`
  /// index into `frames`.
  static Trajectory from_world_poses(std::span<const StampedPose> frames,
                                     std::span<const std::size_t> keyframe_positions);

  const std::vector<Keyframe>& keyframes() const { return keyframes_; }
  const std::vector<RelativeFrame>& relatives() const { return relatives_; }
  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t frame_count() const { return keyframes_.size() + relatives_.size(); }

  /// World pose of every frame (keyframe pose, or keyframe pose composed with
  /// the relative pose), ordered by timestamp.
  std::vector<StampedPose> world_poses() const;

  /// World poses of the relative frames only, ordered by timestamp.
  std::vector<StampedPose> relative_world_poses() const;

 private:
  std::vector<Keyframe> keyframes_;
  std::vector<RelativeFrame> relatives_;
  std::vector<Segment> segments_;
};

std::vector<StampedPose> world_poses(const Trajectory& traj);

/// One update per keyframe moving it onto its timestamp-associated GT pose.
std::vector<KeyframeUpdate> snap_to_gt(const Trajectory& traj,
                                       std::span<const StampedPose> gt,
                                       double tolerance = kDefaultAssocTolerance);

/// Updates from two keyframe pose lists associated by timestamp.
std::vector<KeyframeUpdate> keyframe_updates(const Trajectory& traj,
                                             std::span<const StampedPose> old_poses,
                                             std::span<const StampedPose> new_poses,
                                             double tolerance = kDefaultAssocTolerance);

}  // namespace posecorr
