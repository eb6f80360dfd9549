#include "posecorr/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace posecorr {

std::string to_string(const FrameId& id) {
  std::ostringstream os;
  os.precision(17);
  os << "frame #" << id.index << " (t=" << id.stamp << ")";
  return os.str();
}

StampIndex::StampIndex(std::span<const StampedPose> poses) {
  sorted_.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) sorted_.emplace_back(poses[i].id.stamp, i);
  std::stable_sort(sorted_.begin(), sorted_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
}

std::optional<std::size_t> StampIndex::nearest(double stamp, double tolerance) const {
  if (sorted_.empty()) return std::nullopt;
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), stamp,
                             [](const auto& e, double s) { return e.first < s; });
  std::optional<std::size_t> best;
  double best_dist = tolerance;
  auto consider = [&](decltype(it) c) {
    const double d = std::abs(c->first - stamp);
    if (d <= best_dist && (!best || d < best_dist)) {
      best = c->second;
      best_dist = d;
    }
  };
  if (it != sorted_.end()) consider(it);
  if (it != sorted_.begin()) consider(std::prev(it));
  return best;
}

std::vector<Segment> segmentize(std::span<const Keyframe> keyframes,
                                std::span<const RelativeFrame> relatives) {
  std::vector<Segment> segments(keyframes.size());
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    if (i > 0 && !(keyframes[i].id.stamp > keyframes[i - 1].id.stamp)) {
      throw AssociationError("keyframe timestamps are not strictly increasing at " +
                             to_string(keyframes[i].id));
    }
    segments[i].index = i;
    segments[i].kf_a = keyframes[i];
    if (i + 1 < keyframes.size()) segments[i].kf_b = keyframes[i + 1];
  }
  for (const RelativeFrame& rel : relatives) {
    if (rel.parent >= keyframes.size()) {
      throw AssociationError("relative " + to_string(rel.id) + " references missing keyframe " +
                             std::to_string(rel.parent));
    }
    const Segment& seg = segments[rel.parent];
    const bool after_a = rel.id.stamp >= seg.kf_a.id.stamp;
    const bool before_b = seg.terminal() || rel.id.stamp < seg.kf_b->id.stamp;
    if (!after_a || !before_b) {
      throw AssociationError("relative " + to_string(rel.id) +
                             " lies outside the segment of its parent keyframe " +
                             to_string(seg.kf_a.id));
    }
    segments[rel.parent].rels.push_back(rel);
  }
  for (Segment& seg : segments) {
    std::stable_sort(seg.rels.begin(), seg.rels.end(), [](const auto& a, const auto& b) {
      return a.id.stamp < b.id.stamp;
    });
  }
  return segments;
}

Trajectory::Trajectory(std::vector<Keyframe> keyframes, std::vector<RelativeFrame> relatives)
    : keyframes_(std::move(keyframes)), segments_(segmentize(keyframes_, relatives)) {
  relatives_.reserve(relatives.size());
  for (const Segment& seg : segments_) {
    relatives_.insert(relatives_.end(), seg.rels.begin(), seg.rels.end());
  }
}

Trajectory Trajectory::from_world_poses(std::span<const StampedPose> frames,
                                        std::span<const std::size_t> keyframe_positions) {
  std::vector<std::size_t> kf_pos(keyframe_positions.begin(), keyframe_positions.end());
  std::sort(kf_pos.begin(), kf_pos.end());
  if (std::adjacent_find(kf_pos.begin(), kf_pos.end()) != kf_pos.end()) {
    throw AssociationError("keyframe list contains the same frame twice");
  }
  std::vector<bool> is_kf(frames.size(), false);
  std::vector<Keyframe> keyframes;
  keyframes.reserve(kf_pos.size());
  for (std::size_t p : kf_pos) {
    if (p >= frames.size()) {
      throw AssociationError("keyframe position " + std::to_string(p) + " is out of range");
    }
    is_kf[p] = true;
    keyframes.push_back({frames[p].id, frames[p].pose});
  }
  std::sort(keyframes.begin(), keyframes.end(),
            [](const Keyframe& a, const Keyframe& b) { return a.id.stamp < b.id.stamp; });

  std::vector<RelativeFrame> relatives;
  relatives.reserve(frames.size() - keyframes.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (is_kf[i]) continue;
    const double t = frames[i].id.stamp;
    auto it = std::upper_bound(keyframes.begin(), keyframes.end(), t,
                               [](double s, const Keyframe& kf) { return s < kf.id.stamp; });
    if (it == keyframes.begin()) {
      throw AssociationError(to_string(frames[i].id) + " precedes the first keyframe");
    }
    const std::size_t parent = static_cast<std::size_t>(std::distance(keyframes.begin(), it)) - 1;
    relatives.push_back(
        {frames[i].id, parent, keyframes[parent].world_pose.inverse() * frames[i].pose});
  }
  return Trajectory(std::move(keyframes), std::move(relatives));
}

namespace {

void sort_by_stamp(std::vector<StampedPose>& poses) {
  std::stable_sort(poses.begin(), poses.end(), [](const StampedPose& a, const StampedPose& b) {
    if (a.id.stamp != b.id.stamp) return a.id.stamp < b.id.stamp;
    return a.id.index < b.id.index;
  });
}

}  // namespace

std::vector<StampedPose> Trajectory::world_poses() const {
  std::vector<StampedPose> out;
  out.reserve(frame_count());
  for (const Keyframe& kf : keyframes_) out.push_back({kf.id, kf.world_pose});
  for (const RelativeFrame& rel : relatives_) {
    out.push_back({rel.id, keyframes_[rel.parent].world_pose * rel.rel_pose});
  }
  sort_by_stamp(out);
  return out;
}

std::vector<StampedPose> Trajectory::relative_world_poses() const {
  std::vector<StampedPose> out;
  out.reserve(relatives_.size());
  for (const RelativeFrame& rel : relatives_) {
    out.push_back({rel.id, keyframes_[rel.parent].world_pose * rel.rel_pose});
  }
  sort_by_stamp(out);
  return out;
}

std::vector<StampedPose> world_poses(const Trajectory& traj) { return traj.world_poses(); }

std::vector<KeyframeUpdate> snap_to_gt(const Trajectory& traj, std::span<const StampedPose> gt,
                                       double tolerance) {
  const StampIndex index(gt);
  std::vector<KeyframeUpdate> updates;
  updates.reserve(traj.keyframes().size());
  for (std::size_t i = 0; i < traj.keyframes().size(); ++i) {
    const Keyframe& kf = traj.keyframes()[i];
    const auto match = index.nearest(kf.id.stamp, tolerance);
    if (!match) {
      std::ostringstream os;
      os.precision(17);
      os << "no ground-truth pose within " << tolerance << " s of keyframe t=" << kf.id.stamp;
      throw AssociationError(os.str());
    }
    updates.push_back({i, kf.world_pose, gt[*match].pose});
  }
  return updates;
}

std::vector<KeyframeUpdate> keyframe_updates(const Trajectory& traj,
                                             std::span<const StampedPose> old_poses,
                                             std::span<const StampedPose> new_poses,
                                             double tolerance) {
  const StampIndex old_index(old_poses);
  const StampIndex new_index(new_poses);
  std::vector<KeyframeUpdate> updates;
  updates.reserve(traj.keyframes().size());
  for (std::size_t i = 0; i < traj.keyframes().size(); ++i) {
    const double t = traj.keyframes()[i].id.stamp;
    const auto o = old_index.nearest(t, tolerance);
    const auto n = new_index.nearest(t, tolerance);
    if (!o || !n) {
      std::ostringstream os;
      os.precision(17);
      os << "no " << (!o ? "old" : "new") << " keyframe pose within " << tolerance
         << " s of keyframe t=" << t;
      throw AssociationError(os.str());
    }
    updates.push_back({i, old_poses[*o].pose, new_poses[*n].pose});
  }
  return updates;
}

}  // namespace posecorr
