#include "posecorr/correction.hpp"

#include <algorithm>
#include <stdexcept>

namespace posecorr {

ScaleFactor scale_factor(const Vec3& t_ab_old, const Vec3& t_ab_new, ScaleMode mode) {
  const double old_norm = t_ab_old.norm();
  if (old_norm < kDegenerateBaseline) return {1.0, true};
  const double ratio = t_ab_new.norm() / old_norm;
  if (mode == ScaleMode::SquaredRatio) return {ratio * ratio, false};
  return {ratio, false};
}

ConditionSolution condition_from_kf(const Pose& rel_old, const ScaleFactor& s) {
  return {rel_old.rotation(), s.value * rel_old.translation()};
}

FusionGap fusion_gap(const ConditionSolution& sol_a, const ConditionSolution& sol_b,
                     const Pose& kf_a_new, const Pose& kf_b_new) {
  const Pose new_ab = kf_a_new.inverse() * kf_b_new;
  // KF_b's solution carried into the updated KF_a frame, then compared with
  // KF_a's solution in that solution's own frame.
  const Rotation r_a_inv = sol_a.rot.inverse();
  FusionGap gap;
  gap.rot = r_a_inv * new_ab.rotation() * sol_b.rot;
  gap.trans = r_a_inv * (new_ab.translation() + new_ab.rotation() * sol_b.trans - sol_a.trans);
  return gap;
}

namespace {

double timestamp_ratio(const Segment& seg, std::size_t j) {
  const double t0 = seg.kf_a.id.stamp;
  const double t1 = seg.kf_b->id.stamp;
  if (!(t1 > t0)) return 0.0;
  return std::clamp((seg.rels[j].id.stamp - t0) / (t1 - t0), 0.0, 1.0);
}

}  // namespace

InterpFactor interp_factor(const Segment& seg, std::size_t j) {
  if (seg.terminal()) throw std::invalid_argument("interpolation factor needs two keyframes");
  if (j >= seg.rels.size()) throw std::out_of_range("relative frame index out of range");
  const Pose old_ab = seg.kf_a.world_pose.inverse() * seg.kf_b->world_pose;
  const Pose& rel = seg.rels[j].rel_pose;
  const double d_a = rel.translation().norm();
  const double d_b = (old_ab.inverse() * rel).translation().norm();
  if (d_a + d_b < kDegenerateBaseline) return {timestamp_ratio(seg, j), true};
  return {d_a / (d_a + d_b), false};
}

Pose fuse(const ConditionSolution& sol_a, const FusionGap& gap, double alpha) {
  if (alpha <= 0.0) return sol_a.pose();
  const Rotation r = sol_a.rot * slerp(Rotation::identity(), gap.rot, alpha);
  return Pose(r, sol_a.trans + alpha * (r * gap.trans));
}

SegmentCorrection correct_segment(const Segment& seg, const KeyframeUpdate& upd_a,
                                  const KeyframeUpdate& upd_b, const CorrectionOptions& opts) {
  if (seg.terminal()) return correct_terminal_segment(seg, upd_a);

  const Pose old_ab = upd_a.old_pose.inverse() * upd_b.old_pose;
  const Pose new_ab = upd_a.new_pose.inverse() * upd_b.new_pose;
  const Pose old_ba = old_ab.inverse();

  SegmentCorrection out;
  out.scale = scale_factor(old_ab.translation(), new_ab.translation(), opts.scale_mode);
  out.rels.reserve(seg.rels.size());
  out.alpha_min = 1.0;
  out.alpha_max = 0.0;

  for (std::size_t j = 0; j < seg.rels.size(); ++j) {
    const Pose& rel_a = seg.rels[j].rel_pose;
    const ConditionSolution sol_a = condition_from_kf(rel_a, out.scale);
    const ConditionSolution sol_b = condition_from_kf(old_ba * rel_a, out.scale);
    const FusionGap gap = fusion_gap(sol_a, sol_b, upd_a.new_pose, upd_b.new_pose);
    const double alpha = out.scale.degenerate_baseline ? timestamp_ratio(seg, j)
                                                       : interp_factor(seg, j).alpha;
    out.alpha_min = std::min(out.alpha_min, alpha);
    out.alpha_max = std::max(out.alpha_max, alpha);
    out.rels.push_back(fuse(sol_a, gap, alpha));
  }
  if (seg.rels.empty()) out.alpha_min = 0.0;
  return out;
}

SegmentCorrection correct_terminal_segment(const Segment& seg, const KeyframeUpdate&) {
  SegmentCorrection out;
  out.terminal = true;
  out.rels.reserve(seg.rels.size());
  for (const RelativeFrame& rel : seg.rels) {
    out.rels.push_back(condition_from_kf(rel.rel_pose, out.scale).pose());
  }
  return out;
}

}  // namespace posecorr
