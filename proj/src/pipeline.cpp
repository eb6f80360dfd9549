#include "posecorr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <stdexcept>
#include <thread>

namespace posecorr {

std::string CorrectionMethod::name() const {
  switch (kind) {
    case Kind::NoCorrection: return "no-correction";
    case Kind::Proposed: return "proposed";
    case Kind::Interp:
      if (trans && !rot) return std::string(to_string(*trans));
      if (rot && !trans) return std::string(to_string(*rot));
      if (trans && rot) {
        return "interp(" + std::string(to_string(*trans)) + "," + std::string(to_string(*rot)) +
               ")";
      }
      return "interp()";
  }
  return "?";
}

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"no-correction", "xyz",  "se3-v",   "euler",
                                                 "quat",          "so3", "proposed"};
  return names;
}

std::optional<CorrectionMethod> parse_method(std::string_view name) {
  if (name == "no-correction") return CorrectionMethod::no_correction();
  if (name == "proposed") return CorrectionMethod::proposed();
  if (auto ts = parse_trans_space(name)) return CorrectionMethod::interp(*ts, std::nullopt);
  if (auto rs = parse_rot_space(name)) return CorrectionMethod::interp(std::nullopt, *rs);
  return std::nullopt;
}

std::vector<Pose> correct_segment_with(const Segment& seg, const KeyframeUpdate& upd_a,
                                       const KeyframeUpdate* upd_b,
                                       const CorrectionMethod& method, const DriverOptions& opts,
                                       SegmentReport* report) {
  SegmentReport local;
  local.segment = seg.index;
  local.kf_a = seg.kf_a.id;
  if (seg.kf_b) local.kf_b = seg.kf_b->id;
  local.rel_count = seg.rels.size();
  local.terminal = seg.terminal();

  std::vector<Pose> out;
  if (seg.terminal() || method.kind == CorrectionMethod::Kind::NoCorrection) {
    // Without a second keyframe every method reduces to the KF_a condition
    // at unit scale, which leaves relative poses as they are.
    const SegmentCorrection c = correct_terminal_segment(seg, upd_a);
    out = c.rels;
  } else {
    if (!upd_b) throw std::invalid_argument("segment correction needs the KF_b update");
    if (method.kind == CorrectionMethod::Kind::Proposed) {
      SegmentCorrection c = correct_segment(seg, upd_a, *upd_b, opts.correction);
      local.scale = c.scale;
      local.alpha_min = c.alpha_min;
      local.alpha_max = c.alpha_max;
      out = std::move(c.rels);
    } else {
      out = interp_correct_segment(seg, upd_a, *upd_b, method.trans, method.rot, opts.interp,
                                   &local.diag);
    }
  }
  if (report) *report = local;
  return out;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace

CorrectionResult correct_trajectory(const Trajectory& traj,
                                    const std::vector<KeyframeUpdate>& updates,
                                    const CorrectionMethod& method, const DriverOptions& opts) {
  const auto& segments = traj.segments();
  if (updates.size() != traj.keyframes().size()) {
    throw std::invalid_argument("expected one keyframe update per keyframe");
  }
  for (std::size_t i = 0; i < updates.size(); ++i) {
    if (updates[i].index != i) throw std::invalid_argument("keyframe updates out of order");
  }

  std::vector<std::vector<Pose>> corrected(segments.size());
  std::vector<SegmentReport> reports(segments.size());
  parallel_for(segments.size(), opts.threads, [&](std::size_t i) {
    const Segment& seg = segments[i];
    const KeyframeUpdate* upd_b = seg.terminal() ? nullptr : &updates[i + 1];
    const auto start = std::chrono::steady_clock::now();
    corrected[i] = correct_segment_with(seg, updates[i], upd_b, method, opts, &reports[i]);
    const auto stop = std::chrono::steady_clock::now();
    reports[i].elapsed_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  });

  std::vector<Keyframe> keyframes = traj.keyframes();
  for (std::size_t i = 0; i < keyframes.size(); ++i) keyframes[i].world_pose = updates[i].new_pose;

  std::vector<RelativeFrame> rels;
  rels.reserve(traj.relatives().size());
  InterpDiagnostics total;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& seg = segments[i];
    for (std::size_t j = 0; j < seg.rels.size(); ++j) {
      rels.push_back({seg.rels[j].id, seg.rels[j].parent, corrected[i][j]});
    }
    total += reports[i].diag;
  }
  return {Trajectory(std::move(keyframes), std::move(rels)), std::move(reports), total};
}

}  // namespace posecorr
