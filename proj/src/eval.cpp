#include "posecorr/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace posecorr {

ErrorStats compute_stats(std::span<const double> values) {
  ErrorStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

std::string format_stats(const ErrorStats& s, int decimals) {
  return fmt::format("{:.{}f}±{:.{}f} ({:.{}f})", s.mean, decimals, s.std, decimals, s.median,
                     decimals);
}

std::vector<FrameError> frame_errors(std::span<const StampedPose> est,
                                     std::span<const StampedPose> gt, double tolerance) {
  const StampIndex index(gt);
  std::vector<FrameError> out;
  out.reserve(est.size());
  for (const StampedPose& e : est) {
    const auto match = index.nearest(e.id.stamp, tolerance);
    if (!match) {
      throw AssociationError("no ground-truth pose within " + fmt::format("{}", tolerance) +
                             " s of " + to_string(e.id));
    }
    const Pose& g = gt[*match].pose;
    out.push_back({e.id, (e.pose.translation() - g.translation()).norm() * 100.0,
                   rotation_angle_deg(e.pose.rotation(), g.rotation())});
  }
  return out;
}

MethodReport run_protocol(const Trajectory& traj, std::span<const StampedPose> gt,
                          const CorrectionMethod& method, const ProtocolOptions& opts) {
  const std::vector<KeyframeUpdate> updates = snap_to_gt(traj, gt, opts.assoc_tolerance);
  const CorrectionResult result = correct_trajectory(traj, updates, method, opts.driver);

  MethodReport report;
  report.method = method.name();
  report.diag = result.diag;
  report.frames = frame_errors(result.corrected.relative_world_poses(), gt, opts.assoc_tolerance);

  std::vector<double> t, r, ms;
  t.reserve(report.frames.size());
  r.reserve(report.frames.size());
  for (const FrameError& e : report.frames) {
    t.push_back(e.trans_cm);
    r.push_back(e.rot_deg);
  }
  for (const SegmentReport& s : result.segments) {
    if (!s.terminal && s.rel_count > 0) ms.push_back(s.elapsed_ms);
  }
  report.trans_cm = compute_stats(t);
  report.rot_deg = compute_stats(r);
  report.time_ms = compute_stats(ms);
  return report;
}

std::vector<BenchFixture> bench_fixtures(const Trajectory& traj,
                                         const std::vector<KeyframeUpdate>& updates) {
  std::vector<BenchFixture> out;
  for (const Segment& seg : traj.segments()) {
    if (seg.terminal()) continue;
    out.push_back({seg, updates.at(seg.index), updates.at(seg.index + 1)});
  }
  return out;
}

ErrorStats bench(const SegmentCorrector& fn, std::span<const BenchFixture> fixtures,
                 std::size_t repetitions) {
  for (const BenchFixture& f : fixtures) fn(f);
  std::vector<double> ms;
  ms.reserve(fixtures.size() * repetitions);
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    for (const BenchFixture& f : fixtures) {
      const auto start = std::chrono::steady_clock::now();
      fn(f);
      const auto stop = std::chrono::steady_clock::now();
      ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
  }
  return compute_stats(ms);
}

void write_report_csv(std::ostream& os, const std::string& sequence,
                      std::span<const MethodReport> reports, bool include_timing) {
  os << "sequence,method,t_mean_cm,t_std_cm,t_median_cm,r_mean_deg,r_std_deg,r_median_deg,"
        "singular_hits";
  if (include_timing) os << ",time_ms_median";
  os << '\n';
  for (const MethodReport& r : reports) {
    os << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}", sequence, r.method,
                      r.trans_cm.mean, r.trans_cm.std, r.trans_cm.median, r.rot_deg.mean,
                      r.rot_deg.std, r.rot_deg.median, r.diag.singular_hits());
    if (include_timing) os << fmt::format(",{:.6f}", r.time_ms.median);
    os << '\n';
  }
}

void write_frame_errors_csv(std::ostream& os, const MethodReport& report) {
  os << "index,timestamp,trans_cm,rot_deg\n";
  for (const FrameError& e : report.frames) {
    os << fmt::format("{},{:.9f},{:.9f},{:.9f}\n", e.id.index, e.id.stamp, e.trans_cm, e.rot_deg);
  }
}

}  // namespace posecorr
