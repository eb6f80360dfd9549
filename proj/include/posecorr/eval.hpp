#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "posecorr/pipeline.hpp"
#include "posecorr/trajectory.hpp"

namespace posecorr {

struct FrameError {
  FrameId id;
  double trans_cm = 0.0;
  double rot_deg = 0.0;
};

/// Summary in table convention: mean, sample standard deviation, median.
struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

ErrorStats compute_stats(std::span<const double> values);

/// "mean±std (median)" with the given number of decimals.
std::string format_stats(const ErrorStats& s, int decimals = 3);

std::vector<FrameError> frame_errors(std::span<const StampedPose> est,
                                     std::span<const StampedPose> gt,
                                     double tolerance = kDefaultAssocTolerance);

struct MethodReport {
  std::string method;
  ErrorStats trans_cm;
  ErrorStats rot_deg;
  InterpDiagnostics diag;
  /// Wall time per segment correction [ms], full segments only.
  ErrorStats time_ms;
  std::vector<FrameError> frames;
};

struct ProtocolOptions {
  DriverOptions driver;
  double assoc_tolerance = kDefaultAssocTolerance;
};

/// Snaps keyframes to GT, corrects the relative frames with `method`, and
/// scores the relative frames against GT.
MethodReport run_protocol(const Trajectory& traj, std::span<const StampedPose> gt,
                          const CorrectionMethod& method, const ProtocolOptions& opts = {});

/// One full segment with both keyframe updates: the unit a correction works on.
struct BenchFixture {
  Segment segment;
  KeyframeUpdate upd_a;
  KeyframeUpdate upd_b;
};

std::vector<BenchFixture> bench_fixtures(const Trajectory& traj,
                                         const std::vector<KeyframeUpdate>& updates);

using SegmentCorrector = std::function<void(const BenchFixture&)>;

/// Per-call wall time [ms] of `fn` over every fixture, `repetitions` times,
/// after one untimed warm-up pass.
ErrorStats bench(const SegmentCorrector& fn, std::span<const BenchFixture> fixtures,
                 std::size_t repetitions);

/// Report columns: sequence, method, t_mean_cm, t_std_cm, t_median_cm,
/// r_mean_deg, r_std_deg, r_median_deg, singular_hits, time_ms_median.
void write_report_csv(std::ostream& os, const std::string& sequence,
                      std::span<const MethodReport> reports, bool include_timing = true);

void write_frame_errors_csv(std::ostream& os, const MethodReport& report);

}  // namespace posecorr
