// posecorrect: correct relative-frame poses after keyframe updates, evaluate
// corrections against ground truth, generate synthetic scenes, and time them.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "posecorr/eval.hpp"
#include "posecorr/io.hpp"
#include "posecorr/pipeline.hpp"
#include "posecorr/synth.hpp"

namespace fs = std::filesystem;
using namespace posecorr;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

/// Bad user input: reported and mapped to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string traj;
  std::string gt;
  std::string kf_index;
  std::string kf_old;
  std::string kf_new;
  std::string format = "tum";
  double kitti_rate = 10.0;
  std::vector<std::string> methods;
  std::string trans_space;
  std::string rot_space;
  bool scale_squared = false;
  bool raw_division = false;
  double assoc_tol = kDefaultAssocTolerance;
  std::uint64_t seed = 0;
  std::string out = ".";
  unsigned threads = 1;
  std::string sequence;

  // simulate
  std::string shape = "forward";
  std::string estimate = "drift";
  std::size_t keyframes = 16;
  std::size_t rels = 3;
  std::size_t terminal_rels = 0;
  double pixel_noise = 0.0;
  double lateral = 0.01;
  double sigma_t = 0.01;
  double sigma_r = 0.003;

  // bench
  std::size_t reps = 200;
};

DriverOptions driver_options(const RunConfig& cfg) {
  DriverOptions opts;
  opts.correction.scale_mode = cfg.scale_squared ? ScaleMode::SquaredRatio : ScaleMode::Ratio;
  opts.interp.raw_division = cfg.raw_division;
  opts.threads = std::max(1u, cfg.threads);
  return opts;
}

std::optional<CorrectionMethod> paired_method(const RunConfig& cfg) {
  if (cfg.trans_space.empty() && cfg.rot_space.empty()) return std::nullopt;
  std::optional<TransSpace> ts;
  std::optional<RotSpace> rs;
  if (!cfg.trans_space.empty()) {
    ts = parse_trans_space(cfg.trans_space);
    if (!ts) throw UsageError("unknown translation space '" + cfg.trans_space + "' (xyz, se3-v)");
  }
  if (!cfg.rot_space.empty()) {
    rs = parse_rot_space(cfg.rot_space);
    if (!rs) throw UsageError("unknown rotation space '" + cfg.rot_space + "' (euler, quat, so3)");
  }
  return CorrectionMethod::interp(ts, rs);
}

std::vector<CorrectionMethod> requested_methods(const RunConfig& cfg,
                                                const std::vector<std::string>& fallback) {
  std::vector<CorrectionMethod> out;
  for (const std::string& name : cfg.methods.empty() ? fallback : cfg.methods) {
    auto m = parse_method(name);
    if (!m) {
      std::string known;
      for (const auto& n : method_names()) known += (known.empty() ? "" : ", ") + n;
      throw UsageError("unknown method '" + name + "' (known: " + known + ")");
    }
    out.push_back(*m);
  }
  return out;
}

std::vector<StampedPose> read_poses(const RunConfig& cfg, const std::string& path,
                                    const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  if (cfg.format == "kitti") return read_kitti(path, cfg.kitti_rate);
  return read_tum(path);
}

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  fn(out);
  out.flush();
  if (!out) throw InputError("failed writing " + path.string());
}

Trajectory load_trajectory(const RunConfig& cfg) {
  const auto frames = read_poses(cfg, cfg.traj, "--traj");
  if (cfg.kf_index.empty()) throw UsageError("--kf-index is required");
  const auto positions = read_keyframe_index(cfg.kf_index, frames, cfg.assoc_tol);
  if (positions.empty()) throw InputError(cfg.kf_index + ": no keyframes listed");
  try {
    return Trajectory::from_world_poses(frames, positions);
  } catch (const std::invalid_argument& e) {
    throw InputError(cfg.traj + ": " + e.what());
  }
}

int cmd_correct(const RunConfig& cfg) {
  std::optional<CorrectionMethod> method = paired_method(cfg);
  if (method && !cfg.methods.empty()) {
    throw UsageError("use either --methods or --trans-space/--rot-space, not both");
  }
  if (!method) {
    const auto ms = requested_methods(cfg, {"proposed"});
    if (ms.size() != 1) throw UsageError("correct takes exactly one method");
    method = ms.front();
  }

  const Trajectory traj = load_trajectory(cfg);
  if (cfg.kf_new.empty()) throw UsageError("--kf-new is required");
  const auto kf_new = read_tum(cfg.kf_new);
  std::vector<StampedPose> kf_old;
  if (cfg.kf_old.empty()) {
    for (const Keyframe& k : traj.keyframes()) kf_old.push_back({k.id, k.world_pose});
  } else {
    kf_old = read_tum(cfg.kf_old);
  }
  const auto updates = keyframe_updates(traj, kf_old, kf_new, cfg.assoc_tol);
  const CorrectionResult result = correct_trajectory(traj, updates, *method, driver_options(cfg));
  spdlog::info("corrected {} relative frames in {} segments with {}", traj.relatives().size(),
               traj.segments().size(), method->name());

  const fs::path dir = prepare_out(cfg);
  write_tum(dir / "corrected.tum", result.corrected.world_poses());
  write_file(dir / "diagnostics.csv", [&](std::ostream& os) {
    os << "segment,kf_a,kf_b,rel_count,scale,degenerate_baseline,alpha_min,alpha_max,"
          "singular_hits,quat_renormalizations,gimbal_warnings\n";
    for (const SegmentReport& s : result.segments) {
      os << fmt::format("{},{},{},{},{:.9f},{},{:.9f},{:.9f},{},{},{}\n", s.segment,
                        s.kf_a.index, s.kf_b ? std::to_string(s.kf_b->index) : std::string(),
                        s.rel_count, s.scale.value, s.scale.degenerate_baseline ? 1 : 0,
                        s.alpha_min, s.alpha_max, s.diag.singular_hits(),
                        s.diag.quat_renormalizations, s.diag.gimbal_warnings);
    }
  });
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  std::vector<CorrectionMethod> methods = requested_methods(cfg, method_names());
  if (auto paired = paired_method(cfg)) methods.push_back(*paired);

  const Trajectory traj = load_trajectory(cfg);
  const auto gt = read_poses(cfg, cfg.gt, "--gt");
  ProtocolOptions opts;
  opts.driver = driver_options(cfg);
  opts.assoc_tolerance = cfg.assoc_tol;

  std::vector<MethodReport> reports;
  for (const CorrectionMethod& m : methods) {
    reports.push_back(run_protocol(traj, gt, m, opts));
    const MethodReport& r = reports.back();
    spdlog::info("{:<14} t[cm] {}  r[deg] {}  singular {}", r.method, format_stats(r.trans_cm),
                 format_stats(r.rot_deg), r.diag.singular_hits());
  }

  const fs::path dir = prepare_out(cfg);
  const std::string sequence =
      cfg.sequence.empty() ? fs::path(cfg.traj).stem().string() : cfg.sequence;
  write_file(dir / "report.csv",
             [&](std::ostream& os) { write_report_csv(os, sequence, reports); });
  for (const MethodReport& r : reports) {
    write_file(dir / ("errors_" + r.method + ".csv"),
               [&](std::ostream& os) { write_frame_errors_csv(os, r); });
  }
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  SceneSpec spec;
  const auto shape = parse_path_shape(cfg.shape);
  if (!shape) throw UsageError("unknown shape '" + cfg.shape + "' (forward, mav, line, rotation)");
  spec.shape = *shape;
  spec.keyframes = cfg.keyframes;
  spec.rels_per_segment = cfg.rels;
  spec.terminal_rels = cfg.terminal_rels;
  spec.pixel_noise = cfg.pixel_noise;
  spec.seed = cfg.seed;

  Scene scene;
  try {
    scene = generate_scene(spec);
  } catch (const SceneError& e) {
    throw UsageError(std::string("scene generation failed: ") + e.what());
  }

  std::vector<StampedPose> gt = scene.frames;
  std::vector<StampedPose> traj = scene.frames;
  std::vector<StampedPose> kf_old, kf_new;
  for (std::size_t k : scene.keyframes) kf_new.push_back(scene.frames[k]);

  if (cfg.estimate == "exact") {
  } else if (cfg.estimate == "lateral") {
    traj = perturb_keyframes_lateral(scene, cfg.lateral, 0.2, cfg.seed + 1);
  } else if (cfg.estimate == "drift") {
    traj = drifted_estimate(scene, cfg.sigma_t, cfg.sigma_r, cfg.seed + 1);
  } else if (cfg.estimate == "similarity") {
    std::mt19937_64 rng(cfg.seed + 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Similarity sim;
    sim.rotation = Rotation(so3_exp(Vec3(u(rng), u(rng), u(rng))));
    sim.translation = Vec3(u(rng), u(rng), u(rng)) * 5.0;
    sim.scale = std::exp(0.5 * u(rng));
    gt = apply_similarity_update(scene, sim).frames;
    kf_new.clear();
    for (std::size_t k : scene.keyframes) kf_new.push_back(gt[k]);
  } else {
    throw UsageError("unknown estimate '" + cfg.estimate +
                     "' (exact, lateral, drift, similarity)");
  }
  for (std::size_t k : scene.keyframes) kf_old.push_back(traj[k]);

  const fs::path dir = prepare_out(cfg);
  write_scene(dir / "scene.txt", scene);
  write_tum(dir / "gt.tum", gt);
  write_tum(dir / "traj.tum", traj);
  write_keyframe_index(dir / "kf_index.txt", scene.frames, scene.keyframes);
  write_tum(dir / "kf_old.tum", kf_old);
  write_tum(dir / "kf_new.tum", kf_new);
  spdlog::info("{} scene: {} frames, {} keyframes, {} landmarks, {} observations", cfg.shape,
               scene.frames.size(), scene.keyframes.size(), scene.landmarks.size(),
               scene.observations.size());
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  const std::vector<CorrectionMethod> methods = requested_methods(cfg, method_names());
  Trajectory traj = [&] {
    if (!cfg.traj.empty()) return load_trajectory(cfg);
    SceneSpec spec;
    spec.shape = PathShape::Mav;
    spec.keyframes = cfg.keyframes;
    spec.rels_per_segment = cfg.rels;
    spec.seed = cfg.seed;
    const Scene scene = generate_scene(spec);
    return Trajectory::from_world_poses(drifted_estimate(scene, 0.01, 0.003, cfg.seed + 1),
                                        scene.keyframes);
  }();

  std::vector<KeyframeUpdate> updates;
  if (!cfg.gt.empty()) {
    updates = snap_to_gt(traj, read_poses(cfg, cfg.gt, "--gt"), cfg.assoc_tol);
  } else if (!cfg.kf_new.empty()) {
    std::vector<StampedPose> kf_old;
    if (cfg.kf_old.empty()) {
      for (const Keyframe& k : traj.keyframes()) kf_old.push_back({k.id, k.world_pose});
    } else {
      kf_old = read_tum(cfg.kf_old);
    }
    updates = keyframe_updates(traj, kf_old, read_tum(cfg.kf_new), cfg.assoc_tol);
  } else {
    // Synthetic update: every keyframe moved by a small random rigid motion.
    std::mt19937_64 rng(cfg.seed + 2);
    std::normal_distribution<double> n(0.0, 1.0);
    for (const Keyframe& k : traj.keyframes()) {
      const Pose delta(Rotation(so3_exp(Vec3(n(rng), n(rng), n(rng)) * 0.01)),
                       Vec3(n(rng), n(rng), n(rng)) * 0.05);
      updates.push_back({updates.size(), k.world_pose, k.world_pose * delta});
    }
  }

  const auto fixtures = bench_fixtures(traj, updates);
  if (fixtures.empty()) throw InputError("no full segments to time");
  const DriverOptions opts = driver_options(cfg);

  const fs::path dir = prepare_out(cfg);
  write_file(dir / "bench.csv", [&](std::ostream& os) {
    os << "method,calls,mean_ms,std_ms,median_ms,min_ms,max_ms\n";
    for (const CorrectionMethod& m : methods) {
      volatile double sink = 0.0;
      const ErrorStats s = bench(
          [&](const BenchFixture& f) {
            const auto poses = correct_segment_with(f.segment, f.upd_a, &f.upd_b, m, opts);
            if (!poses.empty()) sink = sink + poses.front().translation().x();
          },
          fixtures, cfg.reps);
      os << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", m.name(), s.count, s.mean,
                        s.std, s.median, s.min, s.max);
      spdlog::info("{:<14} {} ms", m.name(), format_stats(s, 5));
    }
  });
  return 0;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("posecorrect");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("POSECORRECT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only honor it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  RunConfig cfg;

  CLI::App app{"Relative-frame pose correction after keyframe updates"};
  app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");
  app.require_subcommand(1);

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "Worker threads for per-segment correction")
        ->check(CLI::Range(1u, 256u))
        ->capture_default_str();
    sub->add_option("--assoc-tol", cfg.assoc_tol, "Timestamp association tolerance [s]")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    sub->add_option("--methods", cfg.methods, "Comma-separated methods")->delimiter(',');
    sub->add_option("--trans-space", cfg.trans_space, "Translation space: xyz, se3-v");
    sub->add_option("--rot-space", cfg.rot_space, "Rotation space: euler, quat, so3");
    sub->add_flag("--scale-squared", cfg.scale_squared, "Use the squared-norm scale ratio");
    sub->add_flag("--raw-division", cfg.raw_division,
                  "Divide by near-zero baseline components instead of skipping them");
  };
  const auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--traj", cfg.traj, "Estimated full trajectory");
    sub->add_option("--kf-index", cfg.kf_index, "Keyframe list (frame indices or timestamps)");
    sub->add_option("--format", cfg.format, "Trajectory file format")
        ->check(CLI::IsMember({"tum", "kitti"}))
        ->capture_default_str();
    sub->add_option("--kitti-rate", cfg.kitti_rate, "Frame rate for KITTI timestamps [Hz]")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  CLI::App* correct = app.add_subcommand("correct", "Correct relative frames for new keyframes");
  add_common(correct);
  add_inputs(correct);
  correct->add_option("--kf-old", cfg.kf_old, "Keyframe poses before the update (TUM)");
  correct->add_option("--kf-new", cfg.kf_new, "Keyframe poses after the update (TUM)");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score methods against ground truth");
  add_common(evaluate);
  add_inputs(evaluate);
  evaluate->add_option("--gt", cfg.gt, "Ground-truth trajectory");
  evaluate->add_option("--sequence", cfg.sequence, "Sequence name for the report");

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic scene");
  add_common(simulate);
  simulate->add_option("--shape", cfg.shape, "forward, mav, line, rotation")->capture_default_str();
  simulate->add_option("--estimate", cfg.estimate, "exact, lateral, drift, similarity")
      ->capture_default_str();
  simulate->add_option("--keyframes", cfg.keyframes)->check(CLI::Range(2, 100000))
      ->capture_default_str();
  simulate->add_option("--rels", cfg.rels, "Relative frames per segment")->capture_default_str();
  simulate->add_option("--terminal-rels", cfg.terminal_rels)->capture_default_str();
  simulate->add_option("--pixel-noise", cfg.pixel_noise)->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  simulate->add_option("--lateral", cfg.lateral, "Keyframe sideways shift [m]")
      ->capture_default_str();
  simulate->add_option("--sigma-t", cfg.sigma_t, "Drift translation noise per frame [m]")
      ->capture_default_str();
  simulate->add_option("--sigma-r", cfg.sigma_r, "Drift rotation noise per frame [rad]")
      ->capture_default_str();

  CLI::App* benchc = app.add_subcommand("bench", "Time one segment correction per method");
  add_common(benchc);
  add_inputs(benchc);
  benchc->add_option("--gt", cfg.gt, "Ground truth used as the keyframe update");
  benchc->add_option("--kf-old", cfg.kf_old, "Keyframe poses before the update (TUM)");
  benchc->add_option("--kf-new", cfg.kf_new, "Keyframe poses after the update (TUM)");
  benchc->add_option("--reps", cfg.reps, "Timed passes over all segments")->capture_default_str();
  benchc->add_option("--keyframes", cfg.keyframes, "Keyframes of the synthetic default input")
      ->capture_default_str();
  benchc->add_option("--rels", cfg.rels)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }
  // A saved config stores an unset list as methods="".
  std::erase(cfg.methods, std::string());

  try {
    int rc = 0;
    if (correct->parsed()) rc = cmd_correct(cfg);
    else if (evaluate->parsed()) rc = cmd_evaluate(cfg);
    else if (simulate->parsed()) rc = cmd_simulate(cfg);
    else if (benchc->parsed()) rc = cmd_bench(cfg);
    if (rc == 0) {
      const fs::path dir = prepare_out(cfg);
      write_file(dir / "effective_config.toml",
                 [&](std::ostream& os) {
                   // Loadable again through --config.
                   const CLI::App* sub = app.get_subcommands().front();
                   os << '[' << sub->get_name() << "]\n" << sub->config_to_str(true, false);
                 });
    }
    return rc;
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
  } catch (const AssociationError& e) {
    spdlog::error("{}", e.what());
  } catch (const SceneError& e) {
    spdlog::error("{}", e.what());
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternal;
  }
  return kExitInput;
}
