#include "posecorr/synth.hpp"

#include <algorithm>
#include <array>
#include <iterator>
#include <stdexcept>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <unordered_map>

namespace posecorr {

bool Camera::valid() const {
  return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 && cx <= width &&
         cy >= 0.0 && cy <= height;
}

bool Camera::inside(const Eigen::Vector2d& px) const {
  return px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 && px.y() < height;
}

std::optional<Projection> project(const Camera& cam, const Pose& world_to_camera, const Vec3& P) {
  const Vec3 p = world_to_camera * P;
  if (!(p.z() > kMinProjectionDepth)) return std::nullopt;
  return Projection{{cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy}, p.z()};
}

Vec3 unproject(const Camera& cam, const Pose& world_to_camera, const Eigen::Vector2d& pixel,
               double depth) {
  const Vec3 ray((pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy, 1.0);
  return world_to_camera.inverse() * (depth * ray);
}

std::string_view to_string(PathShape s) {
  switch (s) {
    case PathShape::ForwardVehicle: return "forward";
    case PathShape::Mav: return "mav";
    case PathShape::Line: return "line";
    case PathShape::PureRotation: return "rotation";
  }
  return "?";
}

std::optional<PathShape> parse_path_shape(std::string_view name) {
  if (name == "forward") return PathShape::ForwardVehicle;
  if (name == "mav") return PathShape::Mav;
  if (name == "line") return PathShape::Line;
  if (name == "rotation") return PathShape::PureRotation;
  return std::nullopt;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

std::vector<StampedPose> generate_path(const SceneSpec& spec) {
  if (spec.keyframes < 2) throw SceneError("a scene needs at least two keyframes");
  const std::size_t step = spec.rels_per_segment + 1;
  const std::size_t n = (spec.keyframes - 1) * step + 1 + spec.terminal_rels;
  const std::size_t knots = n / step + 2;
  std::mt19937_64 rng(spec.seed);

  std::vector<StampedPose> frames(n);
  for (std::size_t k = 0; k < n; ++k) {
    frames[k].id = {static_cast<double>(k) * spec.frame_period, static_cast<std::int64_t>(k)};
  }

  switch (spec.shape) {
    case PathShape::ForwardVehicle: {
      // Straight drive along the optical axis. Camera yaw at keyframes stays
      // below 8e-4 rad, so keyframe-to-keyframe lateral motion is under 1e-3
      // of the forward motion; between keyframes the vehicle sways sideways.
      constexpr double kSegmentLength = 4.0;
      std::vector<double> yaw(knots), sway(knots);
      for (std::size_t i = 0; i < knots; ++i) {
        yaw[i] = uniform(rng, -8e-4, 8e-4);
        sway[i] = 0.05 * (1.0 + 0.5 * uniform(rng, -1.0, 1.0));
      }
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = k / step;
        const double f = static_cast<double>(k % step) / static_cast<double>(step);
        const double psi = yaw[i] * (1.0 - f) + yaw[i + 1] * f;
        const double x = sway[i] * 0.5 * (1.0 - std::cos(kTwoPi * f));
        const double z = kSegmentLength * static_cast<double>(k) / static_cast<double>(step);
        frames[k].pose = Pose(Rotation::about_axis(Vec3::UnitY(), psi), Vec3(x, 0.0, z));
      }
      break;
    }
    case PathShape::Mav: {
      std::array<double, 6> phase{}, freq{};
      for (std::size_t c = 0; c < 6; ++c) {
        phase[c] = uniform(rng, 0.0, kTwoPi);
        freq[c] = uniform(rng, 0.02, 0.08);
      }
      const std::array<double, 3> pos_amp{3.0, 1.5, 3.0};
      const std::array<double, 3> rot_amp{0.3, 0.6, 0.3};
      for (std::size_t k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k);
        Vec3 p, w;
        for (int c = 0; c < 3; ++c) {
          p(c) = pos_amp[c] * std::sin(freq[c] * kk + phase[c]);
          w(c) = rot_amp[c] * std::sin(freq[c + 3] * kk + phase[c + 3]);
        }
        p.z() += 0.15 * kk;
        frames[k].pose = Pose(so3_exp(w), p);
      }
      break;
    }
    case PathShape::Line: {
      for (std::size_t k = 0; k < n; ++k) {
        frames[k].pose = Pose::from_translation(Vec3(0.0, 0.0, 0.5 * static_cast<double>(k)));
      }
      break;
    }
    case PathShape::PureRotation: {
      const double period = 4.0 * static_cast<double>(step);
      const double amp = uniform(rng, 0.15, 0.3);
      for (std::size_t k = 0; k < n; ++k) {
        const double psi = amp * std::sin(kTwoPi * static_cast<double>(k) / period);
        frames[k].pose = Pose(Rotation::about_axis(Vec3::UnitY(), psi), Vec3::Zero());
      }
      break;
    }
  }
  return frames;
}

Scene generate_scene(const SceneSpec& spec) {
  if (!spec.camera.valid()) throw SceneError("invalid camera intrinsics");
  if (!(spec.min_depth > 0.0 && spec.max_depth > spec.min_depth)) {
    throw SceneError("invalid landmark depth band");
  }
  Scene scene;
  scene.camera = spec.camera;
  scene.frames = generate_path(spec);
  const std::size_t step = spec.rels_per_segment + 1;
  for (std::size_t i = 0; i < spec.keyframes; ++i) scene.keyframes.push_back(i * step);

  // Separate stream so the path does not depend on landmark settings.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  const Camera& cam = spec.camera;
  std::vector<Pose> world_to_camera;
  world_to_camera.reserve(scene.frames.size());
  for (const StampedPose& f : scene.frames) world_to_camera.push_back(f.pose.inverse());

  for (std::size_t k = 0; k < scene.frames.size(); ++k) {
    for (std::size_t l = 0; l < spec.landmarks_per_frame; ++l) {
      const Eigen::Vector2d px(uniform(rng, 0.0, cam.width), uniform(rng, 0.0, cam.height));
      const double depth = uniform(rng, spec.min_depth, spec.max_depth);
      scene.landmarks.push_back(
          {scene.landmarks.size(), unproject(cam, world_to_camera[k], px, depth)});
    }
  }

  std::normal_distribution<double> noise(0.0, spec.pixel_noise > 0.0 ? spec.pixel_noise : 1.0);
  std::vector<std::vector<std::size_t>> seen(scene.frames.size());
  for (std::size_t k = 0; k < scene.frames.size(); ++k) {
    for (const Landmark& lm : scene.landmarks) {
      const auto proj = project(cam, world_to_camera[k], lm.position);
      if (!proj || !cam.inside(proj->pixel)) continue;
      Observation obs{k, lm.id, proj->pixel, proj->depth};
      if (spec.pixel_noise > 0.0) {
        obs.pixel.x() += noise(rng);
        obs.pixel.y() += noise(rng);
      }
      scene.observations.push_back(obs);
      seen[k].push_back(lm.id);
    }
  }

  for (std::size_t k = 0; k + 1 < seen.size(); ++k) {
    std::vector<std::size_t> shared;
    std::set_intersection(seen[k].begin(), seen[k].end(), seen[k + 1].begin(), seen[k + 1].end(),
                          std::back_inserter(shared));
    if (shared.size() < spec.min_shared) {
      throw SceneError("frames " + std::to_string(k) + " and " + std::to_string(k + 1) +
                       " share only " + std::to_string(shared.size()) + " landmarks");
    }
  }
  return scene;
}

Pose Similarity::apply(const Pose& camera_to_world) const {
  return Pose(rotation * camera_to_world.rotation(), apply(camera_to_world.translation()));
}

std::vector<Landmark> apply_map_update(std::span<const Landmark> landmarks,
                                       const MapUpdate& update) {
  if (!update.landmark_displacement.empty() &&
      update.landmark_displacement.size() != landmarks.size()) {
    throw std::invalid_argument("one displacement per landmark expected");
  }
  if (update.similarity && !(update.similarity->scale > 0.0)) {
    throw std::invalid_argument("similarity scale must be positive");
  }
  std::vector<Landmark> out(landmarks.begin(), landmarks.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!update.landmark_displacement.empty()) out[i].position += update.landmark_displacement[i];
    if (update.similarity) out[i].position = update.similarity->apply(out[i].position);
  }
  return out;
}

SimilarityUpdate apply_similarity_update(const Scene& scene, const Similarity& sim) {
  if (!(sim.scale > 0.0)) throw std::invalid_argument("similarity scale must be positive");
  SimilarityUpdate out;
  for (std::size_t i = 0; i < scene.keyframes.size(); ++i) {
    const Pose& old_pose = scene.frames[scene.keyframes[i]].pose;
    out.keyframe_updates.push_back({i, old_pose, sim.apply(old_pose)});
  }
  MapUpdate update;
  update.similarity = sim;
  out.landmarks = apply_map_update(scene.landmarks, update);
  out.frames.reserve(scene.frames.size());
  for (const StampedPose& f : scene.frames) out.frames.push_back({f.id, sim.apply(f.pose)});
  return out;
}

Reprojection reprojection_rms(const Scene& scene, std::span<const StampedPose> poses,
                              std::span<const Landmark> landmarks) {
  if (poses.size() != scene.frames.size()) {
    throw std::invalid_argument("one candidate pose per scene frame expected");
  }
  std::unordered_map<std::size_t, std::size_t> by_id;
  by_id.reserve(landmarks.size());
  for (std::size_t i = 0; i < landmarks.size(); ++i) by_id.emplace(landmarks[i].id, i);

  std::vector<Pose> world_to_camera;
  world_to_camera.reserve(poses.size());
  for (const StampedPose& p : poses) world_to_camera.push_back(p.pose.inverse());

  Reprojection out;
  double sum_sq = 0.0;
  for (const Observation& obs : scene.observations) {
    const auto it = by_id.find(obs.landmark);
    if (it == by_id.end()) {
      throw std::invalid_argument("observation references unknown landmark " +
                                  std::to_string(obs.landmark));
    }
    const auto proj =
        project(scene.camera, world_to_camera.at(obs.frame), landmarks[it->second].position);
    if (!proj) {
      ++out.behind_camera;
      continue;
    }
    sum_sq += (proj->pixel - obs.pixel).squaredNorm();
    ++out.used;
  }
  if (out.used > 0) out.rms_px = std::sqrt(sum_sq / static_cast<double>(out.used));
  return out;
}

std::vector<StampedPose> perturb_keyframes_lateral(const Scene& scene, double magnitude,
                                                   double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<StampedPose> est = scene.frames;
  for (std::size_t k : scene.keyframes) {
    const double d = magnitude * (1.0 + spread * uniform(rng, -1.0, 1.0));
    const Pose& p = est[k].pose;
    est[k].pose = Pose(p.rotation(), p.translation() + d * (p.rotation() * Vec3::UnitX()));
  }
  return est;
}

std::vector<StampedPose> drifted_estimate(const Scene& scene, double sigma_t, double sigma_r,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto& gt = scene.frames;
  std::vector<StampedPose> est;
  est.reserve(gt.size());
  if (gt.empty()) return est;
  est.push_back(gt.front());
  for (std::size_t k = 1; k < gt.size(); ++k) {
    const Pose step = gt[k - 1].pose.inverse() * gt[k].pose;
    RotVec dw;
    Vec3 dt;
    for (int c = 0; c < 3; ++c) dw(c) = sigma_r * normal(rng);
    for (int c = 0; c < 3; ++c) dt(c) = sigma_t * normal(rng);
    est.push_back({gt[k].id, est.back().pose * step * Pose(so3_exp(dw), dt)});
  }
  return est;
}

}  // namespace posecorr
