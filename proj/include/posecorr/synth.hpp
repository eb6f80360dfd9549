#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "posecorr/liegeom.hpp"
#include "posecorr/trajectory.hpp"

namespace posecorr {

/// Pinhole intrinsics [px].
struct Camera {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  bool valid() const;
  bool inside(const Eigen::Vector2d& px) const;
};

struct Landmark {
  std::size_t id = 0;
  Vec3 position = Vec3::Zero();  // world, meters
};

struct Observation {
  std::size_t frame = 0;     // position in Scene::frames
  std::size_t landmark = 0;  // Landmark::id
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  double depth = 0.0;
};

struct Projection {
  Eigen::Vector2d pixel;
  double depth;
};

/// Points closer than this along the optical axis are behind the camera.
inline constexpr double kMinProjectionDepth = 1e-6;

/// `world_to_camera` maps world points into the camera frame. Returns nullopt
/// for points behind the camera.
std::optional<Projection> project(const Camera& cam, const Pose& world_to_camera, const Vec3& P);

/// World point seen at `pixel` with the given depth.
Vec3 unproject(const Camera& cam, const Pose& world_to_camera, const Eigen::Vector2d& pixel,
               double depth);

enum class PathShape { ForwardVehicle, Mav, Line, PureRotation };

std::string_view to_string(PathShape s);
std::optional<PathShape> parse_path_shape(std::string_view name);

struct SceneSpec {
  PathShape shape = PathShape::ForwardVehicle;
  std::size_t keyframes = 16;
  std::size_t rels_per_segment = 3;
  /// Relative frames after the last keyframe.
  std::size_t terminal_rels = 0;
  double frame_period = 0.1;  // seconds
  std::size_t landmarks_per_frame = 24;
  double min_depth = 2.0;
  double max_depth = 50.0;
  std::size_t min_shared = 8;
  Camera camera;
  double pixel_noise = 0.0;  // px, isotropic Gaussian
  std::uint64_t seed = 0;
};

/// Frames are camera-to-world poses; `keyframes` index into `frames`.
struct Scene {
  Camera camera;
  std::vector<StampedPose> frames;
  std::vector<std::size_t> keyframes;
  std::vector<Landmark> landmarks;
  std::vector<Observation> observations;

  Trajectory trajectory() const { return Trajectory::from_world_poses(frames, keyframes); }
};

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ground-truth camera path for a shape (camera-to-world, optical axis +z).
std::vector<StampedPose> generate_path(const SceneSpec& spec);

Scene generate_scene(const SceneSpec& spec);

/// p -> scale * R p + t on points; rotations are left-composed with R.
struct Similarity {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  Pose apply(const Pose& camera_to_world) const;
};

/// Pose updates for every keyframe plus per-landmark displacements applied
/// before an optional global similarity.
struct MapUpdate {
  std::vector<KeyframeUpdate> keyframes;
  std::vector<Vec3> landmark_displacement;
  std::optional<Similarity> similarity;
};

std::vector<Landmark> apply_map_update(std::span<const Landmark> landmarks,
                                       const MapUpdate& update);

struct SimilarityUpdate {
  std::vector<KeyframeUpdate> keyframe_updates;
  std::vector<Landmark> landmarks;
  /// Every frame mapped through the similarity: the exact corrected answer.
  std::vector<StampedPose> frames;
};

SimilarityUpdate apply_similarity_update(const Scene& scene, const Similarity& sim);

struct Reprojection {
  double rms_px = 0.0;
  std::size_t used = 0;
  std::size_t behind_camera = 0;
};

/// RMS distance between stored observations and reprojections of `landmarks`
/// through `poses` (camera-to-world, aligned with Scene::frames).
Reprojection reprojection_rms(const Scene& scene, std::span<const StampedPose> poses,
                              std::span<const Landmark> landmarks);

/// Estimate whose keyframes are shifted sideways (camera x) by
/// magnitude * (1 + spread * u), u ~ U(-1, 1); other frames stay on GT.
std::vector<StampedPose> perturb_keyframes_lateral(const Scene& scene, double magnitude,
                                                   double spread, std::uint64_t seed);

/// Estimate integrated from GT increments with Gaussian noise on each step
/// (translation [m], rotation [rad] per axis), i.e. odometry drift.
std::vector<StampedPose> drifted_estimate(const Scene& scene, double sigma_t, double sigma_r,
                                          std::uint64_t seed);

}  // namespace posecorr
