#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "posecorr/io.hpp"
#include "posecorr/synth.hpp"

using namespace posecorr;

TEST_CASE("project examples") {
  const Camera cam;
  const auto on_axis = project(cam, Pose::identity(), Vec3(0, 0, 5));
  REQUIRE(on_axis);
  CHECK(on_axis->pixel == Eigen::Vector2d(cam.cx, cam.cy));
  CHECK(on_axis->depth == 5.0);

  Camera square = cam;
  square.cx = square.cy = 320.0;
  const auto p = project(square, Pose::identity(), Vec3(1, 0, 5));
  REQUIRE(p);
  CHECK(p->pixel.x() == doctest::Approx(420.0).epsilon(1e-15));
  CHECK(p->pixel.y() == doctest::Approx(320.0).epsilon(1e-15));

  CHECK_FALSE(project(cam, Pose::identity(), Vec3(0, 0, -1)));
  CHECK_FALSE(project(cam, Pose::identity(), Vec3(1, 1, 1e-7)));
}

TEST_CASE("unproject inverts project") {
  const Camera cam;
  oracle::Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Pose w2c = rng.pose(5.0);
    const Vec3 in_camera = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 1.0) * rng.uniform(2, 50);
    const Vec3 P = w2c.inverse() * in_camera;
    const auto proj = project(cam, w2c, P);
    REQUIRE(proj);
    CHECK((unproject(cam, w2c, proj->pixel, proj->depth) - P).norm() < 1e-9);
  }
}

TEST_CASE("same seed gives the same scene") {
  SceneSpec spec;
  spec.shape = PathShape::Mav;
  spec.seed = 17;
  std::ostringstream a, b, c;
  write_scene(a, generate_scene(spec));
  write_scene(b, generate_scene(spec));
  spec.seed = 18;
  write_scene(c, generate_scene(spec));
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("zero-noise scenes have zero residual; pixel noise shows up") {
  for (PathShape shape :
       {PathShape::ForwardVehicle, PathShape::Mav, PathShape::Line, PathShape::PureRotation}) {
    SceneSpec spec;
    spec.shape = shape;
    spec.seed = 3;
    const Scene scene = generate_scene(spec);
    CHECK(scene.frames.size() == (spec.keyframes - 1) * (spec.rels_per_segment + 1) + 1);
    CHECK(scene.keyframes.size() == spec.keyframes);
    const Reprojection r = reprojection_rms(scene, scene.frames, scene.landmarks);
    CHECK(r.rms_px < 1e-9);
    CHECK(r.used == scene.observations.size());
    for (const Observation& o : scene.observations) {
      CHECK(o.depth > 0.0);
      CHECK(scene.camera.inside(o.pixel));
    }
  }
  SceneSpec noisy;
  noisy.pixel_noise = 0.5;
  const Scene scene = generate_scene(noisy);
  const double rms = reprojection_rms(scene, scene.frames, scene.landmarks).rms_px;
  CHECK(rms > 0.3);
  CHECK(rms < 0.8);
}

TEST_CASE("adjacent frames share enough landmarks") {
  SceneSpec spec;
  spec.shape = PathShape::Mav;
  spec.seed = 4;
  const Scene scene = generate_scene(spec);
  std::vector<std::vector<std::size_t>> seen(scene.frames.size());
  for (const Observation& o : scene.observations) seen[o.frame].push_back(o.landmark);
  for (auto& s : seen) std::sort(s.begin(), s.end());
  for (std::size_t k = 0; k + 1 < seen.size(); ++k) {
    std::vector<std::size_t> shared;
    std::set_intersection(seen[k].begin(), seen[k].end(), seen[k + 1].begin(), seen[k + 1].end(),
                          std::back_inserter(shared));
    CHECK(shared.size() >= spec.min_shared);
  }
}

TEST_CASE("infeasible specs are rejected") {
  SceneSpec spec;
  spec.keyframes = 1;
  CHECK_THROWS_AS(generate_scene(spec), SceneError);
  spec.keyframes = 4;
  spec.camera.fx = -1;
  CHECK_THROWS_AS(generate_scene(spec), SceneError);
  spec.camera = Camera{};
  spec.min_depth = 10;
  spec.max_depth = 5;
  CHECK_THROWS_AS(generate_scene(spec), SceneError);
  spec = SceneSpec{};
  spec.min_shared = 1000;
  CHECK_THROWS_AS(generate_scene(spec), SceneError);
}

TEST_CASE("forward path keeps keyframe-to-keyframe motion along z") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    const auto path = generate_path(spec);
    const std::size_t step = spec.rels_per_segment + 1;
    bool lateral_between = false;
    for (std::size_t i = 0; i + step < path.size(); i += step) {
      const Vec3 t = (path[i].pose.inverse() * path[i + step].pose).translation();
      CHECK(std::abs(t.x()) < 1e-3 * std::abs(t.z()));
      CHECK(std::abs(t.y()) < 1e-3 * std::abs(t.z()));
      const Vec3 mid = (path[i].pose.inverse() * path[i + step / 2].pose).translation();
      lateral_between = lateral_between || std::abs(mid.x()) > 1e-2;
    }
    CHECK(lateral_between);
  }
}

TEST_CASE("similarity updates") {
  SceneSpec spec;
  spec.shape = PathShape::Mav;
  spec.seed = 5;
  const Scene scene = generate_scene(spec);

  const SimilarityUpdate same = apply_similarity_update(scene, Similarity{});
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    CHECK(oracle::pose_diff(same.frames[i].pose, scene.frames[i].pose) < 1e-15);
  }
  for (std::size_t i = 0; i < scene.landmarks.size(); ++i) {
    CHECK(same.landmarks[i].position == scene.landmarks[i].position);
  }

  Similarity doubling;
  doubling.scale = 2.0;
  const SimilarityUpdate d = apply_similarity_update(scene, doubling);
  for (std::size_t i = 0; i + 1 < d.keyframe_updates.size(); ++i) {
    const auto& a = d.keyframe_updates[i];
    const auto& b = d.keyframe_updates[i + 1];
    const double old_dist = (b.old_pose.translation() - a.old_pose.translation()).norm();
    const double new_dist = (b.new_pose.translation() - a.new_pose.translation()).norm();
    CHECK(new_dist == doctest::Approx(2.0 * old_dist).epsilon(1e-12));
  }

  oracle::Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Similarity sim{rng.rotation(), rng.vec(30.0), rng.uniform(0.2, 5.0)};
    const SimilarityUpdate u = apply_similarity_update(scene, sim);
    CHECK(reprojection_rms(scene, u.frames, u.landmarks).rms_px < 1e-9);
    // Depth scales with the similarity.
    const auto proj = project(scene.camera, u.frames[0].pose.inverse(), u.landmarks[0].position);
    const Observation* obs = nullptr;
    for (const Observation& o : scene.observations) {
      if (o.frame == 0 && o.landmark == scene.landmarks[0].id) obs = &o;
    }
    if (obs && proj) CHECK(proj->depth == doctest::Approx(sim.scale * obs->depth).epsilon(1e-9));
  }
  CHECK_THROWS_AS(apply_similarity_update(scene, Similarity{Rotation(), Vec3::Zero(), 0.0}),
                  std::invalid_argument);
}

TEST_CASE("map updates displace landmarks before the similarity") {
  const std::vector<Landmark> lms = {{0, Vec3(1, 0, 0)}, {1, Vec3(0, 2, 0)}};
  MapUpdate up;
  up.landmark_displacement = {Vec3(0, 0, 1), Vec3::Zero()};
  up.similarity = Similarity{Rotation(), Vec3(1, 1, 1), 2.0};
  const auto out = apply_map_update(lms, up);
  CHECK(out[0].position == Vec3(3, 1, 3));
  CHECK(out[1].position == Vec3(1, 5, 1));
  up.landmark_displacement.pop_back();
  CHECK_THROWS_AS(apply_map_update(lms, up), std::invalid_argument);
}

TEST_CASE("reprojection sensitivity: 1 mm at 5 m is about 0.1 px") {
  // Single landmark on the optical axis at 5 m; the first-order pixel shift
  // for a lateral camera move dx is fx * dx / depth.
  Scene scene;
  scene.frames = {{{0.0, 0}, Pose::identity()}};
  scene.landmarks = {{0, Vec3(0, 0, 5)}};
  const auto obs = project(scene.camera, Pose::identity(), scene.landmarks[0].position);
  scene.observations = {{0, 0, obs->pixel, obs->depth}};

  const double dx = 1e-3;
  const std::vector<StampedPose> moved = {{{0.0, 0}, Pose::from_translation(Vec3(dx, 0, 0))}};
  const double rms = reprojection_rms(scene, moved, scene.landmarks).rms_px;

  // Central finite difference of the projection as the independent estimate.
  const double h = 1e-6;
  const auto up = project(scene.camera, Pose::from_translation(Vec3(h, 0, 0)).inverse(),
                          scene.landmarks[0].position);
  const auto dn = project(scene.camera, Pose::from_translation(Vec3(-h, 0, 0)).inverse(),
                          scene.landmarks[0].position);
  const double du_dx = (up->pixel.x() - dn->pixel.x()) / (2 * h);
  CHECK(rms == doctest::Approx(std::abs(du_dx) * dx).epsilon(1e-6));
  CHECK(rms == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("reprojection counts points behind the camera") {
  Scene scene;
  scene.frames = {{{0.0, 0}, Pose::identity()}};
  scene.landmarks = {{0, Vec3(0, 0, 5)}, {1, Vec3(0.5, 0, 4)}};
  for (const Landmark& l : scene.landmarks) {
    const auto p = project(scene.camera, Pose::identity(), l.position);
    scene.observations.push_back({0, l.id, p->pixel, p->depth});
  }
  const std::vector<StampedPose> turned = {
      {{0.0, 0}, Pose(Rotation::about_axis(Vec3::UnitY(), oracle::kPi), Vec3::Zero())}};
  const Reprojection r = reprojection_rms(scene, turned, scene.landmarks);
  CHECK(r.behind_camera == 2);
  CHECK(r.used == 0);
}

TEST_CASE("drifted estimate starts on ground truth and drifts") {
  SceneSpec spec;
  spec.shape = PathShape::Mav;
  spec.seed = 7;
  const Scene scene = generate_scene(spec);
  const auto est = drifted_estimate(scene, 0.01, 0.003, 8);
  REQUIRE(est.size() == scene.frames.size());
  CHECK(oracle::pose_diff(est[0].pose, scene.frames[0].pose) == 0.0);
  CHECK((est.back().pose.translation() - scene.frames.back().pose.translation()).norm() > 1e-3);
  const auto zero = drifted_estimate(scene, 0.0, 0.0, 8);
  for (std::size_t i = 0; i < est.size(); ++i) {
    CHECK(oracle::pose_diff(zero[i].pose, scene.frames[i].pose) < 1e-9);
    CHECK(est[i].id.index == scene.frames[i].id.index);
  }
}

TEST_CASE("shape names parse") {
  for (PathShape s :
       {PathShape::ForwardVehicle, PathShape::Mav, PathShape::Line, PathShape::PureRotation}) {
    CHECK(parse_path_shape(to_string(s)) == s);
  }
  CHECK_FALSE(parse_path_shape("spiral"));
}
