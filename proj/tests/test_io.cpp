#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "oracles.hpp"
#include "posecorr/io.hpp"

using namespace posecorr;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = POSECORR_FIXTURES;

std::vector<StampedPose> tum_from(const std::string& text) {
  std::istringstream in(text);
  return parse_tum(in, "inline");
}

/// Runs `fn` and returns the ParseError it throws.
template <typename Fn>
ParseError expect_parse_error(Fn&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError("", 0, "");
}

}  // namespace

TEST_CASE("tum: single identity line") {
  const auto poses = tum_from("0.0 0 0 0 0 0 0 1\n");
  REQUIRE(poses.size() == 1);
  CHECK(poses[0].id.stamp == 0.0);
  CHECK(poses[0].id.index == 0);
  CHECK(oracle::pose_diff(poses[0].pose, Pose::identity()) == 0.0);
}

TEST_CASE("tum: comment-only file is empty") {
  CHECK(read_tum(kFixtures / "comments_only.tum").empty());
  CHECK(tum_from("").empty());
}

TEST_CASE("tum: quaternion order on disk is qx qy qz qw") {
  const auto poses = read_tum(kFixtures / "quat_order.tum");
  REQUIRE(poses.size() == 2);
  // 90 degrees about +z maps x to y; 90 degrees about +x maps y to z.
  CHECK((poses[0].pose.rotation() * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-15);
  CHECK((poses[1].pose.rotation() * Vec3::UnitY() - Vec3::UnitZ()).norm() < 1e-15);
  CHECK(poses[0].pose.translation() == Vec3(1, 2, 3));
  CHECK(poses[1].pose.translation() == Vec3(-1, 0.5, 2));
}

TEST_CASE("tum: 1000 random poses round-trip exactly") {
  oracle::Rng rng(1);
  std::vector<StampedPose> poses;
  for (int i = 0; i < 1000; ++i) {
    poses.push_back({{1e9 + 0.013 * i, i}, rng.pose(1e3)});
  }
  std::ostringstream out;
  write_tum(out, poses);
  const auto back = tum_from(out.str());
  REQUIRE(back.size() == poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(back[i].id.stamp == poses[i].id.stamp);
    CHECK(oracle::max_abs(back[i].pose.translation() - poses[i].pose.translation()) <= 1e-9);
    CHECK(oracle::max_abs(back[i].pose.rotation().wxyz() - poses[i].pose.rotation().wxyz()) <=
          1e-9);
  }
}

TEST_CASE("tum: fixture file round-trips through disk") {
  const auto poses = read_tum(kFixtures / "sample.tum");
  REQUIRE(poses.size() == 8);
  const fs::path tmp = fs::temp_directory_path() / "posecorr_io_roundtrip.tum";
  write_tum(tmp, poses);
  const auto back = read_tum(tmp);
  fs::remove(tmp);
  REQUIRE(back.size() == poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(oracle::pose_diff(back[i].pose, poses[i].pose) <= 1e-9);
  }
}

TEST_CASE("tum: unsorted stamps are stably sorted") {
  const auto poses = read_tum(kFixtures / "unsorted.tum");
  REQUIRE(poses.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(poses[i].id.index == static_cast<std::int64_t>(i));
    CHECK(poses[i].pose.translation().z() == static_cast<double>(i));
  }
}

TEST_CASE("tum: malformed lines report file and line") {
  const ParseError fields = expect_parse_error([] { read_tum(kFixtures / "bad_fields.tum"); });
  CHECK(fields.line() == 3);
  CHECK(fields.file().find("bad_fields.tum") != std::string::npos);
  CHECK(std::string(fields.what()).find("bad_fields.tum:3:") != std::string::npos);

  CHECK(expect_parse_error([] { read_tum(kFixtures / "bad_number.tum"); }).line() == 2);
  const ParseError quat = expect_parse_error([] { read_tum(kFixtures / "bad_quat.tum"); });
  CHECK(quat.line() == 3);
  CHECK(std::string(quat.what()).find("quaternion") != std::string::npos);

  CHECK_THROWS_AS(tum_from("0 0 0 0 0 0 0 1 extra\n"), ParseError);
  CHECK_THROWS_AS(tum_from("0 0 0 nan 0 0 0 1\n"), ParseError);
  CHECK_THROWS_AS(tum_from("0 0 0 1.5x 0 0 0 1\n"), ParseError);
}

TEST_CASE("tum: quaternions within tolerance are renormalized") {
  const auto poses = tum_from("0 0 0 0 0 0 0 1.0005\n");
  CHECK(std::abs(poses[0].pose.rotation().quaternion().norm() - 1.0) < 1e-15);
}

TEST_CASE("missing files name the path") {
  try {
    read_tum(kFixtures / "does_not_exist.tum");
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("does_not_exist.tum") != std::string::npos);
  }
}

TEST_CASE("kitti: identity and translation-only rows") {
  std::istringstream in("1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 4 0 1 0 -5 0 0 1 6\n");
  const auto poses = parse_kitti(in, "inline");
  REQUIRE(poses.size() == 2);
  CHECK(oracle::pose_diff(poses[0].pose, Pose::identity()) == 0.0);
  CHECK(poses[1].pose.translation() == Vec3(4, -5, 6));
  CHECK(rotation_angle_deg(poses[1].pose.rotation(), Rotation::identity()) == 0.0);
  CHECK(poses[1].id.index == 1);
  CHECK(poses[1].id.stamp == doctest::Approx(0.1));
}

TEST_CASE("kitti: fixture agrees with the TUM fixture and converts losslessly") {
  const auto kitti = read_kitti(kFixtures / "sample.kitti");
  const auto tum = read_tum(kFixtures / "sample.tum");
  REQUIRE(kitti.size() == tum.size());
  for (std::size_t i = 0; i < kitti.size(); ++i) {
    CHECK(kitti[i].id.stamp == doctest::Approx(tum[i].id.stamp).epsilon(1e-12));
    // Row 2 carries rounding drift that orthonormalization removes.
    CHECK(oracle::pose_diff(kitti[i].pose, tum[i].pose) < (i == 2 ? 1e-4 : 1e-9));
    CHECK(orthogonality_error(kitti[i].pose.rotation().matrix()) < 1e-12);
  }

  // KITTI -> TUM -> KITTI.
  std::ostringstream as_tum;
  write_tum(as_tum, kitti);
  const auto via_tum = tum_from(as_tum.str());
  std::ostringstream as_kitti;
  write_kitti(as_kitti, via_tum);
  std::istringstream in(as_kitti.str());
  const auto back = parse_kitti(in, "inline");
  REQUIRE(back.size() == kitti.size());
  for (std::size_t i = 0; i < kitti.size(); ++i) {
    CHECK(oracle::pose_diff(back[i].pose, kitti[i].pose) <= 1e-9);
    CHECK(oracle::pose_diff(via_tum[i].pose, kitti[i].pose) <= 1e-9);
  }
}

TEST_CASE("kitti: malformed rows report the line") {
  CHECK(expect_parse_error([] { read_kitti(kFixtures / "bad_fields.kitti"); }).line() == 2);
  const ParseError rot = expect_parse_error([] { read_kitti(kFixtures / "bad_rotation.kitti"); });
  CHECK(rot.line() == 3);
  CHECK(std::string(rot.what()).find("orthonormal") != std::string::npos);
}

TEST_CASE("keyframe index: indices and timestamps") {
  const auto frames = read_tum(kFixtures / "sample.tum");
  const auto kf = read_keyframe_index(kFixtures / "kf_index.txt", frames);
  CHECK(kf == std::vector<std::size_t>{0, 3, 5});

  const ParseError missing =
      expect_parse_error([&] { read_keyframe_index(kFixtures / "kf_index_missing.txt", frames); });
  CHECK(missing.line() == 3);
  CHECK(std::string(missing.what()).find("42") != std::string::npos);

  std::istringstream stamp_far("0.55\n");
  CHECK_THROWS_AS(parse_keyframe_index(stamp_far, "inline", frames), ParseError);
  std::istringstream dup("1\n0.1\n");
  CHECK_THROWS_AS(parse_keyframe_index(dup, "inline", frames), InputError);
  std::istringstream sci("2e-1\n");
  CHECK(parse_keyframe_index(sci, "inline", frames) == std::vector<std::size_t>{2});

  std::ostringstream out;
  write_keyframe_index(out, frames, kf);
  std::istringstream back(out.str());
  CHECK(parse_keyframe_index(back, "inline", frames) == kf);
}

TEST_CASE("scene container round-trips byte for byte") {
  SceneSpec spec;
  spec.shape = PathShape::Mav;
  spec.keyframes = 5;
  spec.pixel_noise = 0.3;
  spec.seed = 9;
  const Scene scene = generate_scene(spec);
  std::ostringstream a;
  write_scene(a, scene);
  std::istringstream in(a.str());
  const Scene back = parse_scene(in, "inline");
  std::ostringstream b;
  write_scene(b, back);
  CHECK(a.str() == b.str());
  CHECK(back.observations.size() == scene.observations.size());
  CHECK(back.keyframes == scene.keyframes);
  CHECK(reprojection_rms(back, back.frames, back.landmarks).rms_px ==
        reprojection_rms(scene, scene.frames, scene.landmarks).rms_px);
}

TEST_CASE("scene container rejects dangling references") {
  const ParseError e = expect_parse_error([] { read_scene(kFixtures / "bad_scene.txt"); });
  CHECK(e.line() == 11);
  std::istringstream truncated("CAMERA 500 500 320 240 640 480\nPOSES 2\n0 0 0 0 0 0 0 1\n");
  CHECK_THROWS_AS(parse_scene(truncated, "inline"), ParseError);
}

TEST_CASE("format_double is the shortest exact representation") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  oracle::Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-20, 20));
    CHECK(std::stod(format_double(v)) == v);
  }
}
