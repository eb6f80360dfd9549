#include "posecorr/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include <spdlog/spdlog.h>

namespace posecorr {

ParseError::ParseError(std::string file, std::size_t line, const std::string& message)
    : InputError(file + ":" + std::to_string(line) + ": " + message),
      file_(std::move(file)),
      line_(line) {}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw InputError("failed writing " + path.string());
}

/// Whitespace-separated tokens of a line with any '#' comment removed.
std::vector<std::string_view> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  /// Next line with at least one token; false at end of input.
  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(in_, buf_)) {
      ++line_;
      tokens = tokenize(buf_);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(name_, line_, message);
  }

  double to_double(std::string_view tok) const {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      fail("invalid number '" + std::string(tok) + "'");
    }
    return v;
  }

  long long to_integer(std::string_view tok) const {
    long long v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      fail("invalid integer '" + std::string(tok) + "'");
    }
    return v;
  }

  std::size_t to_count(std::string_view tok) const {
    const long long v = to_integer(tok);
    if (v < 0) fail("negative count '" + std::string(tok) + "'");
    return static_cast<std::size_t>(v);
  }

  void expect_fields(const std::vector<std::string_view>& tokens, std::size_t n) const {
    if (tokens.size() != n) {
      fail("expected " + std::to_string(n) + " fields, found " + std::to_string(tokens.size()));
    }
  }

  const std::string& name() const { return name_; }
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string name_;
  std::string buf_;
  std::size_t line_ = 0;
};

StampedPose parse_tum_fields(const LineReader& r, const std::vector<std::string_view>& tok) {
  r.expect_fields(tok, 8);
  std::array<double, 8> v{};
  for (std::size_t i = 0; i < 8; ++i) v[i] = r.to_double(tok[i]);
  const double norm = std::sqrt(v[4] * v[4] + v[5] * v[5] + v[6] * v[6] + v[7] * v[7]);
  if (std::abs(norm - 1.0) > kTumQuaternionTolerance) {
    r.fail("quaternion norm " + format_double(norm) + " is not within " +
           format_double(kTumQuaternionTolerance) + " of 1");
  }
  StampedPose p;
  p.id.stamp = v[0];
  p.pose = Pose(Rotation::from_wxyz(v[7], v[4], v[5], v[6]), Vec3(v[1], v[2], v[3]));
  return p;
}

void write_tum_line(std::ostream& out, const StampedPose& p) {
  const Vec3& t = p.pose.translation();
  const Eigen::Vector4d q = p.pose.rotation().wxyz();
  out << format_double(p.id.stamp) << ' ' << format_double(t.x()) << ' ' << format_double(t.y())
      << ' ' << format_double(t.z()) << ' ' << format_double(q(1)) << ' ' << format_double(q(2))
      << ' ' << format_double(q(3)) << ' ' << format_double(q(0)) << '\n';
}

}  // namespace

std::vector<StampedPose> parse_tum(std::istream& in, const std::string& name) {
  LineReader r(in, name);
  std::vector<StampedPose> poses;
  std::vector<std::string_view> tok;
  while (r.next(tok)) poses.push_back(parse_tum_fields(r, tok));

  const auto by_stamp = [](const StampedPose& a, const StampedPose& b) {
    return a.id.stamp < b.id.stamp;
  };
  if (!std::is_sorted(poses.begin(), poses.end(), by_stamp)) {
    spdlog::warn("{}: timestamps are not monotone, sorting", name);
    std::stable_sort(poses.begin(), poses.end(), by_stamp);
  }
  for (std::size_t i = 0; i < poses.size(); ++i) poses[i].id.index = static_cast<std::int64_t>(i);
  return poses;
}

std::vector<StampedPose> read_tum(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_tum(in, path.string());
}

void write_tum(std::ostream& out, std::span<const StampedPose> poses) {
  for (const StampedPose& p : poses) write_tum_line(out, p);
}

void write_tum(const std::filesystem::path& path, std::span<const StampedPose> poses) {
  auto out = open_out(path);
  write_tum(out, poses);
  check_written(out, path);
}

std::vector<StampedPose> parse_kitti(std::istream& in, const std::string& name,
                                     double frame_rate) {
  if (!(frame_rate > 0.0)) throw InputError("KITTI frame rate must be positive");
  LineReader r(in, name);
  std::vector<StampedPose> poses;
  std::vector<std::string_view> tok;
  while (r.next(tok)) {
    r.expect_fields(tok, 12);
    Mat3 R;
    Vec3 t;
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) R(row, col) = r.to_double(tok[row * 4 + col]);
      t(row) = r.to_double(tok[row * 4 + 3]);
    }
    Mat3 clean;
    if (!orthonormalize(R, kKittiRotationTolerance, clean)) {
      r.fail("rotation block is not orthonormal within " +
             format_double(kKittiRotationTolerance));
    }
    const auto k = static_cast<std::int64_t>(poses.size());
    poses.push_back({{static_cast<double>(k) / frame_rate, k}, Pose(Rotation::from_matrix(clean), t)});
  }
  return poses;
}

std::vector<StampedPose> read_kitti(const std::filesystem::path& path, double frame_rate) {
  auto in = open_in(path);
  return parse_kitti(in, path.string(), frame_rate);
}

void write_kitti(std::ostream& out, std::span<const StampedPose> poses) {
  for (const StampedPose& p : poses) {
    const Mat3 R = p.pose.rotation().matrix();
    const Vec3& t = p.pose.translation();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) out << format_double(R(row, col)) << ' ';
      out << format_double(t(row)) << (row == 2 ? '\n' : ' ');
    }
  }
}

void write_kitti(const std::filesystem::path& path, std::span<const StampedPose> poses) {
  auto out = open_out(path);
  write_kitti(out, poses);
  check_written(out, path);
}

std::vector<std::size_t> parse_keyframe_index(std::istream& in, const std::string& name,
                                              std::span<const StampedPose> frames,
                                              double tolerance) {
  std::unordered_map<std::int64_t, std::size_t> by_index;
  for (std::size_t i = 0; i < frames.size(); ++i) by_index.emplace(frames[i].id.index, i);
  const StampIndex by_stamp(frames);

  LineReader r(in, name);
  std::vector<std::size_t> positions;
  std::vector<std::string_view> tok;
  while (r.next(tok)) {
    r.expect_fields(tok, 1);
    const std::string_view s = tok[0];
    if (s.find_first_of(".eE") != std::string_view::npos) {
      const double stamp = r.to_double(s);
      const auto match = by_stamp.nearest(stamp, tolerance);
      if (!match) {
        r.fail("no frame with timestamp " + std::string(s) + " (within " +
               format_double(tolerance) + " s)");
      }
      positions.push_back(*match);
    } else {
      const long long idx = r.to_integer(s);
      const auto it = by_index.find(idx);
      if (it == by_index.end()) r.fail("no frame with index " + std::string(s));
      positions.push_back(it->second);
    }
  }
  std::sort(positions.begin(), positions.end());
  if (std::adjacent_find(positions.begin(), positions.end()) != positions.end()) {
    throw InputError(name + ": a frame is listed as keyframe more than once");
  }
  return positions;
}

std::vector<std::size_t> read_keyframe_index(const std::filesystem::path& path,
                                             std::span<const StampedPose> frames,
                                             double tolerance) {
  auto in = open_in(path);
  return parse_keyframe_index(in, path.string(), frames, tolerance);
}

void write_keyframe_index(std::ostream& out, std::span<const StampedPose> frames,
                          std::span<const std::size_t> positions) {
  for (std::size_t p : positions) out << frames[p].id.index << '\n';
}

void write_keyframe_index(const std::filesystem::path& path, std::span<const StampedPose> frames,
                          std::span<const std::size_t> positions) {
  auto out = open_out(path);
  write_keyframe_index(out, frames, positions);
  check_written(out, path);
}

void write_scene(std::ostream& out, const Scene& scene) {
  const Camera& c = scene.camera;
  out << "# posecorr scene v1\n";
  out << "CAMERA " << format_double(c.fx) << ' ' << format_double(c.fy) << ' '
      << format_double(c.cx) << ' ' << format_double(c.cy) << ' ' << c.width << ' ' << c.height
      << '\n';
  out << "POSES " << scene.frames.size() << '\n';
  write_tum(out, scene.frames);
  out << "KEYFRAMES " << scene.keyframes.size() << '\n';
  for (std::size_t k : scene.keyframes) out << k << '\n';
  out << "LANDMARKS " << scene.landmarks.size() << '\n';
  for (const Landmark& l : scene.landmarks) {
    out << l.id << ' ' << format_double(l.position.x()) << ' ' << format_double(l.position.y())
        << ' ' << format_double(l.position.z()) << '\n';
  }
  out << "OBSERVATIONS " << scene.observations.size() << '\n';
  for (const Observation& o : scene.observations) {
    out << o.frame << ' ' << o.landmark << ' ' << format_double(o.pixel.x()) << ' '
        << format_double(o.pixel.y()) << ' ' << format_double(o.depth) << '\n';
  }
}

void write_scene(const std::filesystem::path& path, const Scene& scene) {
  auto out = open_out(path);
  write_scene(out, scene);
  check_written(out, path);
}

Scene parse_scene(std::istream& in, const std::string& name) {
  LineReader r(in, name);
  std::vector<std::string_view> tok;
  Scene scene;

  // Reads the "<KEYWORD> <count>" header of the next section.
  const auto section = [&](std::string_view keyword) {
    if (!r.next(tok)) r.fail("missing " + std::string(keyword) + " section");
    if (tok[0] != keyword) {
      r.fail("expected " + std::string(keyword) + ", found '" + std::string(tok[0]) + "'");
    }
    r.expect_fields(tok, 2);
    return r.to_count(tok[1]);
  };
  const auto row = [&](std::size_t fields) {
    if (!r.next(tok)) r.fail("unexpected end of file");
    r.expect_fields(tok, fields);
  };

  if (!r.next(tok) || tok[0] != "CAMERA") r.fail("expected CAMERA");
  r.expect_fields(tok, 7);
  Camera& c = scene.camera;
  c.fx = r.to_double(tok[1]);
  c.fy = r.to_double(tok[2]);
  c.cx = r.to_double(tok[3]);
  c.cy = r.to_double(tok[4]);
  c.width = static_cast<int>(r.to_integer(tok[5]));
  c.height = static_cast<int>(r.to_integer(tok[6]));
  if (!c.valid()) r.fail("invalid camera intrinsics");

  const std::size_t n_poses = section("POSES");
  scene.frames.reserve(n_poses);
  for (std::size_t i = 0; i < n_poses; ++i) {
    row(8);
    StampedPose p = parse_tum_fields(r, tok);
    if (i > 0 && !(p.id.stamp > scene.frames.back().id.stamp)) {
      r.fail("pose timestamps must be strictly increasing");
    }
    p.id.index = static_cast<std::int64_t>(i);
    scene.frames.push_back(p);
  }

  const std::size_t n_kf = section("KEYFRAMES");
  for (std::size_t i = 0; i < n_kf; ++i) {
    row(1);
    const std::size_t k = r.to_count(tok[0]);
    if (k >= n_poses) r.fail("keyframe " + std::to_string(k) + " refers to a nonexistent frame");
    if (!scene.keyframes.empty() && k <= scene.keyframes.back()) {
      r.fail("keyframes must be strictly increasing");
    }
    scene.keyframes.push_back(k);
  }

  const std::size_t n_lm = section("LANDMARKS");
  std::unordered_map<std::size_t, bool> known;
  for (std::size_t i = 0; i < n_lm; ++i) {
    row(4);
    Landmark l;
    l.id = r.to_count(tok[0]);
    l.position = Vec3(r.to_double(tok[1]), r.to_double(tok[2]), r.to_double(tok[3]));
    if (!known.emplace(l.id, true).second) r.fail("duplicate landmark id " + std::to_string(l.id));
    scene.landmarks.push_back(l);
  }

  const std::size_t n_obs = section("OBSERVATIONS");
  for (std::size_t i = 0; i < n_obs; ++i) {
    row(5);
    Observation o;
    o.frame = r.to_count(tok[0]);
    o.landmark = r.to_count(tok[1]);
    o.pixel = Eigen::Vector2d(r.to_double(tok[2]), r.to_double(tok[3]));
    o.depth = r.to_double(tok[4]);
    if (o.frame >= n_poses) r.fail("observation refers to nonexistent frame");
    if (!known.contains(o.landmark)) r.fail("observation refers to unknown landmark");
    scene.observations.push_back(o);
  }

  if (r.next(tok)) r.fail("unexpected content after OBSERVATIONS");
  return scene;
}

Scene read_scene(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_scene(in, path.string());
}

}  // namespace posecorr
