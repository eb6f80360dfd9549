#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "posecorr/synth.hpp"
#include "posecorr/trajectory.hpp"

namespace posecorr {

/// Unreadable or unwritable file, or content that cannot be used.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed content; what() reads "file:line: message".
class ParseError : public InputError {
 public:
  ParseError(std::string file, std::size_t line, const std::string& message);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Largest accepted deviation of a parsed quaternion norm from 1.
inline constexpr double kTumQuaternionTolerance = 1e-3;
/// Largest accepted orthogonality drift of a KITTI rotation block.
inline constexpr double kKittiRotationTolerance = 1e-3;

/// Lines "t tx ty tz qx qy qz qw"; '#' starts a comment. Poses come back
/// sorted by stamp, with FrameId::index set to the sorted position.
std::vector<StampedPose> parse_tum(std::istream& in, const std::string& name);
std::vector<StampedPose> read_tum(const std::filesystem::path& path);

/// Shortest round-trip decimal representation for every field.
void write_tum(std::ostream& out, std::span<const StampedPose> poses);
void write_tum(const std::filesystem::path& path, std::span<const StampedPose> poses);

/// Twelve floats per line, row-major [R|t]. Frame k gets stamp k / frame_rate.
std::vector<StampedPose> parse_kitti(std::istream& in, const std::string& name,
                                     double frame_rate = 10.0);
std::vector<StampedPose> read_kitti(const std::filesystem::path& path, double frame_rate = 10.0);

void write_kitti(std::ostream& out, std::span<const StampedPose> poses);
void write_kitti(const std::filesystem::path& path, std::span<const StampedPose> poses);

/// One keyframe per line. Plain integers are frame indices; anything with a
/// '.' or exponent is a timestamp matched within `tolerance`. Returns sorted
/// positions into `frames`.
std::vector<std::size_t> parse_keyframe_index(std::istream& in, const std::string& name,
                                              std::span<const StampedPose> frames,
                                              double tolerance = kDefaultAssocTolerance);
std::vector<std::size_t> read_keyframe_index(const std::filesystem::path& path,
                                             std::span<const StampedPose> frames,
                                             double tolerance = kDefaultAssocTolerance);

/// Writes the frame index of each listed position.
void write_keyframe_index(std::ostream& out, std::span<const StampedPose> frames,
                          std::span<const std::size_t> positions);
void write_keyframe_index(const std::filesystem::path& path, std::span<const StampedPose> frames,
                          std::span<const std::size_t> positions);

/// Scene container; see docs/scene_format.md.
void write_scene(std::ostream& out, const Scene& scene);
void write_scene(const std::filesystem::path& path, const Scene& scene);
Scene parse_scene(std::istream& in, const std::string& name);
Scene read_scene(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace posecorr
