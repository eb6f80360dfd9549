#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "posecorr/io.hpp"

using namespace posecorr;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = POSECORR_FIXTURES;

struct Run {
  int code;
  std::string err;
};

/// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("posecorr_cli_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

Run posecorrect(const std::string& args, const fs::path& scratch) {
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + POSECORRECT_BIN + "\" " + args + " > /dev/null 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string drop_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

double max_pose_gap(const fs::path& a, const fs::path& b) {
  const auto pa = read_tum(a), pb = read_tum(b);
  REQUIRE(pa.size() == pb.size());
  double worst = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    worst = std::max(worst, oracle::pose_diff(pa[i].pose, pb[i].pose));
  }
  return worst;
}

}  // namespace

TEST_CASE("correct with unchanged keyframes reproduces the input") {
  TempDir d("same");
  const std::string sim = (d / "sim").string();
  REQUIRE(posecorrect("simulate --shape mav --out " + sim, d.path).code == 0);
  for (const char* method : {"proposed", "xyz", "se3-v", "quat"}) {
    const Run r = posecorrect("correct --traj " + sim + "/traj.tum --kf-index " + sim +
                                  "/kf_index.txt --kf-old " + sim + "/kf_old.tum --kf-new " + sim +
                                  "/kf_old.tum --methods " + method + " --out " +
                                  (d / "out").string(),
                              d.path);
    INFO(method, " ", r.err);
    REQUIRE(r.code == 0);
    CHECK(max_pose_gap(d / "out/corrected.tum", fs::path(sim) / "traj.tum") <= 1e-9);
  }
}

TEST_CASE("similarity scene is recovered by the proposed method") {
  TempDir d("similarity");
  const std::string sim = (d / "sim").string();
  REQUIRE(posecorrect("simulate --shape forward --estimate similarity --seed 11 --out " + sim,
                      d.path)
              .code == 0);
  const Run r = posecorrect("correct --traj " + sim + "/traj.tum --kf-index " + sim +
                                "/kf_index.txt --kf-new " + sim + "/kf_new.tum --out " +
                                (d / "out").string(),
                            d.path);
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(max_pose_gap(d / "out/corrected.tum", fs::path(sim) / "gt.tum") <= 1e-9);
  CHECK(fs::exists(d / "out/diagnostics.csv"));
  CHECK(fs::exists(d / "out/effective_config.toml"));
}

TEST_CASE("bad input exits with code 2 and a useful message") {
  TempDir d("bad");
  const std::string sim = (d / "sim").string();
  REQUIRE(posecorrect("simulate --out " + sim, d.path).code == 0);
  const std::string base = "correct --traj " + sim + "/traj.tum --kf-index " + sim + "/kf_index.txt";

  const Run missing = posecorrect(base + " --kf-new " + (d / "nope.tum").string(), d.path);
  CHECK(missing.code == 2);
  CHECK(missing.err.find("nope.tum") != std::string::npos);

  const Run method =
      posecorrect(base + " --kf-new " + sim + "/kf_new.tum --methods bspline", d.path);
  CHECK(method.code == 2);
  CHECK(method.err.find("bspline") != std::string::npos);

  const Run flag = posecorrect("correct --no-such-flag", d.path);
  CHECK(flag.code == 2);

  for (const char* bad : {"bad_fields.tum", "bad_number.tum", "bad_quat.tum"}) {
    const Run r = posecorrect("correct --traj " + (kFixtures / bad).string() + " --kf-index " +
                                  sim + "/kf_index.txt --kf-new " + sim + "/kf_new.tum",
                              d.path);
    INFO(bad, " ", r.err);
    CHECK(r.code == 2);
    CHECK(r.err.find(std::string(bad) + ":") != std::string::npos);
  }
  const Run kitti = posecorrect("evaluate --format kitti --traj " +
                                    (kFixtures / "bad_rotation.kitti").string() + " --gt " +
                                    (kFixtures / "sample.tum").string() + " --kf-index " +
                                    (kFixtures / "kf_index.txt").string(),
                                d.path);
  CHECK(kitti.code == 2);
  CHECK(kitti.err.find("bad_rotation.kitti:3") != std::string::npos);
}

TEST_CASE("evaluate with ground truth as the estimate reports zeros") {
  TempDir d("zero");
  const std::string sim = (d / "sim").string();
  REQUIRE(posecorrect("simulate --shape line --terminal-rels 2 --out " + sim, d.path).code == 0);
  const Run r = posecorrect("evaluate --traj " + sim + "/gt.tum --gt " + sim + "/gt.tum --kf-index " +
                                sim + "/kf_index.txt --out " + (d / "eval").string(),
                            d.path);
  INFO(r.err);
  REQUIRE(r.code == 0);
  std::istringstream report(slurp(d / "eval/report.csv"));
  std::string line;
  std::getline(report, line);
  std::size_t rows = 0;
  while (std::getline(report, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() >= 8);
    for (std::size_t k = 2; k < 8; ++k) {
      INFO(line);
      CHECK(std::abs(std::stod(cells[k])) < 1e-6);
    }
  }
  CHECK(rows == 7);
}

TEST_CASE("thread count does not change results") {
  TempDir d("threads");
  const std::string sim = (d / "sim").string();
  REQUIRE(posecorrect("simulate --shape mav --keyframes 60 --estimate drift --out " + sim, d.path)
              .code == 0);
  const std::string base = "evaluate --traj " + sim + "/traj.tum --gt " + sim +
                           "/gt.tum --kf-index " + sim + "/kf_index.txt";
  REQUIRE(posecorrect(base + " --threads 1 --out " + (d / "t1").string(), d.path).code == 0);
  REQUIRE(posecorrect(base + " --threads 4 --out " + (d / "t4").string(), d.path).code == 0);
  CHECK(drop_last_column(slurp(d / "t1/report.csv")) ==
        drop_last_column(slurp(d / "t4/report.csv")));
  for (const char* m : {"proposed", "xyz", "so3"}) {
    const std::string name = std::string("errors_") + m + ".csv";
    CHECK(slurp(d / ("t1/" + name)) == slurp(d / ("t4/" + name)));
    CHECK(!slurp(d / ("t1/" + name)).empty());
  }
}

TEST_CASE("a saved effective config reproduces the run") {
  TempDir d("config");
  const std::string sim = (d / "sim").string();
  REQUIRE(posecorrect("simulate --estimate drift --out " + sim, d.path).code == 0);
  for (const char* sub : {"evaluate", "correct"}) {
    const std::string first = (d / (std::string(sub) + "1")).string();
    std::string args = std::string(sub) + " --traj " + sim + "/traj.tum --kf-index " + sim +
                       "/kf_index.txt --out " + first;
    args += std::string(sub) == "evaluate" ? " --gt " + sim + "/gt.tum"
                                           : " --kf-new " + sim + "/kf_new.tum";
    REQUIRE(posecorrect(args, d.path).code == 0);
    const std::string second = (d / (std::string(sub) + "2")).string();
    const Run again = posecorrect("--config " + first + "/effective_config.toml " + sub +
                                      " --out " + second,
                                  d.path);
    INFO(sub, " ", again.err);
    REQUIRE(again.code == 0);
    const char* file = std::string(sub) == "evaluate" ? "/errors_proposed.csv" : "/corrected.tum";
    CHECK(slurp(first + file) == slurp(second + file));
  }
}
