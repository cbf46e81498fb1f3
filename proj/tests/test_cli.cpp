// End-to-end exercises of the command-line tool via std::system. The binary
// path arrives through the EXSEG_BIN environment variable set by CTest.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "exseg/dataset.hpp"
#include "exseg/io.hpp"
#include "exseg/metrics.hpp"
#include "exseg/rng.hpp"

using namespace exseg;
namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* env = std::getenv("EXSEG_BIN");
  REQUIRE_MESSAGE(env != nullptr, "EXSEG_BIN must point at the CLI binary");
  return env;
}

int run(const std::string& args) {
  const std::string cmd = binary() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("exseg_cli_" + std::to_string(Rng{static_cast<std::uint64_t>(
                               std::chrono::steady_clock::now().time_since_epoch().count())}
                                              .next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("usage errors exit with status 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("synth") == 2);                      // missing required --out
  CHECK(run("eval --pred only_one_side.json") == 2);
}

TEST_CASE("runtime errors exit with status 1") {
  TempDir tmp;
  CHECK(run("points --gt " + (tmp.path / "missing").string() + " --out " +
            (tmp.path / "p.json").string()) == 1);
}

TEST_CASE("synth, points, train, predict and eval chain together") {
  TempDir tmp;
  const fs::path data = tmp.path / "data";
  CHECK(run("synth --out " + data.string() +
            " --train 2 --val 1 --test 1 --kind blob --shape 20,20,10 --seed 7") == 0);
  REQUIRE(fs::exists(data / "manifest.json"));

  const DatasetManifest m = read_manifest(data / "manifest.json");
  REQUIRE(m.cases.size() == 4);
  const DatasetCase test_case = m.split("test").at(0);

  const fs::path ckpt = tmp.path / "model.json";
  CHECK(run("train --data " + (data / "manifest.json").string() + " --out " + ckpt.string() +
            " --supervision geodesic --mode gradient --iterations 40 --seed 1") == 0);
  REQUIRE(fs::exists(ckpt));

  const fs::path prob = tmp.path / "prob.json";
  const fs::path pred = tmp.path / "pred.json";
  CHECK(run("predict --image " + test_case.image.string() + " --checkpoint " + ckpt.string() +
            " --out-prob " + prob.string() + " --out-mask " + pred.string()) == 0);

  const fs::path csv = tmp.path / "report.csv";
  const fs::path summary = tmp.path / "report.json";
  CHECK(run("eval --pred " + pred.string() + " --gt " + test_case.mask.string() + " --csv " +
            csv.string() + " --json " + summary.string()) == 0);
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(summary));

  // The CSV carries a header plus one row whose dice matches a direct call.
  std::ifstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "case_id,dice,hd95,precision");
  const double reported = std::stod(row.substr(row.find(',') + 1));
  const double direct = dice(read_volume(pred), read_volume(test_case.mask));
  CHECK(reported == doctest::Approx(direct).epsilon(1e-5));

  // Simulated points for the test mask land on the object.
  const fs::path pts_file = tmp.path / "points.json";
  CHECK(run("points --gt " + test_case.mask.string() + " --out " + pts_file.string() +
            " --seed 3") == 0);
  const Volume mask = read_volume(test_case.mask);
  const ExtremePointSet pts = read_points(pts_file);
  for (const VoxelIndex& v : pts.points) CHECK(mask(v.i, v.j, v.k) == 1.0f);

  // Geodesic extraction over the test image.
  const fs::path paths_json = tmp.path / "paths.json";
  const fs::path paths_mask = tmp.path / "paths_mask.json";
  CHECK(run("geodesic --image " + test_case.image.string() + " --points " + pts_file.string() +
            " --mode gradient --out-paths " + paths_json.string() + " --out-mask " +
            paths_mask.string()) == 0);
  CHECK(fs::exists(paths_json));
  const Volume pmask = read_volume(paths_mask);
  std::size_t on = 0;
  for (float x : pmask.data()) on += x > 0.5f;
  CHECK(on >= 3);  // at least the click voxels

  // Deep mode without a probability volume is a usage error.
  CHECK(run("geodesic --image " + test_case.image.string() + " --points " + pts_file.string() +
            " --mode deep --out-paths " + paths_json.string() + " --out-mask " +
            paths_mask.string()) == 2);
}
