#include "exseg/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "exseg/io.hpp"
#include "exseg/rng.hpp"

namespace exseg {

namespace {
using nlohmann::json;

constexpr std::uint64_t kPointsSalt = 0x5eedf00dULL;
}  // namespace

std::vector<DatasetCase> DatasetManifest::split(const std::string& name) const {
  std::vector<DatasetCase> out;
  for (const DatasetCase& c : cases)
    if (c.split == name) out.push_back(c);
  return out;
}

DatasetManifest generate_dataset(int n_train, int n_val, int n_test, const PhantomSpec& base_spec,
                                 std::uint64_t seed, const std::filesystem::path& out_dir) {
  if (n_train < 1 || n_val < 1 || n_test < 1)
    throw std::invalid_argument("dataset split counts must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + out_dir.string());

  DatasetManifest manifest;
  json jcases = json::array();
  const int total = n_train + n_val + n_test;
  for (int idx = 0; idx < total; ++idx) {
    DatasetCase c;
    char id[16];
    std::snprintf(id, sizeof(id), "case_%03d", idx);
    c.id = id;
    c.split = idx < n_train ? "train" : idx < n_train + n_val ? "val" : "test";
    c.seed = hash_counter(seed, static_cast<std::uint64_t>(idx));

    PhantomSpec spec = base_spec;
    spec.seed = c.seed;
    const Phantom ph = generate_phantom(spec);
    const ExtremePointSet pts = simulate_extreme_points(ph.gt, hash_counter(c.seed, kPointsSalt));

    c.image = out_dir / (c.id + "_image.json");
    c.mask = out_dir / (c.id + "_mask.json");
    c.points = out_dir / (c.id + "_points.json");
    write_volume(c.image, ph.image);
    write_volume(c.mask, ph.gt);
    write_points(c.points, pts);

    json jc;
    jc["id"] = c.id;
    jc["split"] = c.split;
    jc["seed"] = c.seed;
    jc["image"] = c.image.filename().string();
    jc["mask"] = c.mask.filename().string();
    jc["points"] = c.points.filename().string();
    jcases.push_back(jc);
    manifest.cases.push_back(std::move(c));
  }

  json j;
  j["cases"] = jcases;
  const std::filesystem::path manifest_path = out_dir / "manifest.json";
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + manifest_path.string());
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + manifest_path.string());
  return manifest;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": parse error at byte " + std::to_string(e.byte) +
                             ": " + e.what());
  }
  if (!j.contains("cases") || !j.at("cases").is_array())
    throw std::runtime_error(path.string() + ": manifest needs a 'cases' array");

  const std::filesystem::path dir = path.parent_path();
  DatasetManifest manifest;
  for (const json& jc : j.at("cases")) {
    DatasetCase c;
    c.id = jc.at("id").get<std::string>();
    c.split = jc.at("split").get<std::string>();
    c.seed = jc.at("seed").get<std::uint64_t>();
    c.image = dir / jc.at("image").get<std::string>();
    c.mask = dir / jc.at("mask").get<std::string>();
    c.points = dir / jc.at("points").get<std::string>();
    manifest.cases.push_back(std::move(c));
  }
  return manifest;
}

}  // namespace exseg
