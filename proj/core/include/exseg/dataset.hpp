#pragma once
// Synthetic dataset generation on disk: per case an image volume, a ground
// truth mask, simulated extreme points, plus a JSON manifest recording split
// membership and per-case seeds.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "exseg/phantoms.hpp"

namespace exseg {

struct DatasetCase {
  std::string id;
  std::string split;  ///< "train", "val" or "test"
  std::uint64_t seed = 0;
  std::filesystem::path image;
  std::filesystem::path mask;
  std::filesystem::path points;
};

struct DatasetManifest {
  std::vector<DatasetCase> cases;

  std::vector<DatasetCase> split(const std::string& name) const;
};

/// Writes n_train + n_val + n_test cases under out_dir with disjoint per-case
/// seeds derived from `seed`, and a manifest.json listing them. Counts must
/// be >= 1. Returns the manifest with paths resolved against out_dir.
DatasetManifest generate_dataset(int n_train, int n_val, int n_test, const PhantomSpec& base_spec,
                                 std::uint64_t seed, const std::filesystem::path& out_dir);

/// Reads a manifest and resolves the per-case paths against its directory.
DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace exseg
