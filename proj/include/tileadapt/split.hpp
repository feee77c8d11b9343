#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tileadapt {

/// Disjoint train/test id lists covering the input set.
struct SplitSpec {
  double ratio = 0.8;
  std::uint64_t seed = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

/// Seeded shuffle of the ids; the first floor(ratio*N) become the train set.
/// ratio must lie strictly inside (0,1).
SplitSpec split_dataset(const std::vector<std::string>& ids, double ratio,
                        std::uint64_t seed);

void save_split(const SplitSpec& split, const std::filesystem::path& path);
SplitSpec load_split(const std::filesystem::path& path);

}  // namespace tileadapt
