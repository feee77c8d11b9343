#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tileadapt {

struct TargetTile {
  std::string tile_id;
  std::filesystem::path image;
  std::optional<std::filesystem::path> mask;    // canopy-cover ground truth
  std::optional<std::filesystem::path> height;  // canopy-height ground truth
};

struct SourceTile {
  std::string tile_id;
  std::filesystem::path image;
};

/// Tile lists for one adaptation run. harmonize_factor > 1 means target
/// tiles are mean-aggregated by that factor before matching.
struct DatasetManifest {
  std::vector<TargetTile> target_tiles;
  std::vector<SourceTile> source_pool;
  int harmonize_factor = 1;
};

/// Loads and validates a manifest: tile_ids unique within each list, every
/// referenced file exists, harmonize_factor >= 1. Relative paths are
/// resolved against the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace tileadapt
