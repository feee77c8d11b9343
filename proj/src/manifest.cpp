#include "tileadapt/manifest.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace tileadapt {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void require_file(const std::filesystem::path& p, const std::string& what) {
  if (!std::filesystem::exists(p))
    throw std::runtime_error("manifest: missing " + what + ": " + p.string());
}

void check_unique(std::unordered_set<std::string>& seen,
                  const std::string& id, const char* list) {
  if (!seen.insert(id).second)
    throw std::runtime_error(std::string("manifest: duplicate tile_id '") +
                             id + "' in " + list);
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest: invalid JSON in " + path.string() +
                             ": " + e.what());
  }

  const auto base = path.has_parent_path() ? path.parent_path()
                                           : std::filesystem::path(".");
  DatasetManifest m;
  m.harmonize_factor = j.value("harmonize_factor", 1);
  if (m.harmonize_factor < 1)
    throw std::runtime_error("manifest: harmonize_factor must be >= 1");

  std::unordered_set<std::string> target_ids, source_ids;
  for (const auto& t : j.value("target_tiles", nlohmann::json::array())) {
    TargetTile tile;
    tile.tile_id = t.at("tile_id").get<std::string>();
    check_unique(target_ids, tile.tile_id, "target_tiles");
    tile.image = resolve(base, t.at("image").get<std::string>());
    require_file(tile.image, "target image");
    if (t.contains("mask")) {
      tile.mask = resolve(base, t["mask"].get<std::string>());
      require_file(*tile.mask, "mask ground truth");
    }
    if (t.contains("height")) {
      tile.height = resolve(base, t["height"].get<std::string>());
      require_file(*tile.height, "height ground truth");
    }
    m.target_tiles.push_back(std::move(tile));
  }
  for (const auto& s : j.value("source_pool", nlohmann::json::array())) {
    SourceTile tile;
    tile.tile_id = s.at("tile_id").get<std::string>();
    check_unique(source_ids, tile.tile_id, "source_pool");
    tile.image = resolve(base, s.at("image").get<std::string>());
    require_file(tile.image, "source image");
    m.source_pool.push_back(std::move(tile));
  }
  return m;
}

}  // namespace tileadapt
