#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tileadapt/manifest.hpp"

namespace tileadapt {

struct PanelVariant {
  std::string label;
  std::filesystem::path path;
};

/// Writes a single-row composite of the variants with their labels baked
/// into a header strip, as lossless PNG. All variant images must share
/// dimensions; pixel content is copied verbatim. tile_id must exist in the
/// manifest's target list.
void render_panel(const std::string& tile_id, const DatasetManifest& manifest,
                  const std::vector<PanelVariant>& variants,
                  const std::filesystem::path& out_png);

}  // namespace tileadapt
