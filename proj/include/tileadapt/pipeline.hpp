#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tileadapt/manifest.hpp"
#include "tileadapt/match.hpp"
#include "tileadapt/metrics.hpp"
#include "tileadapt/split.hpp"
#include "tileadapt/transforms.hpp"

namespace tileadapt {

/// Everything a batch run needs. workers = 0 picks the hardware concurrency.
/// With global_reference set, one reference is selected on the first target
/// tile and reused for the whole set.
struct RunConfig {
  TransformSpec transform;
  MatchConfig match;
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  int workers = 0;
  bool global_reference = false;
  std::optional<std::filesystem::path> timing_log;
};

struct TileOutcome {
  std::string tile_id;
  MatchResult match;
  double wall_ms = 0.0;  // diagnostic only, never serialized into reports
  std::string error;     // non-empty when the tile failed and was skipped

  bool failed() const { return !error.empty(); }
};

struct RunReport {
  std::vector<TileOutcome> outcomes;  // manifest order
  int processed = 0;
  int accepted = 0;
  int fallback = 0;
  int failed = 0;
  double total_wall_ms = 0.0;
};

/// Stable JSON-line form of a processed tile's match record.
std::string record_to_json(const TileOutcome& outcome);

/// Runs the full adaptation: per target tile, harmonize resolution, select a
/// reference from the pool, write the adapted tile as "<stem>.png" into
/// out_dir, then write records.jsonl and summary.json. Per-tile failures are
/// recorded and skipped. The bytes written are fully determined by
/// (manifest, config) and independent of worker count; timing goes to the
/// optional timing_log only.
RunReport run_adaptation(const DatasetManifest& manifest,
                         const RunConfig& config);

/// Dry-run matching: same records as run_adaptation, streamed as JSON lines,
/// nothing written to disk.
RunReport match_only(const DatasetManifest& manifest, const RunConfig& config,
                     std::ostream& records_out);

enum class EvalSubset { All, Train, Test };

struct EvalOptions {
  std::string label = "None";
  double threshold = 0.5;
  bool mask_to_canopy = false;  // restrict MAE to ground-truth canopy pixels
  bool global_iou_pool = false;  // pool intersections/unions across tiles
  std::optional<SplitSpec> split;
  EvalSubset subset = EvalSubset::All;
};

struct EvalRunResult {
  EvalReport report;
  std::vector<std::string> missing;  // prediction files that were not found
};

/// Scores prediction rasters named by tile_id stem ("<tile_id>.png" cover
/// probabilities, "<tile_id>.tif" heights) against the manifest's ground
/// truth. Tiles without ground truth are ignored; missing prediction files
/// are listed explicitly and their tiles skipped.
EvalRunResult evaluate_run(const std::filesystem::path& pred_dir,
                           const DatasetManifest& manifest,
                           const EvalOptions& options);

/// Pre-run diagnostics as JSON: per-domain tile counts, image-entropy
/// min/mean/max, and per-channel mean/std.
std::string dataset_stats_json(const DatasetManifest& manifest);

}  // namespace tileadapt
