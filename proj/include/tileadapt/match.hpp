#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "tileadapt/raster.hpp"
#include "tileadapt/transforms.hpp"

namespace tileadapt {

/// Controls the randomized selective search for a reference tile.
struct MatchConfig {
  int max_attempts = 25;
  double retention_threshold = 0.9;  // tau in [0,1]
  std::uint64_t seed = 0;
  bool sample_without_replacement = true;
};

/// Outcome of one reference search. retention is the ratio of post- to
/// pre-transform image entropy (defined as 1 when the target entropy is 0:
/// nothing can be lost). accepted means retention >= tau; otherwise the
/// best-so-far candidate was kept as a fallback.
struct MatchResult {
  std::string reference_id;
  int attempts = 0;
  double entropy_target = 0.0;
  double entropy_transformed = 0.0;
  double retention = 0.0;
  bool accepted = false;
};

struct PoolTile {
  std::string tile_id;
  Raster image;
};

struct Selection {
  MatchResult result;
  Raster transformed;
};

/// Walks candidates in a seeded random order (truncated at max_attempts),
/// transforms the target against each, and accepts the first whose entropy
/// retention reaches the threshold; when none qualifies the candidate with
/// maximal retention is returned with accepted=false.
///
/// The candidate order is drawn from SplitMix64 seeded with
/// stable_hash64(cfg.seed, target_id), so results are deterministic given
/// (seed, pool order, target id) and independent of scheduling.
/// Transform failures propagate with the candidate id attached.
Selection select_reference(const Raster& target, std::string_view target_id,
                           std::span<const PoolTile> pool,
                           const TransformSpec& transform,
                           const MatchConfig& cfg);

}  // namespace tileadapt
