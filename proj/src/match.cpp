#include "tileadapt/match.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

#include "tileadapt/entropy.hpp"
#include "tileadapt/rng.hpp"

namespace tileadapt {
namespace {

std::vector<std::size_t> candidate_order(std::size_t pool_size,
                                         const MatchConfig& cfg,
                                         std::string_view target_id) {
  SplitMix64 rng(stable_hash64(cfg.seed, target_id));
  const std::size_t attempts =
      std::min<std::size_t>(cfg.max_attempts, cfg.sample_without_replacement
                                                  ? pool_size
                                                  : cfg.max_attempts);
  std::vector<std::size_t> order;
  if (cfg.sample_without_replacement) {
    order.resize(pool_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    order.resize(attempts);
  } else {
    order.reserve(attempts);
    for (std::size_t i = 0; i < attempts; ++i)
      order.push_back(rng.below(pool_size));
  }
  return order;
}

}  // namespace

Selection select_reference(const Raster& target, std::string_view target_id,
                           std::span<const PoolTile> pool,
                           const TransformSpec& transform,
                           const MatchConfig& cfg) {
  if (pool.empty())
    throw std::invalid_argument("select_reference: empty reference pool");
  if (cfg.max_attempts < 1)
    throw std::invalid_argument("select_reference: max_attempts must be >= 1");
  if (cfg.retention_threshold < 0.0 || cfg.retention_threshold > 1.0)
    throw std::invalid_argument(
        "select_reference: retention threshold must lie in [0,1]");

  const double entropy_target = image_entropy(target);
  const auto order = candidate_order(pool.size(), cfg, target_id);

  Selection best;
  best.result.retention = -1.0;
  int attempts = 0;
  for (const std::size_t idx : order) {
    const PoolTile& candidate = pool[idx];
    ++attempts;

    Raster transformed;
    try {
      transformed = apply_transform(transform, target, &candidate.image);
    } catch (const std::exception& e) {
      throw std::runtime_error("select_reference: candidate '" +
                               candidate.tile_id + "': " + e.what());
    }
    const double entropy_transformed = image_entropy(transformed);
    const double retention =
        entropy_target == 0.0 ? 1.0 : entropy_transformed / entropy_target;

    if (retention >= cfg.retention_threshold) {
      MatchResult result{candidate.tile_id, attempts, entropy_target,
                         entropy_transformed, retention, true};
      return Selection{std::move(result), std::move(transformed)};
    }
    if (retention > best.result.retention) {
      best.result = MatchResult{candidate.tile_id, attempts, entropy_target,
                                entropy_transformed, retention, false};
      best.transformed = std::move(transformed);
    }
  }
  best.result.attempts = attempts;
  return best;
}

}  // namespace tileadapt
