#include "tileadapt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tileadapt/entropy.hpp"
#include "tileadapt/io.hpp"

namespace tileadapt {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

int effective_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0,n) on a small worker pool. Exceptions must be
// handled inside fn; tile work is independent so scheduling cannot affect
// results.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
  const int pool = std::min<int>(workers, static_cast<int>(n));
  if (pool <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (int t = 0; t < pool; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
        fn(i);
    });
  }
  for (auto& th : threads) th.join();
}

std::vector<PoolTile> load_pool(const DatasetManifest& manifest) {
  std::vector<PoolTile> pool;
  pool.reserve(manifest.source_pool.size());
  for (const auto& tile : manifest.source_pool)
    pool.push_back(PoolTile{tile.tile_id, load_raster(tile.image)});
  return pool;
}

Raster load_target(const TargetTile& tile, int harmonize_factor) {
  Raster img = load_raster(tile.image);
  if (harmonize_factor > 1) img = downsample_mean(img, harmonize_factor);
  return img;
}

// Scores a forced candidate the same way select_reference scores one.
Selection evaluate_candidate(const Raster& target, const PoolTile& candidate,
                             const TransformSpec& transform, double tau) {
  const double entropy_target = image_entropy(target);
  Raster transformed = apply_transform(transform, target, &candidate.image);
  const double entropy_transformed = image_entropy(transformed);
  const double retention =
      entropy_target == 0.0 ? 1.0 : entropy_transformed / entropy_target;
  MatchResult result{candidate.tile_id, 1,         entropy_target,
                     entropy_transformed, retention, retention >= tau};
  return Selection{std::move(result), std::move(transformed)};
}

nlohmann::ordered_json config_echo(const DatasetManifest& manifest,
                                   const RunConfig& config) {
  nlohmann::ordered_json transform;
  transform["kind"] = to_label(config.transform.kind);
  if (config.transform.kind == TransformKind::Fda)
    transform["beta"] = config.transform.beta;
  if (config.transform.kind == TransformKind::Pda) {
    transform["pda_mode"] = to_string(config.transform.pda_mode);
    transform["eigenvalue_floor"] = config.transform.eigenvalue_floor;
  }
  nlohmann::ordered_json match;
  match["max_attempts"] = config.match.max_attempts;
  match["retention_threshold"] = config.match.retention_threshold;
  match["seed"] = config.match.seed;
  match["without_replacement"] = config.match.sample_without_replacement;
  match["global_reference"] = config.global_reference;

  nlohmann::ordered_json echo;
  echo["transform"] = std::move(transform);
  echo["match"] = std::move(match);
  echo["harmonize_factor"] = manifest.harmonize_factor;
  return echo;
}

struct MatchedTiles {
  std::vector<TileOutcome> outcomes;     // manifest order
  std::vector<Raster> adapted;           // empty raster for failed tiles
  double total_wall_ms = 0.0;
};

MatchedTiles run_matching(const DatasetManifest& manifest,
                          const RunConfig& config) {
  if (manifest.target_tiles.empty())
    throw std::runtime_error("run: manifest has no target tiles");
  if (manifest.source_pool.empty())
    throw std::runtime_error("run: empty source pool");

  const auto run_start = Clock::now();
  const std::vector<PoolTile> pool = load_pool(manifest);
  const std::span<const PoolTile> pool_span(pool);

  // With a global reference, the choice is made once on the first tile and
  // then forced on every other tile.
  std::optional<std::size_t> forced_index;
  if (config.global_reference) {
    const Raster first =
        load_target(manifest.target_tiles.front(), manifest.harmonize_factor);
    const Selection sel =
        select_reference(first, manifest.target_tiles.front().tile_id,
                         pool_span, config.transform, config.match);
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (pool[i].tile_id == sel.result.reference_id) forced_index = i;
  }

  const std::size_t n = manifest.target_tiles.size();
  MatchedTiles out;
  out.outcomes.resize(n);
  out.adapted.resize(n);

  parallel_for(n, effective_workers(config.workers), [&](std::size_t i) {
    const TargetTile& tile = manifest.target_tiles[i];
    TileOutcome& outcome = out.outcomes[i];
    outcome.tile_id = tile.tile_id;
    const auto t0 = Clock::now();
    try {
      const Raster img = load_target(tile, manifest.harmonize_factor);
      Selection sel =
          forced_index ? evaluate_candidate(img, pool[*forced_index],
                                            config.transform,
                                            config.match.retention_threshold)
                       : select_reference(img, tile.tile_id, pool_span,
                                          config.transform, config.match);
      outcome.match = std::move(sel.result);
      out.adapted[i] = std::move(sel.transformed);
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
    outcome.wall_ms = elapsed_ms(t0);
  });

  out.total_wall_ms = elapsed_ms(run_start);
  return out;
}

RunReport summarize(MatchedTiles& tiles) {
  RunReport report;
  report.outcomes = std::move(tiles.outcomes);
  for (const auto& o : report.outcomes) {
    if (o.failed()) {
      ++report.failed;
    } else {
      ++report.processed;
      if (o.match.accepted)
        ++report.accepted;
      else
        ++report.fallback;
    }
  }
  report.total_wall_ms = tiles.total_wall_ms;
  return report;
}

void write_timing_log(const RunReport& report,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  for (const auto& o : report.outcomes) {
    nlohmann::ordered_json j;
    j["tile_id"] = o.tile_id;
    j["wall_ms"] = o.wall_ms;
    out << j.dump() << '\n';
  }
  nlohmann::ordered_json total;
  total["total_wall_ms"] = report.total_wall_ms;
  out << total.dump() << '\n';
}

}  // namespace

std::string record_to_json(const TileOutcome& outcome) {
  nlohmann::ordered_json j;
  j["tile_id"] = outcome.tile_id;
  j["reference_id"] = outcome.match.reference_id;
  j["attempts"] = outcome.match.attempts;
  j["entropy_target"] = outcome.match.entropy_target;
  j["entropy_transformed"] = outcome.match.entropy_transformed;
  j["retention"] = outcome.match.retention;
  j["accepted"] = outcome.match.accepted;
  return j.dump();
}

RunReport run_adaptation(const DatasetManifest& manifest,
                         const RunConfig& config) {
  if (config.out_dir.empty())
    throw std::invalid_argument("run_adaptation: output directory not set");

  // Adapted tiles are written as "<stem>.png"; refuse ambiguous manifests.
  std::unordered_set<std::string> stems;
  for (const auto& tile : manifest.target_tiles) {
    if (!stems.insert(tile.image.stem().string()).second)
      throw std::runtime_error(
          "run_adaptation: duplicate target image stem '" +
          tile.image.stem().string() + "'; output names would collide");
  }

  std::filesystem::create_directories(config.out_dir);
  MatchedTiles tiles = run_matching(manifest, config);

  for (std::size_t i = 0; i < manifest.target_tiles.size(); ++i) {
    if (tiles.outcomes[i].failed()) continue;
    const auto out_path =
        config.out_dir /
        (manifest.target_tiles[i].image.stem().string() + ".png");
    try {
      save_raster(tiles.adapted[i], out_path, 8);
    } catch (const std::exception& e) {
      tiles.outcomes[i].error = e.what();
    }
    tiles.adapted[i] = Raster{};  // release pixels early
  }

  RunReport report = summarize(tiles);

  std::ofstream records(config.out_dir / "records.jsonl");
  for (const auto& o : report.outcomes)
    if (!o.failed()) records << record_to_json(o) << '\n';
  records.close();

  nlohmann::ordered_json summary;
  summary["method"] = to_label(config.transform.kind);
  summary["config"] = config_echo(manifest, config);
  summary["tiles_total"] = manifest.target_tiles.size();
  summary["processed"] = report.processed;
  summary["accepted"] = report.accepted;
  summary["fallback"] = report.fallback;
  auto failures = nlohmann::ordered_json::array();
  for (const auto& o : report.outcomes) {
    if (!o.failed()) continue;
    nlohmann::ordered_json f;
    f["tile_id"] = o.tile_id;
    f["error"] = o.error;
    failures.push_back(std::move(f));
  }
  summary["failed"] = std::move(failures);
  std::ofstream summary_out(config.out_dir / "summary.json");
  summary_out << summary.dump(2) << '\n';

  if (config.timing_log) write_timing_log(report, *config.timing_log);
  return report;
}

RunReport match_only(const DatasetManifest& manifest, const RunConfig& config,
                     std::ostream& records_out) {
  MatchedTiles tiles = run_matching(manifest, config);
  RunReport report = summarize(tiles);
  for (const auto& o : report.outcomes)
    if (!o.failed()) records_out << record_to_json(o) << '\n';
  if (config.timing_log) write_timing_log(report, *config.timing_log);
  return report;
}

EvalRunResult evaluate_run(const std::filesystem::path& pred_dir,
                           const DatasetManifest& manifest,
                           const EvalOptions& options) {
  std::unordered_set<std::string> wanted;
  if (options.subset != EvalSubset::All) {
    if (!options.split)
      throw std::invalid_argument(
          "evaluate_run: subset filtering requires a split");
    const auto& ids = options.subset == EvalSubset::Train
                          ? options.split->train_ids
                          : options.split->test_ids;
    wanted.insert(ids.begin(), ids.end());
  }

  EvalRunResult result;
  std::vector<EvalRecord> records;
  std::uint64_t pooled_inter = 0, pooled_union = 0;

  for (const auto& tile : manifest.target_tiles) {
    if (!tile.mask && !tile.height) continue;
    if (options.subset != EvalSubset::All && !wanted.count(tile.tile_id))
      continue;

    EvalRecord rec;
    rec.tile_id = tile.tile_id;

    if (tile.mask) {
      const auto pred_path = pred_dir / (tile.tile_id + ".png");
      if (!std::filesystem::exists(pred_path)) {
        result.missing.push_back(pred_path.filename().string());
      } else {
        const BinaryMask pred =
            binarize(load_raster(pred_path), options.threshold);
        const BinaryMask gt = load_mask(*tile.mask);
        rec.iou = iou(pred, gt);
        for (std::size_t i = 0; i < pred.values.size(); ++i) {
          pooled_inter += (pred.values[i] != 0) && (gt.values[i] != 0);
          pooled_union += (pred.values[i] != 0) || (gt.values[i] != 0);
        }
      }
    }
    if (tile.height) {
      const auto pred_path = pred_dir / (tile.tile_id + ".tif");
      if (!std::filesystem::exists(pred_path)) {
        result.missing.push_back(pred_path.filename().string());
      } else {
        const HeightMap pred = load_height(pred_path);
        HeightMap gt = load_height(*tile.height);
        if (options.mask_to_canopy && tile.mask) {
          const BinaryMask canopy = load_mask(*tile.mask);
          if (canopy.width == gt.width && canopy.height == gt.height) {
            std::vector<std::uint8_t> valid(gt.pixel_count());
            for (std::size_t i = 0; i < valid.size(); ++i)
              valid[i] = gt.is_valid(i) && canopy.values[i] ? 1 : 0;
            gt.valid = std::move(valid);
          }
        }
        rec.mae_m = mae(pred, gt);
      }
    }
    if (rec.iou || rec.mae_m) records.push_back(std::move(rec));
  }

  if (records.empty())
    throw std::runtime_error(
        "evaluate_run: no evaluable tiles (check ground truth and "
        "predictions)");

  result.report = aggregate(std::move(records), options.label);
  if (options.global_iou_pool) {
    result.report.miou =
        pooled_union == 0
            ? 1.0
            : static_cast<double>(pooled_inter) /
                  static_cast<double>(pooled_union);
  }
  return result;
}

std::string dataset_stats_json(const DatasetManifest& manifest) {
  const auto domain_stats = [&](auto&& tiles) {
    nlohmann::ordered_json d;
    d["count"] = tiles.size();
    if (tiles.empty()) return d;

    double e_min = std::numeric_limits<double>::infinity();
    double e_max = -std::numeric_limits<double>::infinity();
    double e_sum = 0.0;
    std::vector<double> sums, sqsums;
    std::uint64_t pixels = 0;
    int channels = -1;
    for (const auto& tile : tiles) {
      const Raster img = load_raster(tile.image);
      if (channels < 0) {
        channels = img.channels;
        sums.assign(channels, 0.0);
        sqsums.assign(channels, 0.0);
      } else if (channels != img.channels) {
        throw std::runtime_error("stats: mixed channel counts in domain");
      }
      const double e = image_entropy(img);
      e_min = std::min(e_min, e);
      e_max = std::max(e_max, e);
      e_sum += e;
      const std::size_t n = img.pixel_count();
      for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < channels; ++c) {
          const double v = img.values[i * channels + c];
          sums[c] += v;
          sqsums[c] += v * v;
        }
      pixels += n;
    }
    nlohmann::ordered_json entropy;
    entropy["min"] = e_min;
    entropy["mean"] = e_sum / static_cast<double>(tiles.size());
    entropy["max"] = e_max;
    d["entropy_bits"] = std::move(entropy);

    std::vector<double> mean(channels), stddev(channels);
    for (int c = 0; c < channels; ++c) {
      mean[c] = sums[c] / static_cast<double>(pixels);
      const double var =
          std::max(0.0, sqsums[c] / static_cast<double>(pixels) -
                            mean[c] * mean[c]);
      stddev[c] = std::sqrt(var);
    }
    d["channel_mean"] = mean;
    d["channel_std"] = stddev;
    return d;
  };

  nlohmann::ordered_json j;
  j["target"] = domain_stats(manifest.target_tiles);
  j["source"] = domain_stats(manifest.source_pool);
  j["harmonize_factor"] = manifest.harmonize_factor;
  return j.dump(2) + "\n";
}

}  // namespace tileadapt
