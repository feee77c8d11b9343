#include <doctest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "test_util.hpp"
#include "tileadapt/io.hpp"
#include "tileadapt/manifest.hpp"
#include "tileadapt/panel.hpp"
#include "tileadapt/pipeline.hpp"
#include "tileadapt/split.hpp"

using namespace tileadapt;

namespace {

// Writes a synthetic dataset and returns the manifest path.
struct Dataset {
  std::filesystem::path manifest;
  std::vector<std::string> target_ids;
};

Dataset make_dataset(const std::filesystem::path& dir, int n_targets,
                     int n_pool, int size = 24, int harmonize_factor = 1,
                     bool with_gt = false) {
  std::filesystem::create_directories(dir / "tiles");
  nlohmann::ordered_json j;
  j["harmonize_factor"] = harmonize_factor;
  j["target_tiles"] = nlohmann::json::array();
  j["source_pool"] = nlohmann::json::array();
  Dataset ds;

  for (int i = 0; i < n_targets; ++i) {
    const std::string id = "t" + std::to_string(i);
    const std::string file = "tiles/" + id + ".png";
    save_raster(oracle::random_raster_8bit(size, size, 3, 10 + i), dir / file);
    nlohmann::ordered_json tile;
    tile["tile_id"] = id;
    tile["image"] = file;
    if (with_gt) {
      BinaryMask m;
      m.width = size;
      m.height = size;
      m.values.resize(m.pixel_count());
      SplitMix64 rng(900 + i);
      for (auto& v : m.values) v = rng.unit() < 0.5 ? 1 : 0;
      save_mask(m, dir / ("tiles/" + id + "_mask.png"));
      tile["mask"] = "tiles/" + id + "_mask.png";

      HeightMap h;
      h.width = size;
      h.height = size;
      h.values_m.resize(h.pixel_count());
      for (auto& v : h.values_m) v = static_cast<float>(20.0 * rng.unit());
      save_height(h, dir / ("tiles/" + id + "_height.tif"));
      tile["height"] = "tiles/" + id + "_height.tif";
    }
    j["target_tiles"].push_back(tile);
    ds.target_ids.push_back(id);
  }
  for (int i = 0; i < n_pool; ++i) {
    const std::string id = "s" + std::to_string(i);
    const std::string file = "tiles/" + id + ".png";
    save_raster(oracle::random_raster_8bit(size, size, 3, 500 + i), dir / file);
    nlohmann::ordered_json tile;
    tile["tile_id"] = id;
    tile["image"] = file;
    j["source_pool"].push_back(tile);
  }

  ds.manifest = dir / "manifest.json";
  std::ofstream(ds.manifest) << j.dump(2);
  return ds;
}

RunConfig base_config(const std::filesystem::path& out_dir) {
  RunConfig cfg;
  cfg.transform.kind = TransformKind::Hm;
  cfg.match.seed = 11;
  cfg.out_dir = out_dir;
  cfg.workers = 2;
  return cfg;
}

}  // namespace

TEST_CASE("manifest loading and validation") {
  test::TempDir tmp;
  const Dataset ds = make_dataset(tmp.path, 2, 2);

  SUBCASE("relative paths resolve against the manifest directory") {
    const DatasetManifest m = load_manifest(ds.manifest);
    REQUIRE(m.target_tiles.size() == 2);
    REQUIRE(m.source_pool.size() == 2);
    CHECK(std::filesystem::exists(m.target_tiles[0].image));
  }

  SUBCASE("duplicate ids are rejected") {
    nlohmann::json j;
    std::ifstream(ds.manifest) >> j;
    j["target_tiles"].push_back(j["target_tiles"][0]);
    const auto bad = tmp.path / "bad.json";
    std::ofstream(bad) << j.dump();
    CHECK_THROWS(load_manifest(bad));
  }

  SUBCASE("missing files are rejected") {
    nlohmann::json j;
    std::ifstream(ds.manifest) >> j;
    j["target_tiles"][0]["image"] = "tiles/absent.png";
    const auto bad = tmp.path / "bad2.json";
    std::ofstream(bad) << j.dump();
    CHECK_THROWS(load_manifest(bad));
  }

  SUBCASE("bad harmonize factor") {
    nlohmann::json j;
    std::ifstream(ds.manifest) >> j;
    j["harmonize_factor"] = 0;
    const auto bad = tmp.path / "bad3.json";
    std::ofstream(bad) << j.dump();
    CHECK_THROWS(load_manifest(bad));
  }
}

TEST_CASE("split_dataset") {
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back("id" + std::to_string(i));

  SUBCASE("10 at 0.8 gives 8/2") {
    const SplitSpec s = split_dataset(ids, 0.8, 1);
    CHECK(s.train_ids.size() == 8);
    CHECK(s.test_ids.size() == 2);
  }

  SUBCASE("same seed, same split; different seed differs") {
    const SplitSpec a = split_dataset(ids, 0.8, 7);
    const SplitSpec b = split_dataset(ids, 0.8, 7);
    CHECK(a.train_ids == b.train_ids);
    CHECK(a.test_ids == b.test_ids);
    bool differs = false;
    for (std::uint64_t seed = 8; seed < 12; ++seed)
      differs |= split_dataset(ids, 0.8, seed).train_ids != a.train_ids;
    CHECK(differs);
  }

  SUBCASE("partition: disjoint and exhaustive") {
    const SplitSpec s = split_dataset(ids, 0.41, 3);
    std::vector<std::string> joined = s.train_ids;
    joined.insert(joined.end(), s.test_ids.begin(), s.test_ids.end());
    std::sort(joined.begin(), joined.end());
    std::vector<std::string> want = ids;
    std::sort(want.begin(), want.end());
    CHECK(joined == want);
  }

  SUBCASE("812 ids at 0.8 give 649/163 under the floor rule") {
    std::vector<std::string> many;
    for (int i = 0; i < 812; ++i) many.push_back(std::to_string(i));
    const SplitSpec s = split_dataset(many, 0.8, 0);
    CHECK(s.train_ids.size() == 649);
    CHECK(s.test_ids.size() == 163);
  }

  SUBCASE("floor stays mathematical where the product is integral") {
    std::vector<std::string> ten(ids);
    CHECK(split_dataset(ten, 0.7, 0).train_ids.size() == 7);
    CHECK(split_dataset(ten, 0.5, 0).train_ids.size() == 5);
  }

  SUBCASE("ratio bounds") {
    CHECK_THROWS_AS(split_dataset(ids, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(split_dataset(ids, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(split_dataset({}, 0.5, 0), std::invalid_argument);
  }

  SUBCASE("save/load round trip") {
    test::TempDir tmp;
    const SplitSpec s = split_dataset(ids, 0.8, 9);
    save_split(s, tmp.path / "split.json");
    const SplitSpec back = load_split(tmp.path / "split.json");
    CHECK(back.train_ids == s.train_ids);
    CHECK(back.test_ids == s.test_ids);
    CHECK(back.seed == 9);
  }
}

TEST_CASE("run_adaptation") {
  test::TempDir tmp;

  SUBCASE("transform None copies harmonized inputs, retention 1") {
    const Dataset ds = make_dataset(tmp.path / "d", 3, 1, 24);
    RunConfig cfg = base_config(tmp.path / "out");
    cfg.transform.kind = TransformKind::None;
    const DatasetManifest m = load_manifest(ds.manifest);
    const RunReport report = run_adaptation(m, cfg);
    CHECK(report.processed == 3);
    CHECK(report.failed == 0);
    for (const auto& o : report.outcomes) {
      CHECK(o.match.retention == 1.0);
      CHECK(o.match.accepted);
    }
    // adapted tiles byte-identical to the inputs (no harmonization here)
    for (int i = 0; i < 3; ++i) {
      const std::string name = "t" + std::to_string(i) + ".png";
      CHECK(test::read_bytes(tmp.path / "d" / "tiles" / name) ==
            test::read_bytes(tmp.path / "out" / name));
    }
  }

  SUBCASE("single-tile pool forces the same reference everywhere") {
    const Dataset ds = make_dataset(tmp.path / "d", 2, 1);
    const RunReport report =
        run_adaptation(load_manifest(ds.manifest), base_config(tmp.path / "o"));
    REQUIRE(report.outcomes.size() == 2);
    CHECK(report.outcomes[0].match.reference_id == "s0");
    CHECK(report.outcomes[1].match.reference_id == "s0");
  }

  SUBCASE("reruns and worker counts are byte-identical") {
    const Dataset ds = make_dataset(tmp.path / "d", 4, 3);
    const DatasetManifest m = load_manifest(ds.manifest);

    RunConfig cfg1 = base_config(tmp.path / "a");
    cfg1.workers = 1;
    run_adaptation(m, cfg1);

    RunConfig cfg2 = base_config(tmp.path / "b");
    cfg2.workers = 3;
    run_adaptation(m, cfg2);

    CHECK(test::same_directory_bytes(tmp.path / "a", tmp.path / "b"));
  }

  SUBCASE("harmonization halves the output dimensions") {
    const Dataset ds = make_dataset(tmp.path / "d", 1, 1, 24, 2);
    run_adaptation(load_manifest(ds.manifest), base_config(tmp.path / "o"));
    const Raster out = load_raster(tmp.path / "o" / "t0.png");
    CHECK(out.width == 12);
    CHECK(out.height == 12);
  }

  SUBCASE("per-tile failures are recorded and skipped") {
    const Dataset ds = make_dataset(tmp.path / "d", 3, 2);
    // corrupt one target after manifest creation
    std::ofstream(tmp.path / "d" / "tiles" / "t1.png", std::ios::trunc)
        << "garbage";
    const RunReport report =
        run_adaptation(load_manifest(ds.manifest), base_config(tmp.path / "o"));
    CHECK(report.processed == 2);
    CHECK(report.failed == 1);
    CHECK(report.outcomes[1].failed());

    // summary records the failure; records.jsonl holds the processed tiles
    std::ifstream summary(tmp.path / "o" / "summary.json");
    nlohmann::json s;
    summary >> s;
    CHECK(s["failed"].size() == 1);
    CHECK(s["failed"][0]["tile_id"] == "t1");
    CHECK(s["processed"] == 2);

    std::ifstream records(tmp.path / "o" / "records.jsonl");
    int lines = 0;
    std::string line;
    while (std::getline(records, line)) ++lines;
    CHECK(lines == 2);
  }

  SUBCASE("global reference pins one candidate for the whole run") {
    const Dataset ds = make_dataset(tmp.path / "d", 3, 4);
    RunConfig cfg = base_config(tmp.path / "o");
    cfg.global_reference = true;
    const RunReport report = run_adaptation(load_manifest(ds.manifest), cfg);
    REQUIRE(report.processed == 3);
    const std::string ref = report.outcomes[0].match.reference_id;
    for (const auto& o : report.outcomes)
      CHECK(o.match.reference_id == ref);
  }

  SUBCASE("timing log is opt-in and off the determinism path") {
    const Dataset ds = make_dataset(tmp.path / "d", 1, 1);
    RunConfig cfg = base_config(tmp.path / "o");
    cfg.timing_log = tmp.path / "timing.jsonl";
    run_adaptation(load_manifest(ds.manifest), cfg);
    CHECK(std::filesystem::exists(tmp.path / "timing.jsonl"));
    CHECK_FALSE(std::filesystem::exists(tmp.path / "o" / "timing.jsonl"));
    std::ifstream in(tmp.path / "timing.jsonl");
    std::string line;
    std::getline(in, line);
    CHECK(line.find("wall_ms") != std::string::npos);
  }

  SUBCASE("duplicate stems are refused upfront") {
    const Dataset ds = make_dataset(tmp.path / "d", 2, 1);
    nlohmann::json j;
    std::ifstream(ds.manifest) >> j;
    std::filesystem::create_directories(tmp.path / "d" / "other");
    std::filesystem::copy_file(tmp.path / "d" / "tiles" / "t0.png",
                               tmp.path / "d" / "other" / "t1.png");
    j["target_tiles"][0]["image"] = "other/t1.png";  // stem collides with t1
    const auto path = tmp.path / "d" / "m2.json";
    std::ofstream(path) << j.dump();
    CHECK_THROWS(run_adaptation(load_manifest(path), base_config(tmp.path / "o")));
  }

  SUBCASE("empty pool aborts") {
    const Dataset ds = make_dataset(tmp.path / "d", 1, 0);
    CHECK_THROWS(
        run_adaptation(load_manifest(ds.manifest), base_config(tmp.path / "o")));
  }
}

TEST_CASE("match_only streams the same records") {
  test::TempDir tmp;
  const Dataset ds = make_dataset(tmp.path / "d", 3, 2);
  const DatasetManifest m = load_manifest(ds.manifest);

  std::ostringstream a, b;
  RunConfig cfg = base_config(tmp.path / "unused");
  cfg.workers = 1;
  match_only(m, cfg, a);
  cfg.workers = 8;
  match_only(m, cfg, b);
  CHECK(a.str() == b.str());
  CHECK(std::count(a.str().begin(), a.str().end(), '\n') == 3);
  CHECK(a.str().find("\"tile_id\":\"t0\"") != std::string::npos);
}

TEST_CASE("evaluate_run") {
  test::TempDir tmp;
  const Dataset ds = make_dataset(tmp.path / "d", 3, 1, 16, 1, true);
  const DatasetManifest m = load_manifest(ds.manifest);
  const auto pred_dir = tmp.path / "pred";
  std::filesystem::create_directories(pred_dir);

  // perfect predictions: copy masks as probability rasters, heights verbatim
  for (const auto& tile : m.target_tiles) {
    const BinaryMask gt = load_mask(*tile.mask);
    Raster prob(gt.width, gt.height, 1);
    for (std::size_t i = 0; i < gt.values.size(); ++i)
      prob.values[i] = gt.values[i] ? 1.0 : 0.0;
    save_raster(prob, pred_dir / (tile.tile_id + ".png"));
    save_height(load_height(*tile.height), pred_dir / (tile.tile_id + ".tif"));
  }

  SUBCASE("perfect predictions score 1.0 / 0.0") {
    EvalOptions opts;
    opts.label = "HM";
    const EvalRunResult r = evaluate_run(pred_dir, m, opts);
    CHECK(r.missing.empty());
    CHECK(*r.report.miou == 1.0);
    CHECK(*r.report.mae_m == 0.0);
    CHECK(r.report.records.size() == 3);
  }

  SUBCASE("constant height offset shows up as MAE") {
    for (const auto& tile : m.target_tiles) {
      HeightMap h = load_height(*tile.height);
      for (auto& v : h.values_m) v += 0.25f;
      save_height(h, pred_dir / (tile.tile_id + ".tif"));
    }
    const EvalRunResult r = evaluate_run(pred_dir, m, EvalOptions{});
    CHECK(*r.report.mae_m == doctest::Approx(0.25).epsilon(1e-6));
  }

  SUBCASE("missing predictions are listed") {
    std::filesystem::remove(pred_dir / "t1.png");
    const EvalRunResult r = evaluate_run(pred_dir, m, EvalOptions{});
    REQUIRE(r.missing.size() == 1);
    CHECK(r.missing[0] == "t1.png");
    // t1 still contributes its height metric
    CHECK(r.report.records.size() == 3);
  }

  SUBCASE("subset filtering follows the split") {
    EvalOptions opts;
    opts.split = split_dataset(ds.target_ids, 0.67, 5);
    opts.subset = EvalSubset::Test;
    const EvalRunResult r = evaluate_run(pred_dir, m, opts);
    CHECK(r.report.records.size() == 1);

    opts.subset = EvalSubset::Train;
    CHECK(evaluate_run(pred_dir, m, opts).report.records.size() == 2);
  }

  SUBCASE("global iou pool equals per-tile ratio built from counts") {
    EvalOptions opts;
    opts.global_iou_pool = true;
    const EvalRunResult r = evaluate_run(pred_dir, m, opts);
    CHECK(*r.report.miou == 1.0);  // perfect predictions pool to 1 as well
  }

  SUBCASE("mask_to_canopy restricts MAE to canopy pixels") {
    // predictions correct on canopy, wrong elsewhere
    for (const auto& tile : m.target_tiles) {
      const BinaryMask canopy = load_mask(*tile.mask);
      HeightMap h = load_height(*tile.height);
      for (std::size_t i = 0; i < h.values_m.size(); ++i)
        if (!canopy.values[i]) h.values_m[i] += 5.0f;
      save_height(h, pred_dir / (tile.tile_id + ".tif"));
    }
    EvalOptions strict;
    strict.mask_to_canopy = true;
    CHECK(*evaluate_run(pred_dir, m, strict).report.mae_m ==
          doctest::Approx(0.0));
    CHECK(*evaluate_run(pred_dir, m, EvalOptions{}).report.mae_m > 1.0);
  }
}

TEST_CASE("dataset stats") {
  test::TempDir tmp;

  SUBCASE("constant tiles have zero entropy everywhere") {
    std::filesystem::create_directories(tmp.path / "tiles");
    nlohmann::ordered_json j;
    j["target_tiles"] = nlohmann::json::array();
    j["source_pool"] = nlohmann::json::array();
    for (int i = 0; i < 2; ++i) {
      save_raster(Raster(8, 8, 3, 0.5),
                  tmp.path / ("tiles/c" + std::to_string(i) + ".png"));
      nlohmann::ordered_json tile;
      tile["tile_id"] = "c" + std::to_string(i);
      tile["image"] = "tiles/c" + std::to_string(i) + ".png";
      j["source_pool"].push_back(tile);
    }
    std::ofstream(tmp.path / "m.json") << j.dump();
    const std::string text = dataset_stats_json(load_manifest(tmp.path / "m.json"));
    const auto stats = nlohmann::json::parse(text);
    CHECK(stats["source"]["count"] == 2);
    CHECK(stats["target"]["count"] == 0);
    CHECK(stats["source"]["entropy_bits"]["min"] == 0.0);
    CHECK(stats["source"]["entropy_bits"]["max"] == 0.0);
  }

  SUBCASE("channel means match a direct recomputation") {
    const Dataset ds = make_dataset(tmp.path / "d", 2, 1);
    const DatasetManifest m = load_manifest(ds.manifest);
    const auto stats =
        nlohmann::json::parse(dataset_stats_json(m));
    CHECK(stats["target"]["count"] == 2);

    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& tile : m.target_tiles) {
      const Raster img = load_raster(tile.image);
      for (std::size_t i = 0; i < img.pixel_count(); ++i)
        sum += img.values[3 * i];  // channel 0
      n += img.pixel_count();
    }
    CHECK(stats["target"]["channel_mean"][0].get<double>() ==
          doctest::Approx(sum / n).epsilon(1e-9));
  }
}

TEST_CASE("render_panel") {
  test::TempDir tmp;
  const Dataset ds = make_dataset(tmp.path / "d", 1, 1, 20);
  const DatasetManifest m = load_manifest(ds.manifest);
  const auto tile_png = tmp.path / "d" / "tiles" / "t0.png";

  SUBCASE("one variant is the image plus a caption strip") {
    render_panel("t0", m, {{"None", tile_png}}, tmp.path / "panel.png");
    const Raster panel = load_raster(tmp.path / "panel.png");
    const Raster src = load_raster(tile_png);
    CHECK(panel.width == src.width);
    CHECK(panel.height == src.height + 28);
    // content region equals the source exactly
    for (int y = 0; y < src.height; ++y)
      for (int x = 0; x < src.width; ++x)
        for (int c = 0; c < 3; ++c)
          CHECK(panel.at(y + 28, x, c) == src.at(y, x, c));
  }

  SUBCASE("k variants lay out with fixed gutters") {
    render_panel("t0", m,
                 {{"A", tile_png}, {"B", tile_png}, {"C", tile_png}},
                 tmp.path / "panel3.png");
    const Raster panel = load_raster(tmp.path / "panel3.png");
    CHECK(panel.width == 3 * 20 + 2 * 4);
    const Raster src = load_raster(tile_png);
    // second column starts after one image width plus a gutter
    for (int y = 0; y < src.height; ++y)
      for (int x = 0; x < src.width; ++x)
        CHECK(panel.at(y + 28, 24 + x, 0) == src.at(y, x, 0));
  }

  SUBCASE("errors") {
    CHECK_THROWS(render_panel("nope", m, {{"A", tile_png}}, tmp.path / "x.png"));
    save_raster(oracle::random_raster_8bit(10, 10, 3, 1), tmp.path / "small.png");
    CHECK_THROWS(render_panel(
        "t0", m, {{"A", tile_png}, {"B", tmp.path / "small.png"}},
        tmp.path / "y.png"));
    CHECK_THROWS(render_panel("t0", m, {}, tmp.path / "z.png"));
  }
}
