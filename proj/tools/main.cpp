// tileadapt: adapt aerial imagery tiles from a target domain to the pixel
// statistics of a source domain, and evaluate downstream predictions.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tileadapt/io.hpp"
#include "tileadapt/manifest.hpp"
#include "tileadapt/metrics.hpp"
#include "tileadapt/panel.hpp"
#include "tileadapt/pipeline.hpp"
#include "tileadapt/split.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct RunOpts {
  std::string manifest;
  std::string out_dir;
  std::string timing_log;
  std::string transform_kind = "none";
  double beta = 0.01;
  std::string pda_mode = "whiten";
  double eigenvalue_floor = 1e-8;
  int max_attempts = 25;
  double retention_threshold = 0.9;
  std::uint64_t match_seed = 0;
  bool without_replacement = true;
  bool global_reference = false;
  double split_ratio = 0.8;
  std::uint64_t run_seed = 0;
  int workers = 0;
};

void add_run_options(CLI::App* sub, RunOpts& o, bool with_out) {
  sub->add_option("--manifest", o.manifest, "Dataset manifest (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->set_config("--config", "", "Run configuration (TOML)")
      ->check(CLI::ExistingFile);
  if (with_out)
    sub->add_option("--run.out,--out", o.out_dir, "Output directory")
        ->required();
  sub->add_option("--timing-log", o.timing_log,
                  "Write per-tile wall-clock timings (JSON lines) here; "
                  "timings are diagnostic and not covered by the "
                  "determinism contract");

  sub->add_option("--transform.kind", o.transform_kind,
                  "none|hm|lab-hm|fda|pda")
      ->capture_default_str();
  sub->add_option("--transform.beta", o.beta, "FDA low-frequency window size")
      ->check(CLI::Range(0.0, 0.5))
      ->capture_default_str();
  sub->add_option("--transform.pda_mode", o.pda_mode, "whiten|rotate-only")
      ->capture_default_str();
  sub->add_option("--transform.eigenvalue_floor", o.eigenvalue_floor,
                  "PDA eigenvalue clamp")
      ->capture_default_str();

  sub->add_option("--match.max_attempts", o.max_attempts,
                  "Candidates examined per tile")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--match.retention_threshold", o.retention_threshold,
                  "Entropy retention needed to accept a reference")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--match.seed,--seed", o.match_seed, "Matching seed")
      ->capture_default_str();
  sub->add_option("--match.without_replacement", o.without_replacement,
                  "Sample candidates without replacement")
      ->capture_default_str();
  sub->add_option("--match.global_reference,--global-reference",
                  o.global_reference,
                  "Select one reference on the first tile and reuse it")
      ->expected(0, 1)
      ->capture_default_str();

  sub->add_option("--run.split_ratio", o.split_ratio, "Train fraction")
      ->capture_default_str();
  sub->add_option("--run.seed", o.run_seed, "Run-level seed (splits)")
      ->capture_default_str();
  sub->add_option("--run.workers,--workers", o.workers,
                  "Worker threads (0 = hardware)")
      ->capture_default_str();
}

tileadapt::RunConfig to_config(const RunOpts& o) {
  tileadapt::RunConfig cfg;
  cfg.transform.kind = tileadapt::transform_kind_from_string(o.transform_kind);
  cfg.transform.beta = o.beta;
  cfg.transform.pda_mode = tileadapt::pda_mode_from_string(o.pda_mode);
  cfg.transform.eigenvalue_floor = o.eigenvalue_floor;
  cfg.match.max_attempts = o.max_attempts;
  cfg.match.retention_threshold = o.retention_threshold;
  cfg.match.seed = o.match_seed;
  cfg.match.sample_without_replacement = o.without_replacement;
  cfg.global_reference = o.global_reference;
  cfg.split_ratio = o.split_ratio;
  cfg.seed = o.run_seed;
  cfg.out_dir = o.out_dir;
  cfg.workers = o.workers;
  if (!o.timing_log.empty()) cfg.timing_log = o.timing_log;
  return cfg;
}

int report_outcome(const tileadapt::RunReport& report) {
  for (const auto& o : report.outcomes)
    if (o.failed())
      std::cerr << "tile " << o.tile_id << " failed: " << o.error << "\n";
  std::cerr << "processed " << report.processed << "/"
            << report.outcomes.size() << " tiles (" << report.accepted
            << " accepted, " << report.fallback << " fallback, "
            << report.failed << " failed) in " << report.total_wall_ms
            << " ms\n";
  return report.failed > 0 ? kExitPartial : kExitOk;
}

struct EvalOpts {
  std::string manifest;
  std::string pred_dir;
  std::string label = "None";
  std::vector<std::string> methods;  // LABEL=DIR
  std::string format = "markdown";
  double threshold = 0.5;
  std::string split_path;
  std::string subset = "all";
  bool mask_to_canopy = false;
  bool global_iou_pool = false;
  std::string out_path;
};

int run_eval(const EvalOpts& o) {
  const auto manifest = tileadapt::load_manifest(o.manifest);

  std::vector<std::pair<std::string, std::string>> methods;
  if (!o.pred_dir.empty()) methods.emplace_back(o.label, o.pred_dir);
  for (const auto& m : o.methods) {
    const auto eq = m.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--method expects LABEL=DIR, got '" + m + "'");
    methods.emplace_back(m.substr(0, eq), m.substr(eq + 1));
  }
  if (methods.empty())
    throw std::runtime_error("eval: give --pred or at least one --method");

  tileadapt::EvalOptions opts;
  opts.threshold = o.threshold;
  opts.mask_to_canopy = o.mask_to_canopy;
  opts.global_iou_pool = o.global_iou_pool;
  if (!o.split_path.empty()) opts.split = tileadapt::load_split(o.split_path);
  if (o.subset == "train")
    opts.subset = tileadapt::EvalSubset::Train;
  else if (o.subset == "test")
    opts.subset = tileadapt::EvalSubset::Test;
  else if (o.subset != "all")
    throw std::runtime_error("eval: subset must be all|train|test");

  bool any_missing = false;
  std::vector<tileadapt::EvalReport> reports;
  for (const auto& [label, dir] : methods) {
    opts.label = label;
    auto result = tileadapt::evaluate_run(dir, manifest, opts);
    for (const auto& file : result.missing) {
      std::cerr << "missing prediction: " << dir << "/" << file << "\n";
      any_missing = true;
    }
    reports.push_back(std::move(result.report));
  }

  const std::string text = tileadapt::render_table(
      reports, tileadapt::table_format_from_string(o.format));
  if (o.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(o.out_path);
    out << text;
  }
  return any_missing ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Adapts aerial imagery tiles from a target domain to the pixel "
      "statistics of a source domain and evaluates downstream predictions"};
  app.set_version_flag("--version", "tileadapt 0.1.0");
  app.require_subcommand(1);

  RunOpts adapt_opts;
  auto* adapt = app.add_subcommand(
      "adapt", "Run the adaptation pipeline and write adapted tiles");
  add_run_options(adapt, adapt_opts, /*with_out=*/true);

  RunOpts match_opts;
  auto* match = app.add_subcommand(
      "match", "Dry-run reference matching; JSON-line records to stdout");
  add_run_options(match, match_opts, /*with_out=*/false);

  std::string split_manifest, split_out;
  double split_ratio = 0.8;
  std::uint64_t split_seed = 0;
  auto* split =
      app.add_subcommand("split", "Deterministic train/test split of the "
                                   "manifest's target tiles");
  split->add_option("--manifest", split_manifest)->required()
      ->check(CLI::ExistingFile);
  split->add_option("--ratio", split_ratio, "Train fraction")
      ->capture_default_str();
  split->add_option("--seed", split_seed)->capture_default_str();
  split->add_option("--out", split_out, "Split file (JSON)")->required();

  EvalOpts eval_opts;
  auto* eval = app.add_subcommand(
      "eval", "Score prediction rasters against manifest ground truth");
  eval->add_option("--manifest", eval_opts.manifest)->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--pred", eval_opts.pred_dir, "Prediction directory");
  eval->add_option("--label", eval_opts.label, "Method label for --pred")
      ->capture_default_str();
  eval->add_option("--method", eval_opts.methods,
                   "Additional methods as LABEL=DIR (repeatable)");
  eval->add_option("--format", eval_opts.format, "markdown|csv|json")
      ->capture_default_str();
  eval->add_option("--threshold", eval_opts.threshold,
                   "Cover probability threshold")
      ->capture_default_str();
  eval->add_option("--split", eval_opts.split_path, "Split file (JSON)");
  eval->add_option("--subset", eval_opts.subset, "all|train|test")
      ->capture_default_str();
  eval->add_flag("--mask-to-canopy", eval_opts.mask_to_canopy,
                 "Restrict MAE to ground-truth canopy pixels");
  eval->add_flag("--global-iou-pool", eval_opts.global_iou_pool,
                 "Pool IoU counts across tiles instead of per-tile means");
  eval->add_option("--out", eval_opts.out_path, "Write here (default stdout)");

  std::string panel_tile, panel_manifest, panel_out;
  std::vector<std::string> panel_variants;
  auto* panel = app.add_subcommand(
      "panel", "Compose labelled side-by-side variants of one tile");
  panel->add_option("--tile", panel_tile)->required();
  panel->add_option("--manifest", panel_manifest)->required()
      ->check(CLI::ExistingFile);
  panel->add_option("--variant", panel_variants, "LABEL=PATH (repeatable)")
      ->required();
  panel->add_option("--out", panel_out, "Composite PNG path")->required();

  std::string stats_manifest;
  auto* stats =
      app.add_subcommand("stats", "Per-domain diagnostics as JSON to stdout");
  stats->add_option("--manifest", stats_manifest)->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (adapt->parsed()) {
      const auto manifest = tileadapt::load_manifest(adapt_opts.manifest);
      const auto report =
          tileadapt::run_adaptation(manifest, to_config(adapt_opts));
      return report_outcome(report);
    }
    if (match->parsed()) {
      const auto manifest = tileadapt::load_manifest(match_opts.manifest);
      const auto report =
          tileadapt::match_only(manifest, to_config(match_opts), std::cout);
      return report_outcome(report);
    }
    if (split->parsed()) {
      const auto manifest = tileadapt::load_manifest(split_manifest);
      std::vector<std::string> ids;
      ids.reserve(manifest.target_tiles.size());
      for (const auto& t : manifest.target_tiles) ids.push_back(t.tile_id);
      const auto spec =
          tileadapt::split_dataset(ids, split_ratio, split_seed);
      tileadapt::save_split(spec, split_out);
      std::cerr << "split " << spec.train_ids.size() << " train / "
                << spec.test_ids.size() << " test\n";
      return kExitOk;
    }
    if (eval->parsed()) return run_eval(eval_opts);
    if (panel->parsed()) {
      const auto manifest = tileadapt::load_manifest(panel_manifest);
      std::vector<tileadapt::PanelVariant> variants;
      for (const auto& v : panel_variants) {
        const auto eq = v.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error("--variant expects LABEL=PATH, got '" + v +
                                   "'");
        variants.push_back({v.substr(0, eq), v.substr(eq + 1)});
      }
      tileadapt::render_panel(panel_tile, manifest, variants, panel_out);
      return kExitOk;
    }
    if (stats->parsed()) {
      const auto manifest = tileadapt::load_manifest(stats_manifest);
      std::cout << tileadapt::dataset_stats_json(manifest);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitOk;
}
