#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tileadapt/raster.hpp"

namespace tileadapt {

/// Per-tile metrics; at least one of the two must be present.
struct EvalRecord {
  std::string tile_id;
  std::optional<double> iou;
  std::optional<double> mae_m;
};

/// Per-method aggregate. miou and mae_m are arithmetic means over the
/// records where the metric is present.
struct EvalReport {
  std::string method_label;
  std::string data_label = "Target";
  std::vector<EvalRecord> records;
  std::optional<double> miou;
  std::optional<double> mae_m;
};

enum class TableFormat { Markdown, Csv, Json };
TableFormat table_format_from_string(std::string_view s);

/// Mask is true where value >= threshold. Input must be single-channel.
BinaryMask binarize(const Raster& prob, double threshold = 0.5);

/// |pred AND gt| / |pred OR gt|; 1.0 when both masks are empty.
double iou(const BinaryMask& pred, const BinaryMask& gt);

/// Mean absolute error in metres over pixels valid in both maps.
/// Throws when no valid pixel remains.
double mae(const HeightMap& pred, const HeightMap& gt);

/// Means over present per-record metrics; a metric missing from a record is
/// simply excluded from its mean. Throws on an empty record list.
EvalReport aggregate(std::vector<EvalRecord> records, std::string method_label,
                     std::string data_label = "Target");

/// One row per report with columns Data, Method, mIoU, MAE(m); values
/// rendered to 4 decimals. In markdown the best value per metric column is
/// bold and the second-best underlined (mIoU: higher is better; MAE: lower).
/// Json follows the report schema {method, miou, mae_m, records:[...]}.
std::string render_table(const std::vector<EvalReport>& reports,
                         TableFormat format);

}  // namespace tileadapt
