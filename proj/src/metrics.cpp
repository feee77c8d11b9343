#include "tileadapt/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tileadapt {
namespace {

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Index of the best and second-best report for one metric column.
struct ColumnMarks {
  int best = -1;
  int second = -1;
};

ColumnMarks column_marks(const std::vector<EvalReport>& reports,
                         bool higher_is_better,
                         std::optional<double> EvalReport::*metric) {
  ColumnMarks marks;
  for (int i = 0; i < static_cast<int>(reports.size()); ++i) {
    const auto& value = reports[i].*metric;
    if (!value) continue;
    auto better = [&](double a, double b) {
      return higher_is_better ? a > b : a < b;
    };
    if (marks.best < 0 || better(*value, *(reports[marks.best].*metric))) {
      marks.second = marks.best;
      marks.best = i;
    } else if (marks.second < 0 ||
               better(*value, *(reports[marks.second].*metric))) {
      marks.second = i;
    }
  }
  return marks;
}

std::string markdown_cell(const std::optional<double>& value, int row,
                          const ColumnMarks& marks) {
  if (!value) return "-";
  const std::string s = fmt4(*value);
  if (row == marks.best) return "**" + s + "**";
  if (row == marks.second) return "<u>" + s + "</u>";
  return s;
}

nlohmann::ordered_json report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["method"] = report.method_label;
  if (report.miou) j["miou"] = *report.miou;
  if (report.mae_m) j["mae_m"] = *report.mae_m;
  auto records = nlohmann::ordered_json::array();
  for (const auto& rec : report.records) {
    nlohmann::ordered_json r;
    r["tile_id"] = rec.tile_id;
    if (rec.iou) r["iou"] = *rec.iou;
    if (rec.mae_m) r["mae_m"] = *rec.mae_m;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  return j;
}

}  // namespace

TableFormat table_format_from_string(std::string_view s) {
  if (s == "markdown" || s == "md") return TableFormat::Markdown;
  if (s == "csv") return TableFormat::Csv;
  if (s == "json") return TableFormat::Json;
  throw std::invalid_argument("unknown table format: " + std::string(s));
}

BinaryMask binarize(const Raster& prob, double threshold) {
  if (prob.channels != 1)
    throw std::invalid_argument("binarize: input must be single-channel");
  BinaryMask m;
  m.width = prob.width;
  m.height = prob.height;
  m.values.resize(prob.pixel_count());
  for (std::size_t i = 0; i < m.values.size(); ++i)
    m.values[i] = prob.values[i] >= threshold ? 1 : 0;
  return m;
}

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw std::invalid_argument("iou: dimension mismatch");
  std::uint64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const bool p = pred.values[i] != 0;
    const bool g = gt.values[i] != 0;
    inter += p && g;
    uni += p || g;
  }
  if (uni == 0) return 1.0;  // both empty: a perfect empty prediction
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double mae(const HeightMap& pred, const HeightMap& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw std::invalid_argument("mae: dimension mismatch");
  double sum = 0.0;
  std::uint64_t count = 0;
  const std::size_t n = pred.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (!pred.is_valid(i) || !gt.is_valid(i)) continue;
    sum += std::abs(static_cast<double>(pred.values_m[i]) -
                    static_cast<double>(gt.values_m[i]));
    ++count;
  }
  if (count == 0) throw std::invalid_argument("mae: no valid pixels");
  return sum / static_cast<double>(count);
}

EvalReport aggregate(std::vector<EvalRecord> records, std::string method_label,
                     std::string data_label) {
  if (records.empty())
    throw std::invalid_argument("aggregate: empty record list");

  double iou_sum = 0.0, mae_sum = 0.0;
  std::size_t iou_n = 0, mae_n = 0;
  for (const auto& rec : records) {
    if (!rec.iou && !rec.mae_m)
      throw std::invalid_argument("aggregate: record '" + rec.tile_id +
                                  "' carries no metric");
    if (rec.iou) {
      iou_sum += *rec.iou;
      ++iou_n;
    }
    if (rec.mae_m) {
      mae_sum += *rec.mae_m;
      ++mae_n;
    }
  }

  EvalReport report;
  report.method_label = std::move(method_label);
  report.data_label = std::move(data_label);
  report.records = std::move(records);
  if (iou_n > 0) report.miou = iou_sum / static_cast<double>(iou_n);
  if (mae_n > 0) report.mae_m = mae_sum / static_cast<double>(mae_n);
  return report;
}

std::string render_table(const std::vector<EvalReport>& reports,
                         TableFormat format) {
  if (reports.empty())
    throw std::invalid_argument("render_table: no reports");

  if (format == TableFormat::Json) {
    if (reports.size() == 1) return report_json(reports.front()).dump(2) + "\n";
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(report_json(r));
    return arr.dump(2) + "\n";
  }

  if (format == TableFormat::Csv) {
    std::string out = "Data,Method,mIoU,MAE(m)\n";
    for (const auto& r : reports) {
      out += r.data_label + "," + r.method_label + ",";
      out += (r.miou ? fmt4(*r.miou) : "") + std::string(",");
      out += (r.mae_m ? fmt4(*r.mae_m) : "") + std::string("\n");
    }
    return out;
  }

  const ColumnMarks iou_marks =
      column_marks(reports, /*higher_is_better=*/true, &EvalReport::miou);
  const ColumnMarks mae_marks =
      column_marks(reports, /*higher_is_better=*/false, &EvalReport::mae_m);

  std::string out = "| Data | Method | mIoU | MAE(m) |\n";
  out += "| --- | --- | --- | --- |\n";
  for (int i = 0; i < static_cast<int>(reports.size()); ++i) {
    const auto& r = reports[i];
    out += "| " + r.data_label + " | " + r.method_label + " | ";
    out += markdown_cell(r.miou, i, iou_marks) + " | ";
    out += markdown_cell(r.mae_m, i, mae_marks) + " |\n";
  }
  return out;
}

}  // namespace tileadapt
