#include "tileadapt/panel.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <stdexcept>

#include "tileadapt/io.hpp"

namespace tileadapt {
namespace {

constexpr int kHeaderHeight = 28;
constexpr int kGutter = 4;

cv::Mat to_bgr8(const Raster& r) {
  cv::Mat img(r.height, r.width, CV_8UC3);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const double red = r.at(y, x, 0);
      const double green = r.channels == 3 ? r.at(y, x, 1) : red;
      const double blue = r.channels == 3 ? r.at(y, x, 2) : red;
      img.at<cv::Vec3b>(y, x) =
          cv::Vec3b(static_cast<std::uint8_t>(quantize(blue, 255)),
                    static_cast<std::uint8_t>(quantize(green, 255)),
                    static_cast<std::uint8_t>(quantize(red, 255)));
    }
  }
  return img;
}

}  // namespace

void render_panel(const std::string& tile_id, const DatasetManifest& manifest,
                  const std::vector<PanelVariant>& variants,
                  const std::filesystem::path& out_png) {
  if (variants.empty())
    throw std::invalid_argument("render_panel: no variants given");
  const bool known = std::any_of(
      manifest.target_tiles.begin(), manifest.target_tiles.end(),
      [&](const TargetTile& t) { return t.tile_id == tile_id; });
  if (!known)
    throw std::invalid_argument("render_panel: tile '" + tile_id +
                                "' not in manifest");

  std::vector<Raster> images;
  images.reserve(variants.size());
  for (const auto& v : variants) {
    images.push_back(load_raster(v.path));
    if (images.back().width != images.front().width ||
        images.back().height != images.front().height)
      throw std::invalid_argument("render_panel: variant '" + v.label +
                                  "' dimensions differ");
  }

  const int w = images.front().width;
  const int h = images.front().height;
  const int k = static_cast<int>(variants.size());
  const int panel_w = k * w + (k - 1) * kGutter;
  cv::Mat panel(kHeaderHeight + h, panel_w, CV_8UC3,
                cv::Scalar(255, 255, 255));

  for (int i = 0; i < k; ++i) {
    const int x0 = i * (w + kGutter);
    cv::putText(panel, variants[i].label, cv::Point(x0 + 4, 19),
                cv::FONT_HERSHEY_SIMPLEX, 0.5, cv::Scalar(0, 0, 0), 1,
                cv::LINE_8);
    to_bgr8(images[i]).copyTo(
        panel(cv::Rect(x0, kHeaderHeight, w, h)));
  }

  if (!cv::imwrite(out_png.string(), panel))
    throw std::runtime_error("render_panel: cannot write " +
                             out_png.string());
}

}  // namespace tileadapt
