#include "tileadapt/io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace tileadapt {
namespace {

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  return ext;
}

void check_extension(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext != ".png" && ext != ".tif" && ext != ".tiff")
    throw std::runtime_error("unsupported raster format '" + ext + "' for " +
                             path.string());
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

cv::Mat read_image(const std::filesystem::path& path) {
  check_extension(path);
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (img.empty())
    throw std::runtime_error("cannot read image: " + path.string());
  return img;
}

void write_image(const cv::Mat& img, const std::filesystem::path& path) {
  check_extension(path);
  if (!cv::imwrite(path.string(), img))
    throw std::runtime_error("cannot write image: " + path.string());
}

}  // namespace

Raster load_raster(const std::filesystem::path& path) {
  const cv::Mat img = read_image(path);
  const int channels = img.channels();
  if (channels != 1 && channels != 3)
    throw std::runtime_error("load_raster: unsupported channel count " +
                             std::to_string(channels) + " in " +
                             path.string());
  const int depth = img.depth();
  if (depth != CV_8U && depth != CV_16U)
    throw std::runtime_error("load_raster: unsupported bit depth in " +
                             path.string());
  const double scale = depth == CV_8U ? 1.0 / 255.0 : 1.0 / 65535.0;

  Raster out(img.cols, img.rows, channels);
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      if (channels == 1) {
        const double v = depth == CV_8U
                             ? static_cast<double>(img.at<std::uint8_t>(y, x))
                             : static_cast<double>(img.at<std::uint16_t>(y, x));
        out.at(y, x, 0) = v * scale;
      } else {
        // OpenCV stores 3-channel images as BGR.
        if (depth == CV_8U) {
          const auto& px = img.at<cv::Vec3b>(y, x);
          out.at(y, x, 0) = px[2] * scale;
          out.at(y, x, 1) = px[1] * scale;
          out.at(y, x, 2) = px[0] * scale;
        } else {
          const auto& px = img.at<cv::Vec3w>(y, x);
          out.at(y, x, 0) = px[2] * scale;
          out.at(y, x, 1) = px[1] * scale;
          out.at(y, x, 2) = px[0] * scale;
        }
      }
    }
  }

  const auto meta = sidecar_path(path);
  if (std::filesystem::exists(meta)) {
    std::ifstream in(meta);
    nlohmann::json j;
    in >> j;
    if (j.contains("resolution_m"))
      out.resolution_m = j["resolution_m"].get<double>();
  }
  return out;
}

void save_raster(const Raster& r, const std::filesystem::path& path,
                 int depth) {
  validate(r);
  if (depth != 8 && depth != 16)
    throw std::invalid_argument("save_raster: depth must be 8 or 16");

  const std::int64_t max_value = depth == 8 ? 255 : 65535;
  cv::Mat img(r.height, r.width,
              CV_MAKETYPE(depth == 8 ? CV_8U : CV_16U, r.channels));
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      if (r.channels == 1) {
        const auto q = quantize(r.at(y, x, 0), max_value);
        if (depth == 8)
          img.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(q);
        else
          img.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(q);
      } else {
        const auto r8 = quantize(r.at(y, x, 0), max_value);
        const auto g8 = quantize(r.at(y, x, 1), max_value);
        const auto b8 = quantize(r.at(y, x, 2), max_value);
        if (depth == 8)
          img.at<cv::Vec3b>(y, x) = cv::Vec3b(static_cast<std::uint8_t>(b8),
                                              static_cast<std::uint8_t>(g8),
                                              static_cast<std::uint8_t>(r8));
        else
          img.at<cv::Vec3w>(y, x) = cv::Vec3w(static_cast<std::uint16_t>(b8),
                                              static_cast<std::uint16_t>(g8),
                                              static_cast<std::uint16_t>(r8));
      }
    }
  }
  write_image(img, path);

  if (r.resolution_m) {
    nlohmann::ordered_json j;
    j["resolution_m"] = *r.resolution_m;
    std::ofstream out(sidecar_path(path));
    out << j.dump() << '\n';
  }
}

HeightMap load_height(const std::filesystem::path& path) {
  const cv::Mat img = read_image(path);
  if (img.channels() != 1 || img.depth() != CV_32F)
    throw std::runtime_error(
        "load_height: expected single-channel 32-bit float TIFF: " +
        path.string());

  HeightMap h;
  h.width = img.cols;
  h.height = img.rows;
  h.values_m.resize(h.pixel_count());
  bool any_nodata = false;
  std::vector<std::uint8_t> valid(h.pixel_count(), 1);
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      const float v = img.at<float>(y, x);
      const std::size_t i = static_cast<std::size_t>(y) * h.width + x;
      if (std::isnan(v)) {
        h.values_m[i] = 0.0f;
        valid[i] = 0;
        any_nodata = true;
      } else {
        h.values_m[i] = v;
      }
    }
  }
  if (any_nodata) h.valid = std::move(valid);
  return h;
}

void save_height(const HeightMap& h, const std::filesystem::path& path) {
  cv::Mat img(h.height, h.width, CV_32FC1);
  for (int y = 0; y < h.height; ++y) {
    for (int x = 0; x < h.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * h.width + x;
      img.at<float>(y, x) =
          h.is_valid(i) ? h.values_m[i] : std::nanf("");
    }
  }
  write_image(img, path);
}

BinaryMask load_mask(const std::filesystem::path& path) {
  const cv::Mat img = read_image(path);
  if (img.channels() != 1 || img.depth() != CV_8U)
    throw std::runtime_error(
        "load_mask: expected single-channel 8-bit PNG: " + path.string());

  BinaryMask m;
  m.width = img.cols;
  m.height = img.rows;
  m.values.resize(m.pixel_count());
  for (int y = 0; y < img.rows; ++y)
    for (int x = 0; x < img.cols; ++x)
      m.values[static_cast<std::size_t>(y) * m.width + x] =
          img.at<std::uint8_t>(y, x) >= 128 ? 1 : 0;
  return m;
}

void save_mask(const BinaryMask& m, const std::filesystem::path& path) {
  cv::Mat img(m.height, m.width, CV_8UC1);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      img.at<std::uint8_t>(y, x) =
          m.values[static_cast<std::size_t>(y) * m.width + x] ? 255 : 0;
  write_image(img, path);
}

}  // namespace tileadapt
