#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace tileadapt {

/// Channel-interleaved, row-major raster with values in [0,1].
/// 8-bit sources are mapped v/255, 16-bit sources v/65535; all integer
/// semantics (binning, quantization) live at the file edges.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;
  std::optional<double> resolution_m;  // metres per pixel, when known

  Raster() = default;
  Raster(int w, int h, int c, double fill = 0.0)
      : width(w),
        height(h),
        channels(c),
        values(static_cast<std::size_t>(w) * h * c, fill) {}

  double& at(int y, int x, int c) {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
  bool same_shape(const Raster& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// Throws std::invalid_argument if the raster violates its invariants
/// (dims >= 1, channels in {1,3}, buffer size, finite values in [0,1]).
void validate(const Raster& r);

/// 256-bin intensity histogram of one channel.
struct Histogram {
  std::array<std::uint64_t, 256> bins{};
  std::uint64_t total = 0;
};

/// Canopy-height plane in metres. An empty `valid` vector means all pixels
/// are valid; otherwise it holds one 0/1 flag per pixel.
struct HeightMap {
  int width = 0;
  int height = 0;
  std::vector<float> values_m;
  std::vector<std::uint8_t> valid;

  bool is_valid(std::size_t i) const { return valid.empty() || valid[i] != 0; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // 0 or 1

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

/// Quantization used at every integer edge: round half away from zero,
/// clamped to [0, max_value].
inline std::int64_t quantize(double v, std::int64_t max_value) {
  const auto q = std::llround(v * static_cast<double>(max_value));
  return std::clamp<std::int64_t>(q, 0, max_value);
}

/// Mean-aggregate factor x factor blocks per channel. Ragged edges (factor
/// not dividing a dimension) are cropped from the bottom/right first.
/// Resolution metadata, when present, is multiplied by the factor.
Raster downsample_mean(const Raster& r, int factor);

/// Bin k counts pixels whose round(v*255) equals k.
Histogram channel_histogram(const Raster& r, int channel);

}  // namespace tileadapt
