#include "tileadapt/raster.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tileadapt {

void validate(const Raster& r) {
  if (r.width < 1 || r.height < 1)
    throw std::invalid_argument("raster: dimensions must be >= 1, got " +
                                std::to_string(r.width) + "x" +
                                std::to_string(r.height));
  if (r.channels != 1 && r.channels != 3)
    throw std::invalid_argument("raster: channels must be 1 or 3, got " +
                                std::to_string(r.channels));
  const auto expected =
      static_cast<std::size_t>(r.width) * r.height * r.channels;
  if (r.values.size() != expected)
    throw std::invalid_argument("raster: value buffer has " +
                                std::to_string(r.values.size()) +
                                " entries, expected " +
                                std::to_string(expected));
  for (double v : r.values) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw std::invalid_argument("raster: value " + std::to_string(v) +
                                  " outside [0,1]");
  }
}

Raster downsample_mean(const Raster& r, int factor) {
  if (factor <= 0)
    throw std::invalid_argument("downsample_mean: factor must be positive");
  const int out_w = r.width / factor;
  const int out_h = r.height / factor;
  if (out_w < 1 || out_h < 1)
    throw std::invalid_argument(
        "downsample_mean: factor larger than raster dimensions");

  Raster out(out_w, out_h, r.channels);
  const double norm = 1.0 / (static_cast<double>(factor) * factor);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      for (int c = 0; c < r.channels; ++c) {
        double sum = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx)
            sum += r.at(y * factor + dy, x * factor + dx, c);
        out.at(y, x, c) = sum * norm;
      }
    }
  }
  if (r.resolution_m) out.resolution_m = *r.resolution_m * factor;
  return out;
}

Histogram channel_histogram(const Raster& r, int channel) {
  if (channel < 0 || channel >= r.channels)
    throw std::invalid_argument("channel_histogram: channel " +
                                std::to_string(channel) + " out of range");
  Histogram h;
  const std::size_t n = r.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = r.values[i * r.channels + channel];
    ++h.bins[static_cast<std::size_t>(quantize(v, 255))];
  }
  h.total = n;
  return h;
}

}  // namespace tileadapt
