#include "tileadapt/entropy.hpp"

#include <cmath>
#include <stdexcept>

namespace tileadapt {

double shannon_entropy(const Histogram& hist) {
  if (hist.total == 0)
    throw std::invalid_argument("shannon_entropy: empty histogram");
  const double total = static_cast<double>(hist.total);
  double bits = 0.0;
  for (std::uint64_t count : hist.bins) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / total;
    bits -= p * std::log2(p);
  }
  return bits;
}

double image_entropy(const Raster& r) {
  double sum = 0.0;
  for (int c = 0; c < r.channels; ++c)
    sum += shannon_entropy(channel_histogram(r, c));
  return sum / r.channels;
}

}  // namespace tileadapt
