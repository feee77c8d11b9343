#pragma once

#include "tileadapt/raster.hpp"

namespace tileadapt {

/// Shannon entropy in bits: -sum over occupied bins of p*log2(p).
/// Zero-probability bins contribute nothing; result is in [0, 8].
/// Throws std::invalid_argument on an empty histogram.
double shannon_entropy(const Histogram& hist);

/// Arithmetic mean of shannon_entropy over the per-channel histograms.
double image_entropy(const Raster& r);

}  // namespace tileadapt
