#pragma once

#include <filesystem>

#include "tileadapt/raster.hpp"

namespace tileadapt {

/// Reads an 8/16-bit PNG or TIFF with 1 or 3 channels and maps values into
/// [0,1] (v/255 or v/65535). A sidecar "<path>.json" with {"resolution_m"}
/// is honoured when present.
Raster load_raster(const std::filesystem::path& path);

/// Writes at the requested bit depth (8 or 16); values are quantized with
/// round-half-away-from-zero. Format follows the extension (.png/.tif/.tiff).
/// When the raster carries resolution metadata a "<path>.json" sidecar is
/// written next to it.
void save_raster(const Raster& r, const std::filesystem::path& path,
                 int depth = 8);

/// Heights travel as single-channel 32-bit float TIFF in metres; NaN pixels
/// are read back as nodata.
HeightMap load_height(const std::filesystem::path& path);
void save_height(const HeightMap& h, const std::filesystem::path& path);

/// Masks travel as single-channel 8-bit PNG with values {0,255}.
BinaryMask load_mask(const std::filesystem::path& path);
void save_mask(const BinaryMask& m, const std::filesystem::path& path);

}  // namespace tileadapt
