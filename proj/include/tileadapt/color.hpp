#pragma once

#include "tileadapt/raster.hpp"

namespace tileadapt {

// sRGB <-> CIELAB conversion, D65 white point, 2-degree observer.
//
// LAB rasters keep the library's [0,1] value contract via fixed affine maps:
//   stored_L = L / 100          L in [0, 100]
//   stored_a = (a + 128) / 255  a in [-128, 127]
//   stored_b = (b + 128) / 255  b in [-128, 127]
// The white point is taken as the image of RGB(1,1,1) under the sRGB->XYZ
// matrix, so pure white maps exactly to L=100, a=b=0.

/// sRGB -> linear -> XYZ -> CIELAB, rescaled per the affine maps above.
Raster rgb_to_lab(const Raster& r);

/// Inverse of rgb_to_lab; output clipped to [0,1].
Raster lab_to_rgb(const Raster& r);

}  // namespace tileadapt
