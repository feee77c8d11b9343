#include "tileadapt/color.hpp"

#include <cmath>
#include <stdexcept>

namespace tileadapt {
namespace {

// sRGB (linear) -> XYZ, D65.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

// White point = image of RGB(1,1,1), so white round-trips exactly.
constexpr double kWhite[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

struct Mat3 {
  double m[3][3];
};

Mat3 invert3(const double a[3][3]) {
  const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  const double inv_det = 1.0 / det;
  Mat3 r;
  r.m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv_det;
  r.m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_det;
  r.m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_det;
  r.m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv_det;
  r.m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_det;
  r.m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_det;
  r.m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv_det;
  r.m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_det;
  r.m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_det;
  return r;
}

const Mat3 kXyzToRgb = invert3(kRgbToXyz);

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) {
  return v <= 0.0031308 ? 12.92 * v
                        : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

constexpr double kDelta = 6.0 / 29.0;

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta
             ? std::cbrt(t)
             : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double u) {
  return u > kDelta ? u * u * u : 3.0 * kDelta * kDelta * (u - 4.0 / 29.0);
}

}  // namespace

Raster rgb_to_lab(const Raster& r) {
  if (r.channels != 3)
    throw std::invalid_argument("rgb_to_lab: input must have 3 channels");

  Raster out(r.width, r.height, 3);
  out.resolution_m = r.resolution_m;
  const std::size_t n = r.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double lin[3] = {srgb_to_linear(r.values[3 * i + 0]),
                           srgb_to_linear(r.values[3 * i + 1]),
                           srgb_to_linear(r.values[3 * i + 2])};
    double xyz[3];
    for (int k = 0; k < 3; ++k)
      xyz[k] = kRgbToXyz[k][0] * lin[0] + kRgbToXyz[k][1] * lin[1] +
               kRgbToXyz[k][2] * lin[2];

    const double fx = lab_f(xyz[0] / kWhite[0]);
    const double fy = lab_f(xyz[1] / kWhite[1]);
    const double fz = lab_f(xyz[2] / kWhite[2]);
    const double L = 116.0 * fy - 16.0;
    const double a = 500.0 * (fx - fy);
    const double b = 200.0 * (fy - fz);

    out.values[3 * i + 0] = L / 100.0;
    out.values[3 * i + 1] = (a + 128.0) / 255.0;
    out.values[3 * i + 2] = (b + 128.0) / 255.0;
  }
  return out;
}

Raster lab_to_rgb(const Raster& r) {
  if (r.channels != 3)
    throw std::invalid_argument("lab_to_rgb: input must have 3 channels");

  Raster out(r.width, r.height, 3);
  out.resolution_m = r.resolution_m;
  const std::size_t n = r.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double L = r.values[3 * i + 0] * 100.0;
    const double a = r.values[3 * i + 1] * 255.0 - 128.0;
    const double b = r.values[3 * i + 2] * 255.0 - 128.0;

    const double fy = (L + 16.0) / 116.0;
    const double fx = fy + a / 500.0;
    const double fz = fy - b / 200.0;
    const double xyz[3] = {kWhite[0] * lab_f_inv(fx), kWhite[1] * lab_f_inv(fy),
                           kWhite[2] * lab_f_inv(fz)};

    for (int k = 0; k < 3; ++k) {
      const double lin = kXyzToRgb.m[k][0] * xyz[0] +
                         kXyzToRgb.m[k][1] * xyz[1] +
                         kXyzToRgb.m[k][2] * xyz[2];
      out.values[3 * i + k] =
          std::clamp(linear_to_srgb(std::clamp(lin, 0.0, 1.0)), 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace tileadapt
