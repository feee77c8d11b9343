#pragma once

#include <array>
#include <string>
#include <string_view>

#include "tileadapt/raster.hpp"

namespace tileadapt {

enum class TransformKind { None, Hm, LabHm, Fda, Pda };
enum class PdaMode { Whiten, RotateOnly };

/// Report/table label: "None", "HM", "LAB-HM", "FDA", "PDA".
const char* to_label(TransformKind kind);

/// Parses "none", "hm", "lab-hm", "fda", "pda" (case-insensitive; the table
/// labels are accepted too).
TransformKind transform_kind_from_string(std::string_view s);

/// Parses "whiten" or "rotate-only".
PdaMode pda_mode_from_string(std::string_view s);
const char* to_string(PdaMode mode);

/// Tagged choice of adaptation method plus its parameters. beta applies to
/// FDA only; pda_mode and eigenvalue_floor apply to PDA only.
struct TransformSpec {
  TransformKind kind = TransformKind::None;
  double beta = 0.01;
  PdaMode pda_mode = PdaMode::Whiten;
  double eigenvalue_floor = 1e-8;
};

/// Per-channel mean plus eigendecomposition of the 3x3 channel covariance.
/// basis[j] is eigenvector j (descending eigenvalue order); each
/// eigenvector's largest-magnitude component is non-negative, ties broken by
/// lowest index. Eigenvalues are clamped below at the configured floor.
struct PixelStats {
  std::array<double, 3> mean{};
  std::array<std::array<double, 3>, 3> basis{};
  std::array<double, 3> eigenvalues{};
};

/// Per channel independently, maps each target value through the
/// empirical-CDF correspondence out = Q_ref(F_tgt(v)). CDF positions are
/// mid-rank (equal values share one position) and the reference quantile
/// function is piecewise linear over its unique values. Dimensions may
/// differ; channel counts must match.
Raster histogram_match(const Raster& target, const Raster& reference);

/// rgb_to_lab both images, histogram_match per LAB channel, lab_to_rgb.
Raster lab_histogram_match(const Raster& target, const Raster& reference);

/// Fourier domain adaptation: per channel, replaces the amplitude spectrum
/// inside a centered low-frequency window with the reference's amplitudes
/// while keeping the target phase everywhere, then inverse-transforms, takes
/// the real part and clips to [0,1].
///
/// With b = floor(beta*min(H,W)) the window covers frequencies
/// |f_row| <= b, |f_col| <= b; b = 0 means an empty window and the exact
/// identity. The window is conjugate-symmetric, so the pre-truncation
/// imaginary residue is at rounding level.
Raster fda(const Raster& target, const Raster& reference, double beta);

/// Mean + eigendecomposition of the channel covariance over all pixels.
/// Requires a 3-channel raster with at least 2 pixels.
PixelStats fit_pixel_stats(const Raster& r, double eigenvalue_floor = 1e-8);

/// Pixel distribution adaptation: whitens each target pixel with the
/// target-fitted stats and re-colors it with the source-fitted stats, so the
/// output cloud carries the source mean and covariance (pre-clipping).
/// RotateOnly skips the eigenvalue scaling and only re-orients the cloud.
Raster pda(const Raster& target, const Raster& source,
           PdaMode mode = PdaMode::Whiten, double eigenvalue_floor = 1e-8);

/// Dispatches on spec.kind. `reference` may be null only for None, which
/// returns the target unchanged.
Raster apply_transform(const TransformSpec& spec, const Raster& target,
                       const Raster* reference);

}  // namespace tileadapt
