#include "tileadapt/transforms.hpp"

#include <Eigen/Dense>
#include <opencv2/core.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tileadapt/color.hpp"

namespace tileadapt {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(c));
  return out;
}

std::vector<double> extract_channel(const Raster& r, int c) {
  std::vector<double> out(r.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = r.values[i * r.channels + c];
  return out;
}

// Unique sorted values of a channel with their mid-rank CDF positions.
struct CdfNodes {
  std::vector<double> values;
  std::vector<double> positions;  // strictly increasing, in (0,1)
};

CdfNodes build_cdf_nodes(std::vector<double> vals) {
  auto& sorted = vals;
  std::sort(sorted.begin(), sorted.end());
  CdfNodes nodes;
  const double n = static_cast<double>(sorted.size());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    nodes.values.push_back(sorted[i]);
    nodes.positions.push_back(static_cast<double>(i + j) / (2.0 * n));
    i = j;
  }
  return nodes;
}

// Piecewise-linear quantile lookup; exact hits return the node value exactly
// so matching an image against itself is the identity.
double quantile_lookup(const CdfNodes& ref, double q) {
  const auto& qs = ref.positions;
  const auto& vs = ref.values;
  auto it = std::lower_bound(qs.begin(), qs.end(), q);
  if (it == qs.end()) return vs.back();
  const std::size_t j = static_cast<std::size_t>(it - qs.begin());
  if (*it == q) return vs[j];
  if (j == 0) return vs.front();
  const double t = (q - qs[j - 1]) / (qs[j] - qs[j - 1]);
  return vs[j - 1] + t * (vs[j] - vs[j - 1]);
}

void match_channel(const std::vector<double>& target_vals,
                   const std::vector<double>& ref_vals, Raster& out, int c) {
  const CdfNodes tgt = build_cdf_nodes(target_vals);
  const CdfNodes ref = build_cdf_nodes(ref_vals);
  for (std::size_t i = 0; i < target_vals.size(); ++i) {
    const double v = target_vals[i];
    const auto it =
        std::lower_bound(tgt.values.begin(), tgt.values.end(), v);
    const std::size_t k = static_cast<std::size_t>(it - tgt.values.begin());
    out.values[i * out.channels + c] = quantile_lookup(ref, tgt.positions[k]);
  }
}

// Centered frequency of an unshifted DFT index: DC -> 0, Nyquist -> -N/2.
int centered_freq(int index, int n) {
  const int c = n / 2;
  return (index + c) % n - c;
}

constexpr double kAmpEps = 1e-300;

void fda_channel(const cv::Mat& target_ch, const cv::Mat& ref_ch, int b,
                 cv::Mat& out_real) {
  cv::Mat ft, fr;
  cv::dft(target_ch, ft, cv::DFT_COMPLEX_OUTPUT);
  cv::dft(ref_ch, fr, cv::DFT_COMPLEX_OUTPUT);

  const int h = target_ch.rows;
  const int w = target_ch.cols;
  for (int y = 0; y < h; ++y) {
    if (std::abs(centered_freq(y, h)) > b) continue;
    for (int x = 0; x < w; ++x) {
      if (std::abs(centered_freq(x, w)) > b) continue;
      auto& t = ft.at<cv::Vec2d>(y, x);
      const auto& s = fr.at<cv::Vec2d>(y, x);
      const double amp_t = std::hypot(t[0], t[1]);
      const double amp_r = std::hypot(s[0], s[1]);
      if (amp_t > kAmpEps) {
        const double scale = amp_r / amp_t;
        t[0] *= scale;
        t[1] *= scale;
      } else {
        t[0] = amp_r;
        t[1] = 0.0;
      }
    }
  }

  cv::Mat inv;
  cv::dft(ft, inv, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_COMPLEX_OUTPUT);
  out_real.create(h, w, CV_64FC1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out_real.at<double>(y, x) = inv.at<cv::Vec2d>(y, x)[0];
}

Eigen::Matrix3d basis_matrix(const PixelStats& s) {
  Eigen::Matrix3d b;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) b(i, j) = s.basis[j][i];
  return b;
}

}  // namespace

const char* to_label(TransformKind kind) {
  switch (kind) {
    case TransformKind::None: return "None";
    case TransformKind::Hm: return "HM";
    case TransformKind::LabHm: return "LAB-HM";
    case TransformKind::Fda: return "FDA";
    case TransformKind::Pda: return "PDA";
  }
  return "None";
}

TransformKind transform_kind_from_string(std::string_view s) {
  const std::string v = lower(s);
  if (v == "none") return TransformKind::None;
  if (v == "hm") return TransformKind::Hm;
  if (v == "lab-hm" || v == "labhm" || v == "lab_hm") return TransformKind::LabHm;
  if (v == "fda") return TransformKind::Fda;
  if (v == "pda") return TransformKind::Pda;
  throw std::invalid_argument("unknown transform kind: " + std::string(s));
}

PdaMode pda_mode_from_string(std::string_view s) {
  const std::string v = lower(s);
  if (v == "whiten") return PdaMode::Whiten;
  if (v == "rotate-only" || v == "rotate_only") return PdaMode::RotateOnly;
  throw std::invalid_argument("unknown pda mode: " + std::string(s));
}

const char* to_string(PdaMode mode) {
  return mode == PdaMode::Whiten ? "whiten" : "rotate-only";
}

Raster histogram_match(const Raster& target, const Raster& reference) {
  if (target.channels != reference.channels)
    throw std::invalid_argument(
        "histogram_match: channel count mismatch (" +
        std::to_string(target.channels) + " vs " +
        std::to_string(reference.channels) + ")");

  Raster out(target.width, target.height, target.channels);
  out.resolution_m = target.resolution_m;
  for (int c = 0; c < target.channels; ++c)
    match_channel(extract_channel(target, c), extract_channel(reference, c),
                  out, c);
  return out;
}

Raster lab_histogram_match(const Raster& target, const Raster& reference) {
  if (target.channels != 3 || reference.channels != 3)
    throw std::invalid_argument(
        "lab_histogram_match: both inputs must have 3 channels");
  Raster matched = histogram_match(rgb_to_lab(target), rgb_to_lab(reference));
  return lab_to_rgb(matched);  // already clipped to [0,1]
}

Raster fda(const Raster& target, const Raster& reference, double beta) {
  if (target.width != reference.width || target.height != reference.height)
    throw std::invalid_argument("fda: dimension mismatch");
  if (target.channels != reference.channels)
    throw std::invalid_argument("fda: channel count mismatch");
  if (beta < 0.0 || beta > 0.5)
    throw std::invalid_argument("fda: beta must lie in [0, 0.5]");

  const int b = static_cast<int>(
      std::floor(beta * std::min(target.width, target.height)));
  if (b == 0) return target;  // empty swap window

  Raster out(target.width, target.height, target.channels);
  out.resolution_m = target.resolution_m;
  cv::Mat tch(target.height, target.width, CV_64FC1);
  cv::Mat rch(target.height, target.width, CV_64FC1);
  cv::Mat result;
  for (int c = 0; c < target.channels; ++c) {
    for (int y = 0; y < target.height; ++y) {
      for (int x = 0; x < target.width; ++x) {
        tch.at<double>(y, x) = target.at(y, x, c);
        rch.at<double>(y, x) = reference.at(y, x, c);
      }
    }
    fda_channel(tch, rch, b, result);
    for (int y = 0; y < target.height; ++y)
      for (int x = 0; x < target.width; ++x)
        out.at(y, x, c) = std::clamp(result.at<double>(y, x), 0.0, 1.0);
  }
  return out;
}

PixelStats fit_pixel_stats(const Raster& r, double eigenvalue_floor) {
  if (r.channels != 3)
    throw std::invalid_argument("fit_pixel_stats: input must have 3 channels");
  const std::size_t n = r.pixel_count();
  if (n < 2)
    throw std::invalid_argument("fit_pixel_stats: need at least 2 pixels");
  if (eigenvalue_floor <= 0.0)
    throw std::invalid_argument("fit_pixel_stats: floor must be positive");

  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d x(r.values[3 * i + 0], r.values[3 * i + 1],
                            r.values[3 * i + 2]);
    sum += x;
    outer += x * x.transpose();
  }
  const Eigen::Vector3d mean = sum / static_cast<double>(n);
  Eigen::Matrix3d cov =
      outer / static_cast<double>(n) - mean * mean.transpose();
  cov = 0.5 * (cov + cov.transpose().eval());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("fit_pixel_stats: eigendecomposition failed");

  PixelStats stats;
  for (int k = 0; k < 3; ++k) stats.mean[k] = mean[k];
  // Eigen returns ascending order; store descending with a fixed sign
  // convention (largest-magnitude component non-negative, lowest index wins
  // ties).
  for (int j = 0; j < 3; ++j) {
    const int src = 2 - j;
    Eigen::Vector3d v = es.eigenvectors().col(src);
    int pivot = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(v[i]) > std::abs(v[pivot])) pivot = i;
    if (v[pivot] < 0.0) v = -v;
    for (int i = 0; i < 3; ++i) stats.basis[j][i] = v[i];
    stats.eigenvalues[j] =
        std::max(es.eigenvalues()[src], eigenvalue_floor);
  }
  return stats;
}

Raster pda(const Raster& target, const Raster& source, PdaMode mode,
           double eigenvalue_floor) {
  const PixelStats st = fit_pixel_stats(target, eigenvalue_floor);
  const PixelStats ss = fit_pixel_stats(source, eigenvalue_floor);

  const Eigen::Matrix3d bt = basis_matrix(st);
  const Eigen::Matrix3d bs = basis_matrix(ss);
  Eigen::Matrix3d map;
  if (mode == PdaMode::Whiten) {
    Eigen::Vector3d scale;
    for (int k = 0; k < 3; ++k)
      scale[k] = std::sqrt(ss.eigenvalues[k] / st.eigenvalues[k]);
    map = bs * scale.asDiagonal() * bt.transpose();
  } else {
    map = bs * bt.transpose();
  }
  const Eigen::Vector3d mu_t(st.mean[0], st.mean[1], st.mean[2]);
  const Eigen::Vector3d mu_s(ss.mean[0], ss.mean[1], ss.mean[2]);

  Raster out(target.width, target.height, 3);
  out.resolution_m = target.resolution_m;
  const std::size_t n = target.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d x(target.values[3 * i + 0],
                            target.values[3 * i + 1],
                            target.values[3 * i + 2]);
    const Eigen::Vector3d y = map * (x - mu_t) + mu_s;
    for (int k = 0; k < 3; ++k)
      out.values[3 * i + k] = std::clamp(y[k], 0.0, 1.0);
  }
  return out;
}

Raster apply_transform(const TransformSpec& spec, const Raster& target,
                       const Raster* reference) {
  if (spec.kind == TransformKind::None) return target;
  if (reference == nullptr)
    throw std::invalid_argument(std::string("apply_transform: ") +
                                to_label(spec.kind) +
                                " requires a reference raster");
  switch (spec.kind) {
    case TransformKind::Hm:
      return histogram_match(target, *reference);
    case TransformKind::LabHm:
      return lab_histogram_match(target, *reference);
    case TransformKind::Fda:
      return fda(target, *reference, spec.beta);
    case TransformKind::Pda:
      return pda(target, *reference, spec.pda_mode, spec.eigenvalue_floor);
    case TransformKind::None:
      break;
  }
  return target;
}

}  // namespace tileadapt
