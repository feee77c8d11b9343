// Python bindings: numpy float64 arrays (H,W) or (H,W,C) with values in
// [0,1] stand in for rasters; heights are float64 (H,W) with NaN as nodata;
// masks are bool (H,W).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tileadapt/color.hpp"
#include "tileadapt/entropy.hpp"
#include "tileadapt/io.hpp"
#include "tileadapt/match.hpp"
#include "tileadapt/metrics.hpp"
#include "tileadapt/split.hpp"
#include "tileadapt/transforms.hpp"

namespace py = pybind11;
using tileadapt::Raster;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

Raster to_raster(const DoubleArray& a) {
  if (a.ndim() != 2 && a.ndim() != 3)
    throw std::invalid_argument("expected a (H,W) or (H,W,C) array");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 2 ? 1 : static_cast<int>(a.shape(2));
  Raster r(w, h, c);
  std::memcpy(r.values.data(), a.data(), r.values.size() * sizeof(double));
  tileadapt::validate(r);
  return r;
}

py::array to_array(const Raster& r) {
  py::array_t<double> a({static_cast<py::ssize_t>(r.height),
                         static_cast<py::ssize_t>(r.width),
                         static_cast<py::ssize_t>(r.channels)});
  std::memcpy(a.mutable_data(), r.values.data(),
              r.values.size() * sizeof(double));
  return a;
}

tileadapt::HeightMap to_height(const DoubleArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a (H,W) array");
  tileadapt::HeightMap h;
  h.height = static_cast<int>(a.shape(0));
  h.width = static_cast<int>(a.shape(1));
  const auto n = h.pixel_count();
  h.values_m.resize(n);
  std::vector<std::uint8_t> valid(n, 1);
  bool any_nodata = false;
  const double* src = a.data();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(src[i])) {
      valid[i] = 0;
      any_nodata = true;
      h.values_m[i] = 0.0f;
    } else {
      h.values_m[i] = static_cast<float>(src[i]);
    }
  }
  if (any_nodata) h.valid = std::move(valid);
  return h;
}

tileadapt::BinaryMask to_mask(const BoolArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a (H,W) array");
  tileadapt::BinaryMask m;
  m.height = static_cast<int>(a.shape(0));
  m.width = static_cast<int>(a.shape(1));
  m.values.resize(m.pixel_count());
  const bool* src = a.data();
  for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = src[i];
  return m;
}

tileadapt::TransformSpec make_spec(const std::string& kind, double beta,
                                   const std::string& pda_mode,
                                   double eigenvalue_floor) {
  tileadapt::TransformSpec spec;
  spec.kind = tileadapt::transform_kind_from_string(kind);
  spec.beta = beta;
  spec.pda_mode = tileadapt::pda_mode_from_string(pda_mode);
  spec.eigenvalue_floor = eigenvalue_floor;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_tileadapt, m) {
  m.doc() = "Data-based domain adaptation for aerial imagery tiles";

  m.def(
      "load_raster",
      [](const std::filesystem::path& path) {
        return to_array(tileadapt::load_raster(path));
      },
      py::arg("path"), "Read a PNG/TIFF tile as a (H,W,C) float64 array");

  m.def(
      "save_raster",
      [](const std::filesystem::path& path, const DoubleArray& a, int depth,
         std::optional<double> resolution_m) {
        Raster r = to_raster(a);
        r.resolution_m = resolution_m;
        tileadapt::save_raster(r, path, depth);
      },
      py::arg("path"), py::arg("image"), py::arg("depth") = 8,
      py::arg("resolution_m") = std::nullopt);

  m.def(
      "downsample_mean",
      [](const DoubleArray& a, int factor) {
        return to_array(tileadapt::downsample_mean(to_raster(a), factor));
      },
      py::arg("image"), py::arg("factor"));

  m.def(
      "rgb_to_lab",
      [](const DoubleArray& a) {
        return to_array(tileadapt::rgb_to_lab(to_raster(a)));
      },
      py::arg("image"));
  m.def(
      "lab_to_rgb",
      [](const DoubleArray& a) {
        return to_array(tileadapt::lab_to_rgb(to_raster(a)));
      },
      py::arg("image"));

  m.def(
      "channel_histogram",
      [](const DoubleArray& a, int channel) {
        const auto h = tileadapt::channel_histogram(to_raster(a), channel);
        py::array_t<std::uint64_t> out(256);
        std::memcpy(out.mutable_data(), h.bins.data(),
                    256 * sizeof(std::uint64_t));
        return out;
      },
      py::arg("image"), py::arg("channel") = 0);

  m.def(
      "shannon_entropy",
      [](const py::array_t<std::uint64_t,
                           py::array::c_style | py::array::forcecast>& bins) {
        if (bins.ndim() != 1 || bins.shape(0) != 256)
          throw std::invalid_argument("expected 256 histogram bins");
        tileadapt::Histogram h;
        std::memcpy(h.bins.data(), bins.data(), 256 * sizeof(std::uint64_t));
        for (auto b : h.bins) h.total += b;
        return tileadapt::shannon_entropy(h);
      },
      py::arg("bins"));

  m.def(
      "image_entropy",
      [](const DoubleArray& a) {
        return tileadapt::image_entropy(to_raster(a));
      },
      py::arg("image"));

  m.def(
      "histogram_match",
      [](const DoubleArray& target, const DoubleArray& reference) {
        return to_array(
            tileadapt::histogram_match(to_raster(target), to_raster(reference)));
      },
      py::arg("target"), py::arg("reference"));

  m.def(
      "lab_histogram_match",
      [](const DoubleArray& target, const DoubleArray& reference) {
        return to_array(tileadapt::lab_histogram_match(to_raster(target),
                                                       to_raster(reference)));
      },
      py::arg("target"), py::arg("reference"));

  m.def(
      "fda",
      [](const DoubleArray& target, const DoubleArray& reference, double beta) {
        return to_array(
            tileadapt::fda(to_raster(target), to_raster(reference), beta));
      },
      py::arg("target"), py::arg("reference"), py::arg("beta") = 0.01);

  m.def(
      "pda",
      [](const DoubleArray& target, const DoubleArray& source,
         const std::string& mode, double eigenvalue_floor) {
        return to_array(tileadapt::pda(to_raster(target), to_raster(source),
                                       tileadapt::pda_mode_from_string(mode),
                                       eigenvalue_floor));
      },
      py::arg("target"), py::arg("source"), py::arg("mode") = "whiten",
      py::arg("eigenvalue_floor") = 1e-8);

  m.def(
      "fit_pixel_stats",
      [](const DoubleArray& a, double eigenvalue_floor) {
        const auto s = tileadapt::fit_pixel_stats(to_raster(a),
                                                  eigenvalue_floor);
        py::dict d;
        d["mean"] = s.mean;
        d["basis"] = s.basis;
        d["eigenvalues"] = s.eigenvalues;
        return d;
      },
      py::arg("image"), py::arg("eigenvalue_floor") = 1e-8);

  m.def(
      "apply_transform",
      [](const std::string& kind, const DoubleArray& target,
         std::optional<DoubleArray> reference, double beta,
         const std::string& pda_mode, double eigenvalue_floor) {
        const auto spec = make_spec(kind, beta, pda_mode, eigenvalue_floor);
        if (!reference)
          return to_array(
              tileadapt::apply_transform(spec, to_raster(target), nullptr));
        const Raster ref = to_raster(*reference);
        return to_array(
            tileadapt::apply_transform(spec, to_raster(target), &ref));
      },
      py::arg("kind"), py::arg("target"), py::arg("reference") = std::nullopt,
      py::arg("beta") = 0.01, py::arg("pda_mode") = "whiten",
      py::arg("eigenvalue_floor") = 1e-8);

  m.def(
      "select_reference",
      [](const DoubleArray& target, const std::string& target_id,
         const std::vector<std::pair<std::string, DoubleArray>>& pool,
         const std::string& kind, double beta, const std::string& pda_mode,
         double eigenvalue_floor, int max_attempts, double retention_threshold,
         std::uint64_t seed, bool without_replacement) {
        std::vector<tileadapt::PoolTile> tiles;
        tiles.reserve(pool.size());
        for (const auto& [id, img] : pool)
          tiles.push_back({id, to_raster(img)});
        tileadapt::MatchConfig cfg;
        cfg.max_attempts = max_attempts;
        cfg.retention_threshold = retention_threshold;
        cfg.seed = seed;
        cfg.sample_without_replacement = without_replacement;
        const auto sel = tileadapt::select_reference(
            to_raster(target), target_id, tiles,
            make_spec(kind, beta, pda_mode, eigenvalue_floor), cfg);
        py::dict d;
        d["reference_id"] = sel.result.reference_id;
        d["attempts"] = sel.result.attempts;
        d["entropy_target"] = sel.result.entropy_target;
        d["entropy_transformed"] = sel.result.entropy_transformed;
        d["retention"] = sel.result.retention;
        d["accepted"] = sel.result.accepted;
        return py::make_tuple(d, to_array(sel.transformed));
      },
      py::arg("target"), py::arg("target_id"), py::arg("pool"),
      py::arg("kind") = "hm", py::arg("beta") = 0.01,
      py::arg("pda_mode") = "whiten", py::arg("eigenvalue_floor") = 1e-8,
      py::arg("max_attempts") = 25, py::arg("retention_threshold") = 0.9,
      py::arg("seed") = 0, py::arg("without_replacement") = true);

  m.def(
      "binarize",
      [](const DoubleArray& prob, double threshold) {
        const auto mask = tileadapt::binarize(to_raster(prob), threshold);
        py::array_t<bool> out({static_cast<py::ssize_t>(mask.height),
                               static_cast<py::ssize_t>(mask.width)});
        bool* dst = out.mutable_data();
        for (std::size_t i = 0; i < mask.values.size(); ++i)
          dst[i] = mask.values[i] != 0;
        return out;
      },
      py::arg("prob"), py::arg("threshold") = 0.5);

  m.def(
      "iou",
      [](const BoolArray& pred, const BoolArray& gt) {
        return tileadapt::iou(to_mask(pred), to_mask(gt));
      },
      py::arg("pred"), py::arg("gt"));

  m.def(
      "mae",
      [](const DoubleArray& pred, const DoubleArray& gt) {
        return tileadapt::mae(to_height(pred), to_height(gt));
      },
      py::arg("pred"), py::arg("gt"),
      "Mean absolute error in metres; NaN pixels count as nodata");

  m.def(
      "split_ids",
      [](const std::vector<std::string>& ids, double ratio,
         std::uint64_t seed) {
        const auto s = tileadapt::split_dataset(ids, ratio, seed);
        return py::make_tuple(s.train_ids, s.test_ids);
      },
      py::arg("ids"), py::arg("ratio") = 0.8, py::arg("seed") = 0);

  m.attr("__version__") = "0.1.0";
}
