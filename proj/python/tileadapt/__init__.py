"""Data-based domain adaptation for aerial imagery tiles."""

from ._tileadapt import (
    __version__,
    apply_transform,
    binarize,
    channel_histogram,
    downsample_mean,
    fda,
    fit_pixel_stats,
    histogram_match,
    image_entropy,
    iou,
    lab_histogram_match,
    lab_to_rgb,
    load_raster,
    mae,
    pda,
    rgb_to_lab,
    save_raster,
    select_reference,
    shannon_entropy,
    split_ids,
)

__all__ = [
    "__version__",
    "apply_transform",
    "binarize",
    "channel_histogram",
    "downsample_mean",
    "fda",
    "fit_pixel_stats",
    "histogram_match",
    "image_entropy",
    "iou",
    "lab_histogram_match",
    "lab_to_rgb",
    "load_raster",
    "mae",
    "pda",
    "rgb_to_lab",
    "save_raster",
    "select_reference",
    "shannon_entropy",
    "split_ids",
]
