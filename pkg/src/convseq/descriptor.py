"""Regional HOG descriptors: per-cell orientation histograms, block-normalised.

Each image is partitioned into a grid of non-overlapping cells; every
cell gets an L-bin gradient-magnitude-weighted orientation histogram,
and every region is described by the L2-normalised concatenation of its
2x2 cell block (anchors clamped inward at the last row/column).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import PipelineConfig
from .errors import ConfigError, DatasetError
from .imaging import (
    EntropyMap,
    GradientMap,
    GrayImage,
    compute_entropy_map,
    compute_gradients,
    image_entropy_scalar,
)

CACHE_MAGIC = b"CSQHOG01"
CACHE_VERSION = 1


@dataclass(frozen=True)
class CellHistogramGrid:
    """Raw orientation histograms, shape (rows, cols, bins)."""

    hist: np.ndarray

    @property
    def rows(self) -> int:
        return self.hist.shape[0]

    @property
    def cols(self) -> int:
        return self.hist.shape[1]


@dataclass(frozen=True)
class ImageDescriptor:
    """Per-region descriptors, shape (n_regions, 4*bins), float64.

    Every row is either exactly zero (featureless block) or unit-norm
    with non-negative components.
    """

    vectors: np.ndarray

    @property
    def n_regions(self) -> int:
        return self.vectors.shape[0]

    @property
    def depth(self) -> int:
        return self.vectors.shape[1]


def compute_cell_histograms(gm: GradientMap, cfg: PipelineConfig) -> CellHistogramGrid:
    """Vote each pixel's gradient magnitude into its cell's orientation bin.

    Bins are L equal intervals over [0, 180) with hard assignment.
    """
    if gm.magnitude.shape != (cfg.image_height, cfg.image_width):
        raise ConfigError(
            f"gradient map shape {gm.magnitude.shape} does not match configured "
            f"{(cfg.image_height, cfg.image_width)}"
        )
    rows, cols, bins = cfg.grid_rows, cfg.grid_cols, cfg.orientation_bins

    bin_idx = np.floor(gm.orientation * (bins / 180.0)).astype(np.int64)
    np.clip(bin_idx, 0, bins - 1, out=bin_idx)

    cell_row = np.arange(cfg.image_height) // cfg.cell_height
    cell_col = np.arange(cfg.image_width) // cfg.cell_width
    cell_id = cell_row[:, None] * cols + cell_col[None, :]
    flat = cell_id * bins + bin_idx

    hist = np.bincount(
        flat.ravel(), weights=gm.magnitude.ravel(), minlength=rows * cols * bins
    ).reshape(rows, cols, bins)
    return CellHistogramGrid(hist=hist)


def block_normalize(chg: CellHistogramGrid, cfg: PipelineConfig) -> ImageDescriptor:
    """Concatenate each region's 2x2 cell block and L2-normalise it.

    The block anchored at (min(r, rows-2), min(c, cols-2)) covers the
    region plus its right/below neighbours; all-zero blocks stay zero.
    """
    rows, cols = chg.rows, chg.cols
    if rows < 2 or cols < 2:
        raise ConfigError("cell grid must be at least 2x2 for block normalisation")
    if chg.hist.shape[2] != cfg.orientation_bins:
        raise ConfigError("histogram bin count does not match configuration")

    ar = np.minimum(np.arange(rows), rows - 2)
    ac = np.minimum(np.arange(cols), cols - 2)
    h = chg.hist
    block = np.concatenate(
        [
            h[ar][:, ac],
            h[ar][:, ac + 1],
            h[ar + 1][:, ac],
            h[ar + 1][:, ac + 1],
        ],
        axis=2,
    ).reshape(rows * cols, 4 * cfg.orientation_bins)

    block = np.ascontiguousarray(block, dtype=np.float64)
    norms = np.linalg.norm(block, axis=1)
    nonzero = norms > 0.0
    block[nonzero] /= norms[nonzero, None]
    return ImageDescriptor(vectors=block)


def describe_image(
    img: GrayImage, cfg: PipelineConfig
) -> tuple[ImageDescriptor, EntropyMap, float]:
    """Full per-image bundle: descriptor, entropy map, rescaled entropy."""
    gm = compute_gradients(img)
    desc = block_normalize(compute_cell_histograms(gm, cfg), cfg)
    em = compute_entropy_map(img, cfg)
    return desc, em, image_entropy_scalar(em, cfg)


def save_descriptor_cache(
    path: Path | str, descriptors: Sequence[ImageDescriptor], cfg: PipelineConfig
) -> None:
    """Write precomputed descriptors as little-endian float32 with a header.

    Layout: magic, then version/W1/H1/W2/H2/L/n_images as uint32, then
    n_images blocks of n_regions*depth float32 values.
    """
    header = struct.pack(
        "<8s7I",
        CACHE_MAGIC,
        CACHE_VERSION,
        cfg.image_width,
        cfg.image_height,
        cfg.cell_width,
        cfg.cell_height,
        cfg.orientation_bins,
        len(descriptors),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for desc in descriptors:
            if desc.vectors.shape != (cfg.n_regions, cfg.descriptor_depth):
                raise ConfigError("descriptor shape does not match configuration")
            fh.write(desc.vectors.astype("<f4").tobytes())


def load_descriptor_cache(path: Path | str, cfg: PipelineConfig) -> list[ImageDescriptor]:
    """Read a descriptor cache written by :func:`save_descriptor_cache`."""
    header_size = struct.calcsize("<8s7I")
    with open(path, "rb") as fh:
        header = fh.read(header_size)
        if len(header) < header_size:
            raise DatasetError(f"descriptor cache {path} is too short")
        magic, version, w1, h1, w2, h2, bins, n_images = struct.unpack("<8s7I", header)
        if magic != CACHE_MAGIC:
            raise DatasetError(f"{path} is not a descriptor cache")
        if version != CACHE_VERSION:
            raise DatasetError(f"unsupported descriptor cache version {version}")
        if (w1, h1, w2, h2, bins) != (
            cfg.image_width,
            cfg.image_height,
            cfg.cell_width,
            cfg.cell_height,
            cfg.orientation_bins,
        ):
            raise ConfigError(
                "descriptor cache was built with different pipeline dimensions"
            )
        payload = fh.read()

    per_image = cfg.n_regions * cfg.descriptor_depth
    expected = n_images * per_image * 4
    if len(payload) != expected:
        raise DatasetError(
            f"descriptor cache {path} truncated: {len(payload)} bytes, expected {expected}"
        )
    flat = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return [
        ImageDescriptor(
            vectors=flat[i * per_image : (i + 1) * per_image].reshape(
                cfg.n_regions, cfg.descriptor_depth
            )
        )
        for i in range(n_images)
    ]
