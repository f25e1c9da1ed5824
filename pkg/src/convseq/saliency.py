"""Entropy-driven selection of salient query regions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .descriptor import ImageDescriptor
from .errors import ConfigError
from .imaging import EntropyMap


@dataclass(frozen=True)
class RoiSelection:
    """Strictly increasing indices of the selected regions."""

    region_indices: np.ndarray

    @property
    def count(self) -> int:
        return self.region_indices.shape[0]


@dataclass(frozen=True)
class QueryDescriptor:
    """Salient-region rows of an image descriptor plus its entropy scalar."""

    roi: RoiSelection
    vectors: np.ndarray
    image_entropy: float

    @property
    def n_rois(self) -> int:
        return self.vectors.shape[0]


def region_entropy_means(em: EntropyMap, cfg: PipelineConfig) -> np.ndarray:
    """Mean pixel entropy per region, rescaled to [0, 1]; shape (n_regions,)."""
    if em.values.shape != (cfg.image_height, cfg.image_width):
        raise ConfigError(
            f"entropy map shape {em.values.shape} does not match configured "
            f"{(cfg.image_height, cfg.image_width)}"
        )
    means = em.values.reshape(
        cfg.grid_rows, cfg.cell_height, cfg.grid_cols, cfg.cell_width
    ).mean(axis=(1, 3))
    return means.ravel() / 8.0


def extract_roi(em: EntropyMap, cfg: PipelineConfig) -> RoiSelection:
    """Select regions whose rescaled mean entropy reaches the threshold.

    A fully featureless image would select nothing, which matching cannot
    handle, so the degenerate case falls back to all regions.
    """
    means = region_entropy_means(em, cfg)
    selected = np.flatnonzero(means >= cfg.entropy_threshold)
    if selected.size == 0:
        selected = np.arange(cfg.n_regions, dtype=np.int64)
    return RoiSelection(region_indices=selected)


def select_regions(
    desc: ImageDescriptor, roi: RoiSelection, image_entropy: float = 0.0
) -> QueryDescriptor:
    """Row-gather the selected regions, preserving index order."""
    idx = roi.region_indices
    if idx.size and (idx.min() < 0 or idx.max() >= desc.n_regions):
        raise IndexError(
            f"roi indices out of range for descriptor with {desc.n_regions} regions"
        )
    return QueryDescriptor(
        roi=roi, vectors=desc.vectors[idx], image_entropy=image_entropy
    )
