"""Regional convolutional matching of one query image against one reference.

The query's salient-region descriptors are multiplied against all
reference region descriptors; because rows are unit-norm (or zero) and
non-negative, every product entry is a cosine similarity in [0, 1].
Max-pooling each query row over the reference regions and averaging the
maxima yields the image-pair score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .descriptor import ImageDescriptor
from .errors import ConfigError
from .saliency import QueryDescriptor

# An image-pair similarity in [0, 1].
MatchScore = float


@dataclass(frozen=True)
class ScoreMatrix:
    """Cosine similarities, shape (query rois, reference regions)."""

    scores: np.ndarray

    @property
    def rows(self) -> int:
        return self.scores.shape[0]

    @property
    def cols(self) -> int:
        return self.scores.shape[1]


def score_matrix(q: QueryDescriptor, r: ImageDescriptor) -> ScoreMatrix:
    """All-pairs region similarity via a single matrix product."""
    if q.vectors.shape[1] != r.depth:
        raise ConfigError(
            f"descriptor depth mismatch: query {q.vectors.shape[1]}, reference {r.depth}"
        )
    return ScoreMatrix(scores=q.vectors @ r.vectors.T)


def match_images(q: QueryDescriptor, r: ImageDescriptor) -> MatchScore:
    """Mean over query ROIs of each ROI's best region similarity."""
    sm = score_matrix(q, r)
    row_max = sm.scores.max(axis=1)
    return float(row_max.mean())
