"""Match one query sequence against every reference window of the same length."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .descriptor import ImageDescriptor
from .errors import ReferenceTooShortError
from .matcher import match_images
from .sequencer import QuerySequence


@dataclass(frozen=True)
class SequenceMatchResult:
    """Best reference window for one query sequence.

    ``all_window_scores[t]`` is the score of the reference window starting
    at ``t``; ``pair_scores`` holds the per-pair scores of the winning
    window.  Ties pick the lowest reference index.
    """

    query_start: int
    best_ref_start: int
    best_score: float
    all_window_scores: np.ndarray
    pair_scores: np.ndarray


def sequence_matching_func(
    qseq: QuerySequence, rwindow: Sequence[ImageDescriptor]
) -> float:
    """Mean of the k one-to-one image-pair scores."""
    if len(rwindow) != qseq.length:
        raise ValueError(
            f"window length {len(rwindow)} does not match sequence length {qseq.length}"
        )
    pair = [match_images(m.query, r) for m, r in zip(qseq.members, rwindow)]
    return float(np.mean(pair))


def match_sequence(
    qseq: QuerySequence,
    ref_list: Sequence[ImageDescriptor],
    pair_scores: np.ndarray | None = None,
) -> SequenceMatchResult:
    """Slide the query sequence over the reference traverse (stride 1).

    ``pair_scores`` may supply the precomputed (k, n_refs) matrix of
    image-pair scores -- row i is sequence member i against every
    reference frame -- so overlapping windows share work; when omitted it
    is computed here with the exact same matcher call.
    """
    k = qseq.length
    n_refs = len(ref_list)
    if n_refs < k:
        raise ReferenceTooShortError(
            f"reference traverse has {n_refs} frames, sequence needs {k}"
        )
    if pair_scores is None:
        pair_scores = np.array(
            [[match_images(m.query, r) for r in ref_list] for m in qseq.members]
        )
    if pair_scores.shape != (k, n_refs):
        raise ValueError(f"pair_scores shape {pair_scores.shape} != {(k, n_refs)}")

    n_windows = n_refs - k + 1
    acc = np.zeros(n_windows, dtype=np.float64)
    for i in range(k):
        acc += pair_scores[i, i : i + n_windows]
    window_scores = acc / k

    best = int(np.argmax(window_scores))
    return SequenceMatchResult(
        query_start=qseq.start,
        best_ref_start=best,
        best_score=float(window_scores[best]),
        all_window_scores=window_scores,
        pair_scores=pair_scores[np.arange(k), best + np.arange(k)].copy(),
    )
