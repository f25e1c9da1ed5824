"""Dynamic query-sequence length decisions and sequence assembly.

Two stages set the length for each query start index: an information-gain
scan over successive frames finds the local content change-point, then
the mean image entropy of the candidate sequence grows it further (in
``seq_step`` increments, up to ``max_k``) when the frames carry too
little information on their own.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .config import PipelineConfig
from .descriptor import ImageDescriptor
from .errors import SequenceTruncationError
from .matcher import match_images
from .saliency import QueryDescriptor


@dataclass(frozen=True)
class EncodedFrame:
    """Everything the sequencer and matcher need for one traverse frame."""

    descriptor: ImageDescriptor
    query: QueryDescriptor
    entropy: float


@dataclass(frozen=True)
class SequenceDecision:
    """Outcome of both length stages for one start index.

    ``truncated`` marks decisions the end of the traverse cut short;
    such starts are not matched.
    """

    info_gain_length: int
    final_length: int
    seq_entropy: float
    gains: tuple[float, ...]
    truncated: bool = False


@dataclass(frozen=True)
class QuerySequence:
    """Consecutive query frames starting at ``start``."""

    start: int
    length: int
    members: tuple[EncodedFrame, ...]


def information_gain(a: QueryDescriptor, b_as_reference: ImageDescriptor) -> float:
    """Dissimilarity of two frames: one minus their matching score."""
    return 1.0 - match_images(a, b_as_reference)


def _scan_info_gain(
    frames: Sequence[EncodedFrame], start: int, cfg: PipelineConfig
) -> tuple[int, tuple[float, ...]]:
    if not 0 <= start < len(frames):
        raise IndexError(f"start {start} out of range for {len(frames)} frames")
    k = cfg.min_k
    gains = []
    while k < cfg.max_k_info_gain and start + k < len(frames):
        gain = information_gain(frames[start].query, frames[start + k].descriptor)
        gains.append(gain)
        if gain < cfg.info_threshold:
            break
        k += 1
    return k, tuple(gains)


def initial_sequence_length(
    frames: Sequence[EncodedFrame], start: int, cfg: PipelineConfig
) -> int:
    """Length at which the start frame stops being dissimilar to lookahead frames.

    Starting at ``min_k``, the start frame is compared against frame
    ``start + k``; while the information gain stays at or above the
    information threshold the length keeps growing, capped at
    ``max_k_info_gain`` and at the end of the traverse.
    """
    return _scan_info_gain(frames, start, cfg)[0]


def dynamic_sequence_length(
    traverse_entropies: Sequence[float],
    start: int,
    info_gain_length: int,
    cfg: PipelineConfig,
    gains: tuple[float, ...] = (),
) -> SequenceDecision:
    """Grow the sequence until its mean entropy reaches the threshold.

    Accepts immediately once the mean rescaled image entropy of frames
    ``[start, start + k)`` reaches ``entropy_threshold``; otherwise grows
    by ``seq_step``, accepting unconditionally at ``max_k``.  Hitting the
    end of the traverse while still wanting to grow marks the decision
    truncated.
    """
    if info_gain_length < cfg.min_k:
        raise ValueError(f"info_gain_length {info_gain_length} below min_k {cfg.min_k}")
    if not 0 <= start < len(traverse_entropies):
        raise IndexError(
            f"start {start} out of range for {len(traverse_entropies)} frames"
        )
    limit = len(traverse_entropies) - start
    k = min(info_gain_length, limit)
    truncated = k < info_gain_length
    while True:
        seq_entropy = float(np.mean(traverse_entropies[start : start + k]))
        if seq_entropy >= cfg.entropy_threshold or k >= cfg.max_k:
            break
        grown = min(k + cfg.seq_step, cfg.max_k, limit)
        if grown == k:
            truncated = True
            break
        k = grown
    return SequenceDecision(
        info_gain_length=info_gain_length,
        final_length=k,
        seq_entropy=seq_entropy,
        gains=gains,
        truncated=truncated,
    )


def decide_sequence(
    frames: Sequence[EncodedFrame], start: int, cfg: PipelineConfig
) -> SequenceDecision:
    """Run both length stages for one start index."""
    info_k, gains = _scan_info_gain(frames, start, cfg)
    entropies = [f.entropy for f in frames]
    return dynamic_sequence_length(entropies, start, info_k, cfg, gains=gains)


def build_query_sequence(
    frames: Sequence[EncodedFrame],
    start: int,
    cfg: PipelineConfig,
    decision: SequenceDecision | None = None,
) -> QuerySequence:
    """Assemble the member frames for one start index.

    Raises :class:`SequenceTruncationError` when the traverse ended before
    the decided length fit; callers stop issuing sequences at that point.
    """
    if decision is None:
        decision = decide_sequence(frames, start, cfg)
    if decision.truncated:
        raise SequenceTruncationError(
            f"traverse ends before a full sequence fits at start {start}"
        )
    k = decision.final_length
    return QuerySequence(start=start, length=k, members=tuple(frames[start : start + k]))


def iter_query_sequences(
    frames: Sequence[EncodedFrame], cfg: PipelineConfig
) -> Iterator[tuple[QuerySequence, SequenceDecision]]:
    """Yield sequences for start = 0, 1, 2, ... until truncation."""
    for start in range(len(frames)):
        decision = decide_sequence(frames, start, cfg)
        if decision.truncated:
            return
        yield build_query_sequence(frames, start, cfg, decision), decision


def write_decision_log(
    path: Path | str, decisions: Sequence[SequenceDecision], starts: Sequence[int]
) -> None:
    """Per-start decision trace as CSV for sequence-length analysis."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["start", "info_gain_length", "final_length", "seq_entropy"])
        for start, d in zip(starts, decisions):
            writer.writerow([start, d.info_gain_length, d.final_length, repr(d.seq_entropy)])
