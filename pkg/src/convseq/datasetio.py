"""Traverse loading, ground truth, and synthetic dataset generation.

Dataset layout on disk::

    <dataset>/query/*.png        query traverse frames
    <dataset>/reference/*.png    reference traverse frames
    <dataset>/ground_truth.csv   optional "query_index,reference_index" rows

Frames are ordered by natural numeric filename order.  When the ground
truth file is absent the traverses are assumed frame-aligned (query i
maps to reference i), which is the convention for consecutive-frame
traverse pairs.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DatasetError, DecodeError, GroundTruthParseError
from .imaging import resize_bilinear

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}

_DIGIT_RUNS = re.compile(r"(\d+)")


@dataclass(frozen=True)
class Traverse:
    """Ordered frames of one route recording."""

    name: str
    frames: tuple[Path, ...]

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class GroundTruth:
    """Query-to-reference mapping judged with a symmetric frame tolerance."""

    mapping: dict[int, int]
    tolerance: int = 2


def natural_key(name: str) -> tuple:
    """Sort key treating digit runs as numbers: img2 before img10."""
    parts = _DIGIT_RUNS.split(name)
    return tuple(int(p) if p.isdigit() else p for p in parts)


def load_traverse(directory: Path | str) -> Traverse:
    """List a traverse directory in deterministic natural order.

    Non-image files are skipped (with a warning tallying them); an empty
    or missing directory is a dataset error.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DatasetError(f"traverse directory {directory} does not exist")
    entries = [p for p in directory.iterdir() if p.is_file()]
    frames = [p for p in entries if p.suffix.lower() in IMAGE_EXTENSIONS]
    skipped = len(entries) - len(frames)
    if skipped:
        log.warning("skipped %d non-image files in %s", skipped, directory)
    if not frames:
        raise DatasetError(f"no image files found in {directory}")
    # raw name breaks ties like "0.png" vs "00.png" deterministically
    frames.sort(key=lambda p: (natural_key(p.name), p.name))
    return Traverse(name=directory.name, frames=tuple(frames))


def read_image(path: Path | str) -> np.ndarray:
    """Decode one frame to a uint8 array, grayscale (h, w) or RGB (h, w, 3)."""
    try:
        with Image.open(path) as im:
            if im.mode == "L":
                return np.asarray(im, dtype=np.uint8)
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"cannot decode image {path}: {exc}") from exc


def write_image(path: Path | str, pixels: np.ndarray) -> None:
    Image.fromarray(pixels).save(path)


def load_ground_truth(
    path: Path | str | None, n_queries: int, tolerance: int = 2
) -> GroundTruth:
    """Read "query_index,reference_index" rows, or default to frame-aligned."""
    if tolerance < 0:
        raise GroundTruthParseError("tolerance must be non-negative")
    if path is None or not Path(path).exists():
        return GroundTruth(
            mapping={i: i for i in range(n_queries)}, tolerance=tolerance
        )
    mapping: dict[int, int] = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise GroundTruthParseError(
                    f"{path}:{lineno}: expected 2 columns, got {len(row)}"
                )
            try:
                q, r = int(row[0]), int(row[1])
            except ValueError as exc:
                raise GroundTruthParseError(
                    f"{path}:{lineno}: non-integer index in {row!r}"
                ) from exc
            mapping[q] = r
    return GroundTruth(mapping=mapping, tolerance=tolerance)


@dataclass(frozen=True)
class VariationSpec:
    """Appearance/viewpoint perturbations applied to the second traverse."""

    shift_px: int = 0
    brightness_gain: float = 1.0
    noise_level: float = 0.0


def _smooth_field(rng, height: int, width: int, scale: int) -> np.ndarray:
    """Seeded band-limited noise in [-1, 1]: coarse grid upsampled bilinearly."""
    gh = max(height // scale, 1) + 2
    gw = max(width // scale, 1) + 2
    grid = rng.uniform(-1.0, 1.0, size=(gh, gw))
    return resize_bilinear(grid, width, height)


# Panorama composition: a small pool of texture tiles laid out in random
# order dominates, so distant frames can look alike (perceptual aliasing)
# while a weak non-repeating base field plus fine grain keeps every
# neighbourhood unique and sequences distinctive.
_TILE_POOL = 4
_TILE_WIDTH = 64
_BASE_AMP = 14.0
_TILE_AMP = 90.0
_FINE_AMP = 8.0


def synthesize_frames(
    seed: int,
    n_frames: int,
    variation: VariationSpec = VariationSpec(),
    frame_size: tuple[int, int] = (256, 256),
    step_px: int = 24,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Deterministic textured traverse pair with smooth content drift.

    Both traverses sample sliding windows of one seeded panorama; the
    second window is offset by ``shift_px`` and gets the brightness gain
    and additive noise applied.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    fh, fw = frame_size[1], frame_size[0]
    rng = np.random.default_rng(seed)
    pano_w = (n_frames - 1) * step_px + fw + abs(variation.shift_px) + 8

    base = _smooth_field(rng, fh, pano_w, scale=96)
    tiles = [_smooth_field(rng, fh, _TILE_WIDTH, scale=12) for _ in range(_TILE_POOL)]
    order = rng.integers(0, _TILE_POOL, pano_w // _TILE_WIDTH + 1)
    mosaic = np.concatenate([tiles[c] for c in order], axis=1)[:, :pano_w]
    fine = _smooth_field(rng, fh, pano_w, scale=6)

    pano = 118.0 + _BASE_AMP * base + _TILE_AMP * mosaic + _FINE_AMP * fine
    pano = np.clip(pano, 0.0, 255.0)

    noise = rng.normal(0.0, 1.0, size=(n_frames, fh, fw)) if variation.noise_level else None

    first, second = [], []
    for i in range(n_frames):
        x = i * step_px
        first.append(np.clip(np.floor(pano[:, x : x + fw] + 0.5), 0, 255).astype(np.uint8))
        xs = x + variation.shift_px
        frame = pano[:, xs : xs + fw] * variation.brightness_gain
        if noise is not None:
            frame = frame + variation.noise_level * noise[i]
        second.append(np.clip(np.floor(frame + 0.5), 0, 255).astype(np.uint8))
    return first, second


def generate_synthetic_traverse(
    seed: int,
    n_frames: int,
    variation: VariationSpec,
    out_dir: Path | str,
    tolerance: int = 2,
    frame_size: tuple[int, int] = (256, 256),
) -> tuple[Traverse, Traverse, GroundTruth]:
    """Materialise a synthetic query/reference pair in the standard layout."""
    out_dir = Path(out_dir)
    query_dir = out_dir / "query"
    ref_dir = out_dir / "reference"
    query_dir.mkdir(parents=True, exist_ok=True)
    ref_dir.mkdir(parents=True, exist_ok=True)

    q_frames, r_frames = synthesize_frames(seed, n_frames, variation, frame_size)
    for i, (qf, rf) in enumerate(zip(q_frames, r_frames)):
        write_image(query_dir / f"frame_{i:05d}.png", qf)
        write_image(ref_dir / f"frame_{i:05d}.png", rf)

    with open(out_dir / "ground_truth.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        for i in range(n_frames):
            writer.writerow([i, i])

    gt = GroundTruth(mapping={i: i for i in range(n_frames)}, tolerance=tolerance)
    return load_traverse(query_dir), load_traverse(ref_dir), gt
