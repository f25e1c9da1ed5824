"""Grayscale standardisation, gradients, and local entropy maps.

Everything downstream consumes the three raster products built here:
a fixed-size 8-bit grayscale image, its per-pixel gradient field, and a
per-pixel Shannon-entropy map computed over a sliding square window.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .config import PipelineConfig
from .errors import ConfigError, DecodeError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class GrayImage:
    """Standardised 8-bit grayscale raster, shape (height, width)."""

    pixels: np.ndarray

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class GradientMap:
    """Per-pixel gradient magnitude and unsigned orientation in [0, 180)."""

    magnitude: np.ndarray
    orientation: np.ndarray


@dataclass(frozen=True)
class EntropyMap:
    """Per-pixel local Shannon entropy in bits, each value in [0, 8]."""

    values: np.ndarray


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def resize_bilinear(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Classic bilinear resampling with half-pixel-aligned sample centres.

    Source coordinates are clamped at the borders; works on float arrays
    of shape (h, w) and returns float64.
    """
    src = np.asarray(img, dtype=np.float64)
    in_h, in_w = src.shape
    if (in_h, in_w) == (out_h, out_w):
        return src.copy()

    sx = (np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5
    sy = (np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5
    x0 = np.clip(np.floor(sx).astype(np.int64), 0, in_w - 1)
    y0 = np.clip(np.floor(sy).astype(np.int64), 0, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    y1 = np.minimum(y0 + 1, in_h - 1)
    fx = np.clip(sx - x0, 0.0, 1.0)
    fy = np.clip(sy - y0, 0.0, 1.0)

    top = src[y0][:, x0] * (1.0 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1.0 - fx) + src[y1][:, x1] * fx
    return top * (1.0 - fy[:, None]) + bot * fy[:, None]


def standardize(raw_image: np.ndarray, cfg: PipelineConfig) -> GrayImage:
    """Convert a decoded raster to the fixed-size grayscale the pipeline uses.

    RGB is reduced with the 0.299/0.587/0.114 weighted sum, an alpha
    channel is dropped, and the result is bilinearly resized to the
    configured dimensions.  Rounding happens once, after resizing.
    """
    arr = np.asarray(raw_image)
    if arr.ndim not in (2, 3) or arr.size == 0 or min(arr.shape[:2]) == 0:
        raise DecodeError(f"cannot standardise raster of shape {arr.shape}")

    if arr.ndim == 3:
        if arr.shape[2] == 4:
            arr = arr[:, :, :3]
        if arr.shape[2] != 3:
            raise DecodeError(f"unsupported channel count {arr.shape[2]}")
        chans = arr.astype(np.float64)
        gray = (
            LUMA_WEIGHTS[0] * chans[:, :, 0]
            + LUMA_WEIGHTS[1] * chans[:, :, 1]
            + LUMA_WEIGHTS[2] * chans[:, :, 2]
        )
    else:
        gray = arr.astype(np.float64)

    resized = resize_bilinear(gray, cfg.image_width, cfg.image_height)
    pixels = np.clip(_round_half_up(resized), 0, 255).astype(np.uint8)
    return GrayImage(pixels=pixels)


def compute_gradients(img: GrayImage) -> GradientMap:
    """Central-difference gradients with replicated edges.

    Orientation is unsigned (folded into [0, 180)); pixels with zero
    magnitude get orientation 0 by convention.
    """
    f = img.pixels.astype(np.float64)
    padded = np.pad(f, 1, mode="edge")
    gx = (padded[1:-1, 2:] - padded[1:-1, :-2]) * 0.5
    gy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) * 0.5

    magnitude = np.hypot(gx, gy)
    orientation = np.degrees(np.arctan2(gy, gx)) % 180.0
    # np.mod can round up to exactly 180.0 for tiny negative angles.
    orientation[orientation >= 180.0] = 0.0
    orientation[magnitude == 0.0] = 0.0
    return GradientMap(magnitude=magnitude, orientation=orientation)


@njit(cache=True, nogil=True)
def _entropy_scan(img, radius, weighted_log_lut, log2_lut, out):  # pragma: no cover
    """Sliding-window entropy over a clamped square window.

    Maintains the window histogram plus the running sum of c*log2(c)
    incrementally while sliding along each row, so per-pixel cost is
    O(window height) instead of O(256).  Windows shrink at the borders.
    """
    h, w = img.shape
    for y in range(h):
        y0 = max(y - radius, 0)
        y1 = min(y + radius + 1, h)
        hist = np.zeros(256, dtype=np.int64)
        n = 0
        s = 0.0
        occupied = 0
        x_hi = min(radius + 1, w)
        for yy in range(y0, y1):
            for xx in range(x_hi):
                v = img[yy, xx]
                c = hist[v]
                if c == 0:
                    occupied += 1
                s += weighted_log_lut[c + 1] - weighted_log_lut[c]
                hist[v] = c + 1
                n += 1
        for x in range(w):
            if x > 0:
                # Retire the leaving column before admitting the entering
                # one so bin counts never exceed the full window size.
                x_out = x - radius - 1
                if x_out >= 0:
                    for yy in range(y0, y1):
                        v = img[yy, x_out]
                        c = hist[v]
                        s += weighted_log_lut[c - 1] - weighted_log_lut[c]
                        hist[v] = c - 1
                        if c == 1:
                            occupied -= 1
                        n -= 1
                x_in = x + radius
                if x_in < w:
                    for yy in range(y0, y1):
                        v = img[yy, x_in]
                        c = hist[v]
                        if c == 0:
                            occupied += 1
                        s += weighted_log_lut[c + 1] - weighted_log_lut[c]
                        hist[v] = c + 1
                        n += 1
            if occupied <= 1:
                # Single-intensity window: exactly zero, no float residue.
                out[y, x] = 0.0
            else:
                e = log2_lut[n] - s / n
                if e < 0.0:
                    e = 0.0
                elif e > 8.0:
                    e = 8.0
                out[y, x] = e


@lru_cache(maxsize=16)
def _entropy_luts(radius: int):
    n_max = (2 * radius + 1) ** 2
    counts = np.arange(n_max + 2, dtype=np.float64)
    weighted = np.zeros(n_max + 2)
    weighted[1:] = counts[1:] * np.log2(counts[1:])
    log2 = np.zeros(n_max + 1)
    log2[1:] = np.log2(counts[1 : n_max + 1])
    return weighted, log2


def compute_entropy_map(img: GrayImage, cfg: PipelineConfig) -> EntropyMap:
    """Per-pixel Shannon entropy of the local intensity histogram.

    The window is a square of half-width ``cfg.entropy_radius`` clamped
    to the image, so border windows shrink rather than pad.
    """
    weighted, log2 = _entropy_luts(cfg.entropy_radius)
    out = np.empty(img.pixels.shape, dtype=np.float64)
    _entropy_scan(img.pixels, cfg.entropy_radius, weighted, log2, out)
    return EntropyMap(values=out)


def image_entropy_scalar(em: EntropyMap, cfg: PipelineConfig) -> float:
    """Whole-image entropy rescaled to [0, 1]."""
    h, w = em.values.shape
    if (h, w) != (cfg.image_height, cfg.image_width):
        raise ConfigError(
            f"entropy map shape {(h, w)} does not match configured "
            f"{(cfg.image_height, cfg.image_width)}"
        )
    return float(em.values.sum() / (cfg.image_width * cfg.image_height * 8.0))
