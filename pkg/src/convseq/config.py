"""Pipeline configuration shared by every stage."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigError

# Reference encoding time (seconds) of the slowest technique we normalise
# compute cost against; used as the default ceiling in the PCU metric.
DEFAULT_T_E_MAX = 0.77


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for image standardisation, description, and sequencing.

    The image is resized to ``image_width x image_height`` and split into
    non-overlapping ``cell_width x cell_height`` regions; region counts
    must divide evenly.  Sequence lengths are bounded by
    ``min_k <= max_k_info_gain <= max_k``.
    """

    image_width: int = 512
    image_height: int = 512
    cell_width: int = 16
    cell_height: int = 16
    orientation_bins: int = 8
    entropy_radius: int = 5
    entropy_threshold: float = 0.5
    info_threshold: float = 0.9
    min_k: int = 1
    max_k_info_gain: int = 15
    max_k: int = 25
    seq_step: int = 1

    def __post_init__(self):
        if self.image_width <= 0 or self.image_height <= 0:
            raise ConfigError("image dimensions must be positive")
        if self.cell_width <= 0 or self.cell_height <= 0:
            raise ConfigError("cell dimensions must be positive")
        if self.image_width % self.cell_width != 0:
            raise ConfigError(
                f"image_width {self.image_width} not divisible by cell_width {self.cell_width}"
            )
        if self.image_height % self.cell_height != 0:
            raise ConfigError(
                f"image_height {self.image_height} not divisible by cell_height {self.cell_height}"
            )
        if not 0.0 <= self.entropy_threshold <= 1.0:
            raise ConfigError("entropy_threshold must lie in [0, 1]")
        if not 0.0 <= self.info_threshold <= 1.0:
            raise ConfigError("info_threshold must lie in [0, 1]")
        if not 1 <= self.min_k <= self.max_k_info_gain <= self.max_k:
            raise ConfigError(
                "sequence bounds must satisfy 1 <= min_k <= max_k_info_gain <= max_k"
            )
        if self.orientation_bins < 2:
            raise ConfigError("orientation_bins must be >= 2")
        if self.entropy_radius < 1:
            raise ConfigError("entropy_radius must be >= 1")
        if self.seq_step < 1:
            raise ConfigError("seq_step must be >= 1")

    @property
    def grid_rows(self) -> int:
        return self.image_height // self.cell_height

    @property
    def grid_cols(self) -> int:
        return self.image_width // self.cell_width

    @property
    def n_regions(self) -> int:
        return self.grid_rows * self.grid_cols

    @property
    def descriptor_depth(self) -> int:
        return 4 * self.orientation_bins

    def with_fixed_k(self, k: int) -> "PipelineConfig":
        """Pin the sequencer to a constant sequence length ``k``."""
        if k < 1:
            raise ConfigError("fixed k must be >= 1")
        return replace(self, min_k=k, max_k_info_gain=k, max_k=k)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)
