"""Landmark recordings and their per-landmark variance features.

A gesture video is an ordered stack of frames, each holding the 21 tracked
hand landmark positions in (x, y, z). Each video is reduced to a 21x3 matrix
of per-landmark coordinate variances; those rows are the data points every
downstream model consumes.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError

LANDMARK_COUNT = 21
COORD_DIM = 3

# Variance columns are z-scored; a column with zero spread gets this floor so
# the division stays defined.
STD_FLOOR = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GestureVideo:
    """One recorded gesture: frames of shape (frame_count, 21, 3)."""

    frames: np.ndarray
    source_id: str
    label: str | None = None

    def __post_init__(self):
        frames = _freeze(self.frames)
        if frames.ndim != 3 or frames.shape[1:] != (LANDMARK_COUNT, COORD_DIM):
            raise DataError(
                f"frames must have shape (F, {LANDMARK_COUNT}, {COORD_DIM}), "
                f"got {frames.shape}"
            )
        if frames.shape[0] < 2:
            raise DataError("a gesture video needs at least 2 frames")
        if not np.all(np.isfinite(frames)):
            raise DataError(f"non-finite landmark coordinate in {self.source_id!r}")
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-landmark coordinate variances of one video: 21 rows of (var_x, var_y, var_z).

    Raw matrices hold variances and must be non-negative; matrices produced by
    `apply_normalization` carry `normalized=True` and may hold any finite reals.
    """

    rows: np.ndarray
    source_id: str
    label: str | None = None
    normalized: bool = False

    def __post_init__(self):
        rows = _freeze(self.rows)
        if rows.shape != (LANDMARK_COUNT, COORD_DIM):
            raise DataError(
                f"feature matrix must be {LANDMARK_COUNT}x{COORD_DIM}, got {rows.shape}"
            )
        if not np.all(np.isfinite(rows)):
            raise DataError(f"non-finite feature value in {self.source_id!r}")
        if not self.normalized and np.any(rows < 0):
            raise DataError(f"negative variance in {self.source_id!r}")
        object.__setattr__(self, "rows", rows)


@dataclass(frozen=True)
class NormalizationStats:
    """Column-wise mean and standard deviation of the training feature rows."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = _freeze(self.mean)
        std = _freeze(self.std)
        if mean.shape != (COORD_DIM,) or std.shape != (COORD_DIM,):
            raise DataError("normalization stats must hold 3 means and 3 stds")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(std))):
            raise DataError("non-finite normalization stats")
        if np.any(std <= 0):
            raise DataError("normalization stds must be strictly positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


def compute_variances(video: GestureVideo) -> FeatureMatrix:
    """Reduce a video to per-landmark population variances (divisor = frame count)."""
    if video.frame_count < 2:
        raise DataError("variance is degenerate for fewer than 2 frames")
    rows = np.var(video.frames, axis=0)
    return FeatureMatrix(rows=rows, source_id=video.source_id, label=video.label)


def fit_normalization(features: Sequence[FeatureMatrix]) -> NormalizationStats:
    """Column mean/std over all stacked feature rows, std floored at STD_FLOOR."""
    if len(features) == 0:
        raise DataError("cannot fit normalization on an empty feature list")
    stacked = np.vstack([f.rows for f in features])
    mean = stacked.mean(axis=0)
    std = np.maximum(stacked.std(axis=0), STD_FLOOR)
    return NormalizationStats(mean=mean, std=std)


def apply_normalization(features: FeatureMatrix, stats: NormalizationStats) -> FeatureMatrix:
    """Z-score each column: (value - column mean) / column std."""
    rows = (features.rows - stats.mean) / stats.std
    return FeatureMatrix(
        rows=rows,
        source_id=features.source_id,
        label=features.label,
        normalized=True,
    )


def invert_normalization(features: FeatureMatrix, stats: NormalizationStats) -> FeatureMatrix:
    """Undo `apply_normalization`; rounding slightly below zero is clipped back."""
    rows = features.rows * stats.std + stats.mean
    rows = np.maximum(rows, 0.0)
    return FeatureMatrix(
        rows=rows,
        source_id=features.source_id,
        label=features.label,
        normalized=False,
    )
