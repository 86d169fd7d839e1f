"""Regression deltas over frame sequences."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .matrix import FeatureMatrix


def delta_matrix(static: np.ndarray, window: int = 2) -> np.ndarray:
    """Regression slope over +/- window frames with edge replication.

    d[t] = sum_j j*(x[t+j] - x[t-j]) / (2*sum_j j^2), j = 1..window.
    """
    static = np.asarray(static, dtype=np.float64)
    if static.ndim != 2:
        raise ValidationError("delta input must be a 2-D (n_frames, dim) matrix")
    if window < 1:
        raise ValidationError("delta window must be >= 1")
    n = static.shape[0]
    if n < 2 * window + 1:
        raise ValidationError(
            f"need at least {2 * window + 1} frames for delta window {window}, got {n}"
        )
    padded = np.pad(static, ((window, window), (0, 0)), mode="edge")
    out = np.zeros_like(static)
    for j in range(1, window + 1):
        out += j * (padded[window + j : window + j + n] - padded[window - j : window - j + n])
    return out / (2.0 * sum(j * j for j in range(1, window + 1)))


def delta_stack(static: np.ndarray, window: int = 2) -> np.ndarray:
    """Columns [static | delta | delta-delta]; triples the feature dim."""
    d1 = delta_matrix(static, window)
    d2 = delta_matrix(d1, window)
    return np.hstack([static, d1, d2])


def append_deltas(fm: FeatureMatrix, delta_window: int = 2) -> FeatureMatrix:
    stacked = delta_stack(fm.rows, delta_window)
    return FeatureMatrix(fm.kind, stacked, fm.frame_hop_ms, fm.source_hash)
