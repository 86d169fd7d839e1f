"""Unweighted average recall and the fixed-width results table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .labels import LABEL_ORDER


@dataclass
class ConfusionMatrix:
    """counts[true][predicted] over (no_mask, mask)."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (2, 2):
            raise ValidationError("confusion matrix must be 2x2")
        if np.any(self.counts < 0):
            raise ValidationError("confusion counts must be non-negative")

    @classmethod
    def from_labels(cls, truth: list, predicted: list) -> "ConfusionMatrix":
        if len(truth) != len(predicted):
            raise ValidationError("truth and prediction lists differ in length")
        index = {label: i for i, label in enumerate(LABEL_ORDER)}
        counts = np.zeros((2, 2), dtype=np.int64)
        for t, p in zip(truth, predicted):
            if t not in index or p not in index:
                raise ValidationError(f"unknown label in ({t!r}, {p!r})")
            counts[index[t], index[p]] += 1
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class UarReport:
    recall_no_mask: float
    recall_mask: float

    @property
    def uar_percent(self) -> float:
        return 100.0 * (self.recall_no_mask + self.recall_mask) / 2.0


def uar(cm: ConfusionMatrix) -> UarReport:
    """Mean of the two per-class recalls; class sizes do not weight it."""
    totals = cm.counts.sum(axis=1)
    if totals[0] == 0 or totals[1] == 0:
        raise ValidationError("uar undefined: a true class has no utterances")
    return UarReport(
        recall_no_mask=cm.counts[0, 0] / totals[0],
        recall_mask=cm.counts[1, 1] / totals[1],
    )


#: Row order of the results table.
TABLE_SYSTEMS = ("LFCC", "MFCC", "IFCC", "CQCC", "Majority vote", "Score fusion")


def format_uar_table(rows: list) -> str:
    """Fixed-width UAR table.

    rows: (system_name, dev_uar_or_None, test_uar_or_None) triples, UARs in
    percent. Missing values render as '-'. Returned string ends with a
    newline so it can be written to a report file verbatim.
    """
    def cell(v) -> str:
        return "-" if v is None else f"{v:.2f}"

    lines = [f"{'System':<16}{'Dev':>8}{'Test':>8}", "-" * 32]
    for name, dev, test in rows:
        lines.append(f"{name:<16}{cell(dev):>8}{cell(test):>8}")
    return "\n".join(lines) + "\n"
