"""Score-level fusion: regularized logistic regression and majority vote,
plus the text formats for score, prediction, and fusion-model files.

The trainer is a damped Newton method on the (convex) ridge-regularized
mean negative log-likelihood. With backtracking line search the objective
never increases, which the tests assert directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .config import FusionConfig
from .errors import ValidationError
from .gmm import ScoreRecord
from .labels import LABEL_MASK, LABEL_NO_MASK

_LABELS = (LABEL_MASK, LABEL_NO_MASK)


@dataclass
class ScoreTable:
    """Aligned per-system scores: one row per utterance, one column per system."""

    systems: list
    utt_ids: list
    scores: np.ndarray  # (n_utts, n_systems)
    labels: list | None = None  # aligned with utt_ids; entries may be None

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if len(self.systems) < 1:
            raise ValidationError("score table needs at least one system")
        if len(set(self.systems)) != len(self.systems):
            raise ValidationError("duplicate system names in score table")
        if self.scores.shape != (len(self.utt_ids), len(self.systems)):
            raise ValidationError(
                f"score matrix shape {self.scores.shape} does not match "
                f"{len(self.utt_ids)} utterances x {len(self.systems)} systems"
            )
        if not np.all(np.isfinite(self.scores)):
            raise ValidationError("scores must be finite")
        if self.labels is not None and len(self.labels) != len(self.utt_ids):
            raise ValidationError("labels must align with utt_ids")

    @property
    def n_utts(self) -> int:
        return len(self.utt_ids)


def build_score_table(
    systems: list, per_system_scores: list, labels: dict | None = None
) -> ScoreTable:
    """Assemble a table from per-system {utt_id: score} dicts.

    Every system must cover exactly the same utterance set; utterances are
    ordered by sorted id so the table is deterministic.
    """
    if len(systems) != len(per_system_scores):
        raise ValidationError("one score dict per system required")
    reference = set(per_system_scores[0])
    for name, scores in zip(systems, per_system_scores):
        if set(scores) != reference:
            raise ValidationError(f"system {name!r} covers a different utterance set")
    utt_ids = sorted(reference)
    matrix = np.array([[scores[u] for scores in per_system_scores] for u in utt_ids])
    label_list = None
    if labels is not None:
        label_list = [labels.get(u) for u in utt_ids]
    return ScoreTable(list(systems), utt_ids, matrix, label_list)


@dataclass
class FusionModel:
    systems: list
    weights: np.ndarray
    bias: float
    objective_history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (len(self.systems),):
            raise ValidationError("one fusion weight per system required")
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise ValidationError("fusion parameters must be finite")


def _objective(s, y, w, b, l2):
    z = s @ w + b
    # log(1 + e^z) - y*z, stable for large |z|.
    nll = np.mean(np.logaddexp(0.0, z) - y * z)
    return nll + 0.5 * l2 * np.dot(w, w)


def train_fusion(dev: ScoreTable, cfg: FusionConfig | None = None) -> FusionModel:
    """Fit sigma(w.s + b) to the dev labels (mask = 1) by damped Newton."""
    cfg = cfg or FusionConfig()
    cfg.validate()
    if dev.labels is None or any(lab is None for lab in dev.labels):
        raise ValidationError("fusion training needs a label for every dev utterance")
    y = np.array([1.0 if lab == LABEL_MASK else 0.0 for lab in dev.labels])
    for lab in dev.labels:
        if lab not in _LABELS:
            raise ValidationError(f"unknown label {lab!r} in dev table")
    if np.sum(y == 1.0) < 2 or np.sum(y == 0.0) < 2:
        raise ValidationError("fusion training needs at least two utterances per class")

    s = dev.scores
    n, k = s.shape
    w = np.zeros(k)
    b = 0.0
    obj = _objective(s, y, w, b, cfg.l2)
    history = [obj]

    for _ in range(cfg.max_iters):
        z = s @ w + b
        p = expit(z)
        residual = p - y
        grad_w = s.T @ residual / n + cfg.l2 * w
        grad_b = float(np.mean(residual))
        grad = np.concatenate([grad_w, [grad_b]])
        if np.linalg.norm(grad) < cfg.tol:
            break

        # Newton direction on the augmented design [s | 1].
        r = p * (1.0 - p)
        aug = np.hstack([s, np.ones((n, 1))])
        hess = (aug * r[:, None]).T @ aug / n
        hess[:k, :k] += cfg.l2 * np.eye(k)
        hess += 1e-12 * np.eye(k + 1)  # guards exact singularity at p ~ 0/1
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = grad

        # Backtracking line search keeps the objective non-increasing.
        t = 1.0
        decrease = float(np.dot(grad, step))
        for _ in range(60):
            w_new = w - t * step[:k]
            b_new = b - t * step[k]
            obj_new = _objective(s, y, w_new, b_new, cfg.l2)
            if obj_new <= obj - 1e-4 * t * decrease + 1e-15:
                break
            t *= 0.5
        if obj_new > obj:
            break  # no progress possible at float resolution
        w, b, obj = w_new, b_new, obj_new
        history.append(obj)

    return FusionModel(list(dev.systems), w, float(b), history)


def apply_fusion(model: FusionModel, table: ScoreTable) -> list:
    """Fused score = w.s + b per utterance; positive means mask, tie -> no_mask."""
    if list(table.systems) != list(model.systems):
        raise ValidationError(
            f"score table systems {table.systems} do not match fusion model {model.systems}"
        )
    fused = table.scores @ model.weights + model.bias
    return [
        ScoreRecord(utt, float(z), LABEL_MASK if z > 0 else LABEL_NO_MASK)
        for utt, z in zip(table.utt_ids, fused)
    ]


def majority_vote(per_system_predictions: list) -> list:
    """Per utterance, the label with strictly more votes; a tie goes to no_mask."""
    if len(per_system_predictions) < 1:
        raise ValidationError("majority vote needs at least one system")
    length = len(per_system_predictions[0])
    for preds in per_system_predictions:
        if len(preds) != length:
            raise ValidationError("prediction lists differ in length")
    out = []
    for i in range(length):
        votes = [preds[i] for preds in per_system_predictions]
        for v in votes:
            if v not in _LABELS:
                raise ValidationError(f"unknown label {v!r}")
        n_mask = sum(v == LABEL_MASK for v in votes)
        out.append(LABEL_MASK if n_mask > len(votes) - n_mask else LABEL_NO_MASK)
    return out


# -- text file formats --------------------------------------------------
#
# Scores:       utt_id<TAB>repr(score)   (repr round-trips float64 exactly)
# Predictions:  utt_id<TAB>label
# Fusion model: header line, one "system<TAB>name<TAB>weight" line per
#               system, then "bias<TAB>value".

def save_scores(records: list, path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(f"{rec.utt_id}\t{rec.score!r}\n")


def load_scores(path: str | Path) -> dict:
    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise ValidationError(f"{path}:{line_no}: expected utt_id<TAB>score")
            utt, raw = parts
            if utt in out:
                raise ValidationError(f"{path}:{line_no}: duplicate utterance {utt!r}")
            try:
                out[utt] = float(raw)
            except ValueError:
                raise ValidationError(f"{path}:{line_no}: bad score {raw!r}") from None
    return out


def save_predictions(records: list, path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(f"{rec.utt_id}\t{rec.predicted}\n")


def load_predictions(path: str | Path) -> dict:
    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise ValidationError(f"{path}:{line_no}: expected utt_id<TAB>label")
            utt, label = parts
            if label not in _LABELS:
                raise ValidationError(f"{path}:{line_no}: unknown label {label!r}")
            if utt in out:
                raise ValidationError(f"{path}:{line_no}: duplicate utterance {utt!r}")
            out[utt] = label
    return out


def save_fusion_model(model: FusionModel, path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("fusion-model v1\n")
        for name, weight in zip(model.systems, model.weights):
            fh.write(f"system\t{name}\t{float(weight)!r}\n")
        fh.write(f"bias\t{float(model.bias)!r}\n")


def load_fusion_model(path: str | Path) -> FusionModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "fusion-model v1":
        raise ValidationError(f"{path}: not a fusion model file")
    systems, weights, bias = [], [], None
    for line_no, line in enumerate(lines[1:], 2):
        parts = line.split("\t")
        if parts[0] == "system" and len(parts) == 3:
            systems.append(parts[1])
            weights.append(float(parts[2]))
        elif parts[0] == "bias" and len(parts) == 2:
            bias = float(parts[1])
        else:
            raise ValidationError(f"{path}:{line_no}: unrecognized line {line!r}")
    if bias is None:
        raise ValidationError(f"{path}: missing bias line")
    return FusionModel(systems, np.array(weights), bias)
