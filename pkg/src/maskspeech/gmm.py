"""Diagonal-covariance Gaussian mixtures trained by EM, one per class.

Models are deliberately plain: k-means++ seeded Lloyd iterations for the
starting point, then EM with a per-dimension variance floor. Likelihood
work happens in the log domain throughout.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .config import GmmConfig
from .errors import ValidationError
from .features.matrix import FEATURE_KINDS, FeatureMatrix
from .labels import LABEL_MASK, LABEL_NO_MASK

_LOG_2PI = np.log(2.0 * np.pi)

#: Absolute lower bound for the variance floor, so constant data dimensions
#: cannot produce a zero floor and a singular component.
_FLOOR_CLAMP = 1e-12

_GMM_MAGIC = b"MSGM"
_GMM_VERSION = 1
_GMM_HEAD = struct.Struct("<4sIIIq")

_MODELS_MAGIC = b"MSCM"
_MODELS_VERSION = 1
_MODELS_HEAD = struct.Struct("<4sI8s16s")


@dataclass
class Gmm:
    """weights on the simplex, means and per-dimension variances (M x D)."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    var_floor: np.ndarray  # (D,), every variance >= this
    seed: int = 0
    train_ll_history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.asarray(self.means, dtype=np.float64)
        self.variances = np.asarray(self.variances, dtype=np.float64)
        self.var_floor = np.asarray(self.var_floor, dtype=np.float64)
        m, d = self.means.shape
        if self.weights.shape != (m,) or self.variances.shape != (m, d):
            raise ValidationError("gmm parameter shapes disagree")
        if self.var_floor.shape != (d,):
            raise ValidationError("var_floor must have one entry per dimension")
        self.check_invariants()

    def check_invariants(self):
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValidationError("gmm weights must be non-negative and sum to 1")
        if np.any(self.var_floor <= 0):
            raise ValidationError("variance floor must be positive")
        if np.any(self.variances < self.var_floor - 1e-300):
            raise ValidationError("gmm variances fell below the floor")
        for name in ("weights", "means", "variances"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValidationError(f"gmm {name} must be finite")

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def _as_rows(data) -> np.ndarray:
    rows = data.rows if isinstance(data, FeatureMatrix) else np.asarray(data, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise ValidationError("expected a non-empty (n_frames, dim) matrix")
    if not np.all(np.isfinite(rows)):
        raise ValidationError("training/scoring data must be finite")
    return rows


def _log_component_densities(g: Gmm, x: np.ndarray) -> np.ndarray:
    """(n, M) matrix of log w_m + log N(x | mu_m, diag sigma2_m)."""
    inv_var = 1.0 / g.variances
    log_det = np.sum(np.log(g.variances), axis=1)
    # ||x - mu||^2_Sigma expanded into three BLAS products.
    quad = (
        (x * x) @ inv_var.T
        - 2.0 * (x @ (g.means * inv_var).T)
        + np.sum(g.means * g.means * inv_var, axis=1)
    )
    with np.errstate(divide="ignore"):  # a dead component's weight may be 0
        log_w = np.log(g.weights)
    return log_w - 0.5 * (g.dim * _LOG_2PI + log_det + quad)


def per_frame_log_likelihood(g: Gmm, data) -> np.ndarray:
    x = _as_rows(data)
    if x.shape[1] != g.dim:
        raise ValidationError(f"data dim {x.shape[1]} != model dim {g.dim}")
    return logsumexp(_log_component_densities(g, x), axis=1)


def avg_log_likelihood(g: Gmm, data) -> float:
    """Mean over frames of the mixture log density."""
    return float(np.mean(per_frame_log_likelihood(g, data)))


def _kmeans_init(x: np.ndarray, m: int, cfg: GmmConfig, rng: np.random.Generator):
    """k-means++ seeding plus a few Lloyd iterations; returns (weights, means, variances)."""
    n, d = x.shape
    centers = np.empty((m, d))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for i in range(1, m):
        total = d2.sum()
        if total <= 0:
            # All points coincide with a chosen center; reuse the first point.
            centers[i:] = x[0]
            break
        centers[i] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centers[i]) ** 2, axis=1))

    x_sq = np.sum(x * x, axis=1)
    assign = None
    for _ in range(cfg.kmeans_iters):
        # Nearest center via the half-distance trick (||x||^2 is constant
        # per point, so argmax of c.x - ||c||^2/2 is the nearest center).
        half_dist = centers @ x.T - 0.5 * np.sum(centers * centers, axis=1)[:, None]
        new_assign = np.argmax(half_dist, axis=0)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        own_dist = x_sq - 2.0 * half_dist[assign, np.arange(n)]
        for i in range(m):
            mask = assign == i
            if np.any(mask):
                centers[i] = x[mask].mean(axis=0)
            else:
                # Deterministic refill: steal the point farthest from its
                # center; blank it so a second empty cluster takes the next one.
                far = int(np.argmax(own_dist))
                centers[i] = x[far]
                own_dist[far] = -np.inf
    if assign is None:
        assign = np.zeros(n, dtype=np.int64)

    global_var = np.maximum(x.var(axis=0), _FLOOR_CLAMP)
    weights = np.empty(m)
    variances = np.empty((m, d))
    for i in range(m):
        mask = assign == i
        count = int(np.count_nonzero(mask))
        weights[i] = max(count, 1) / n
        if count > 0:
            variances[i] = x[mask].var(axis=0)
        else:
            variances[i] = global_var
    weights /= weights.sum()
    return weights, centers, variances


def em_train(data, m: int, cfg: GmmConfig | None = None) -> Gmm:
    """Fit an m-component diagonal GMM; per-iteration mean log-likelihoods
    are recorded on the returned model's train_ll_history."""
    cfg = cfg or GmmConfig()
    cfg.validate()
    x = _as_rows(data)
    n, d = x.shape
    if n < m:
        raise ValidationError(f"cannot fit {m} components to {n} rows")

    rng = np.random.default_rng(cfg.seed)
    global_var = x.var(axis=0)
    floor = np.maximum(cfg.var_floor_scale * global_var, _FLOOR_CLAMP)

    if m == 1:
        # Closed-form ML for a single Gaussian; EM would land here anyway.
        mean = np.mean(x, axis=0)
        var = np.maximum(np.mean((x - mean) ** 2, axis=0), floor)
        g = Gmm(np.ones(1), mean[None, :], var[None, :], floor, cfg.seed)
        g.train_ll_history = [avg_log_likelihood(g, x)]
        return g

    weights, means, variances = _kmeans_init(x, m, cfg, rng)
    variances = np.maximum(variances, floor)
    g = Gmm(weights, means, variances, floor, cfg.seed)

    history: list[float] = []
    x_sq = x * x
    for _ in range(cfg.max_iters):
        log_dens = _log_component_densities(g, x)
        frame_ll = logsumexp(log_dens, axis=1)
        ll = float(frame_ll.mean())
        history.append(ll)
        if len(history) > 1 and ll - history[-2] < cfg.tol:
            break

        resp = np.exp(log_dens - frame_ll[:, None])
        counts = resp.sum(axis=0)
        new_weights = counts / n
        new_weights /= new_weights.sum()
        # A dead component (no responsibility mass) keeps its parameters;
        # maximizing over the live ones only still never lowers the bound.
        live = counts > 1e-10
        new_means = g.means.copy()
        new_vars = g.variances.copy()
        new_means[live] = (resp.T[live] @ x) / counts[live, None]
        e2 = (resp.T[live] @ x_sq) / counts[live, None]
        new_vars[live] = e2 - new_means[live] ** 2
        new_vars = np.maximum(new_vars, floor)
        g = Gmm(new_weights, new_means, new_vars, floor, cfg.seed)
    else:
        # Ran out of iterations after an M-step; record that model's score.
        history.append(avg_log_likelihood(g, x))

    g.train_ll_history = history
    return g


@dataclass
class ClassModels:
    """The pair of per-class models a scorer compares."""

    mask: Gmm
    no_mask: Gmm
    feature_kind: str
    config_fingerprint: str = ""

    def __post_init__(self):
        if self.feature_kind not in FEATURE_KINDS:
            raise ValidationError(f"unknown feature kind {self.feature_kind!r}")
        if self.mask.dim != self.no_mask.dim:
            raise ValidationError("class models must share one feature dimension")


@dataclass
class ScoreRecord:
    utt_id: str
    score: float
    predicted: str

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValidationError(f"{self.utt_id}: non-finite score")
        if self.predicted not in (LABEL_MASK, LABEL_NO_MASK):
            raise ValidationError(f"unknown label {self.predicted!r}")


def classify(models: ClassModels, f: FeatureMatrix, utt_id: str = "") -> ScoreRecord:
    """score = ll(mask) - ll(no_mask); positive means mask, ties go to no_mask."""
    if f.kind != models.feature_kind:
        raise ValidationError(
            f"feature kind {f.kind!r} does not match models for {models.feature_kind!r}"
        )
    score = avg_log_likelihood(models.mask, f) - avg_log_likelihood(models.no_mask, f)
    predicted = LABEL_MASK if score > 0 else LABEL_NO_MASK
    return ScoreRecord(utt_id, score, predicted)


def _gmm_to_bytes(g: Gmm) -> bytes:
    head = _GMM_HEAD.pack(_GMM_MAGIC, _GMM_VERSION, g.n_components, g.dim, g.seed)
    blocks = [
        np.ascontiguousarray(a, dtype="<f8").tobytes()
        for a in (g.weights, g.means, g.variances, g.var_floor)
    ]
    return head + b"".join(blocks)


def _gmm_from_bytes(buf: bytes, offset: int) -> tuple[Gmm, int]:
    magic, version, m, d, seed = _GMM_HEAD.unpack_from(buf, offset)
    if magic != _GMM_MAGIC:
        raise ValidationError("not a mixture-model block (bad magic)")
    if version != _GMM_VERSION:
        raise ValidationError(f"unsupported mixture-model version {version}")
    pos = offset + _GMM_HEAD.size
    sizes = [m, m * d, m * d, d]
    arrays = []
    for count in sizes:
        nbytes = count * 8
        if pos + nbytes > len(buf):
            raise ValidationError("truncated mixture-model block")
        arrays.append(np.frombuffer(buf, dtype="<f8", count=count, offset=pos).copy())
        pos += nbytes
    weights, means, variances, floor = arrays
    g = Gmm(weights, means.reshape(m, d), variances.reshape(m, d), floor, seed)
    return g, pos


def save_class_models(models: ClassModels, path):
    head = _MODELS_HEAD.pack(
        _MODELS_MAGIC,
        _MODELS_VERSION,
        models.feature_kind.encode("ascii").ljust(8, b"\x00"),
        models.config_fingerprint.encode("ascii").ljust(16, b"\x00"),
    )
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(_gmm_to_bytes(models.no_mask))
        fh.write(_gmm_to_bytes(models.mask))


def load_class_models(path) -> ClassModels:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _MODELS_HEAD.size:
        raise ValidationError(f"{path}: truncated model file")
    magic, version, kind, fingerprint = _MODELS_HEAD.unpack_from(buf, 0)
    if magic != _MODELS_MAGIC:
        raise ValidationError(f"{path}: not a class-models file (bad magic)")
    if version != _MODELS_VERSION:
        raise ValidationError(f"{path}: unsupported version {version}")
    no_mask, pos = _gmm_from_bytes(buf, _MODELS_HEAD.size)
    mask, pos = _gmm_from_bytes(buf, pos)
    if pos != len(buf):
        raise ValidationError(f"{path}: trailing bytes after model blocks")
    return ClassModels(
        mask,
        no_mask,
        kind.rstrip(b"\x00").decode("ascii"),
        fingerprint.rstrip(b"\x00").decode("ascii"),
    )
