"""Per-frame feature container and its binary/text serialization.

Binary layout (little-endian), 72-byte header then payload:

    offset  size  field
    0       4     magic b"MSFC"
    4       4     u32 format version (currently 1)
    8       8     feature kind, ascii, null-padded
    16      8     u64 n_frames
    24      8     u64 dim
    32      8     f64 frame hop in milliseconds
    40      32    sha256 of (source audio bytes + config fingerprint);
                  all zeros when unknown
    72      ...   float64 row-major payload, n_frames*dim values
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ValidationError

FEATURE_KINDS = ("lfcc", "mfcc", "ifcc", "cqcc")

_MAGIC = b"MSFC"
_VERSION = 1
_HEADER = struct.Struct("<4sI8sQQd32s")

#: Allowed widths: static coefficients alone, or static plus delta and
#: delta-delta blocks.
STATIC_DIM = 30
FULL_DIM = 90


@dataclass
class FeatureMatrix:
    """n_frames x dim matrix of per-frame features of one kind."""

    kind: str
    rows: np.ndarray
    frame_hop_ms: float
    source_hash: bytes = field(default=b"\x00" * 32, repr=False)

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValidationError(f"unknown feature kind {self.kind!r}")
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2 or self.rows.shape[0] < 1:
            raise ValidationError("feature rows must form a non-empty 2-D matrix")
        if self.rows.shape[1] not in (STATIC_DIM, FULL_DIM):
            raise ValidationError(
                f"feature dim must be {STATIC_DIM} (static) or {FULL_DIM} (with deltas), "
                f"got {self.rows.shape[1]}"
            )
        if not np.all(np.isfinite(self.rows)):
            raise ValidationError("feature rows must be finite")
        if not (self.frame_hop_ms > 0):
            raise ValidationError("frame_hop_ms must be positive")
        if len(self.source_hash) != 32:
            raise ValidationError("source_hash must be 32 bytes")

    @property
    def n_frames(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def save_feature_matrix(fm: FeatureMatrix, path: str | Path):
    header = _HEADER.pack(
        _MAGIC,
        _VERSION,
        fm.kind.encode("ascii").ljust(8, b"\x00"),
        fm.n_frames,
        fm.dim,
        fm.frame_hop_ms,
        fm.source_hash,
    )
    payload = np.ascontiguousarray(fm.rows, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_feature_header(path: str | Path) -> dict:
    """Parse just the 72-byte header; used for cheap cache checks."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise ValidationError(f"{path}: truncated feature file")
    magic, version, kind, n_frames, dim, hop_ms, source_hash = _HEADER.unpack(raw)
    if magic != _MAGIC:
        raise ValidationError(f"{path}: not a feature file (bad magic)")
    if version != _VERSION:
        raise ValidationError(f"{path}: unsupported feature file version {version}")
    return {
        "kind": kind.rstrip(b"\x00").decode("ascii"),
        "n_frames": n_frames,
        "dim": dim,
        "frame_hop_ms": hop_ms,
        "source_hash": source_hash,
    }


def load_feature_matrix(path: str | Path) -> FeatureMatrix:
    head = read_feature_header(path)
    n_values = head["n_frames"] * head["dim"]
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        payload = fh.read()
    rows = np.frombuffer(payload, dtype="<f8")
    if rows.size != n_values:
        raise ValidationError(
            f"{path}: payload holds {rows.size} values, header promises {n_values}"
        )
    rows = rows.reshape(head["n_frames"], head["dim"]).astype(np.float64)
    return FeatureMatrix(head["kind"], rows, head["frame_hop_ms"], head["source_hash"])


def export_feature_text(fm: FeatureMatrix, path: str | Path):
    """Debug-friendly text form: a comment header, then one row per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# kind={fm.kind} n_frames={fm.n_frames} dim={fm.dim} hop_ms={fm.frame_hop_ms!r}\n")
        for row in fm.rows:
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")
