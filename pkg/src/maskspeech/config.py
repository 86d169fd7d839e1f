"""Dataclass configuration for the whole pipeline, with INI round-trip.

Config files use configparser syntax. Every key must be a known field of
the matching section's dataclass; a typo is a ValidationError rather than
a silently ignored setting.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError


@dataclass
class FramingConfig:
    frame_ms: float = 20.0
    hop_ms: float = 10.0
    window: str = "raised-cosine"
    pre_emphasis: float = 0.0
    n_fft: int = 512

    def validate(self):
        if not (self.frame_ms >= self.hop_ms > 0):
            raise ValidationError("framing: need frame_ms >= hop_ms > 0")
        if self.n_fft < 2 or (self.n_fft & (self.n_fft - 1)) != 0:
            raise ValidationError("framing: n_fft must be a power of two")
        if not (0.0 <= self.pre_emphasis < 1.0):
            raise ValidationError("framing: pre_emphasis must be in [0, 1)")


@dataclass
class CepstralConfig:
    """Shared by the linear- and mel-scale filterbank cepstra."""

    n_filters: int = 40
    n_coeffs: int = 30
    fmin_hz: float = 0.0
    fmax_hz: float = 8000.0

    def validate(self):
        if self.n_filters < 2:
            raise ValidationError("cepstral: n_filters must be >= 2")
        if not (1 <= self.n_coeffs <= self.n_filters):
            raise ValidationError("cepstral: need 1 <= n_coeffs <= n_filters")
        if not (0.0 <= self.fmin_hz < self.fmax_hz):
            raise ValidationError("cepstral: need 0 <= fmin_hz < fmax_hz")


@dataclass
class IfccConfig:
    n_subbands: int = 60
    n_coeffs: int = 30
    fmax_hz: float = 8000.0

    def validate(self):
        if self.n_subbands < 2:
            raise ValidationError("ifcc: n_subbands must be >= 2")
        if not (1 <= self.n_coeffs <= self.n_subbands):
            raise ValidationError("ifcc: need 1 <= n_coeffs <= n_subbands")
        if self.fmax_hz <= 0:
            raise ValidationError("ifcc: fmax_hz must be positive")


@dataclass
class CqccConfig:
    bins_per_octave: int = 96
    fmin_hz: float = 15.625
    fmax_hz: float = 8000.0
    resample_factor: int = 16
    n_coeffs: int = 30

    def validate(self):
        if self.bins_per_octave < 1:
            raise ValidationError("cqcc: bins_per_octave must be >= 1")
        if not (0.0 < self.fmin_hz < self.fmax_hz):
            raise ValidationError("cqcc: need 0 < fmin_hz < fmax_hz")
        if self.resample_factor < 1:
            raise ValidationError("cqcc: resample_factor must be >= 1")
        if self.n_coeffs < 1:
            raise ValidationError("cqcc: n_coeffs must be >= 1")


@dataclass
class DeltaConfig:
    window: int = 2

    def validate(self):
        if self.window < 1:
            raise ValidationError("deltas: window must be >= 1")


@dataclass
class GmmConfig:
    n_mixtures: int = 512
    max_iters: int = 100
    tol: float = 1e-5
    var_floor_scale: float = 1e-3
    kmeans_iters: int = 10
    seed: int = 0

    def validate(self):
        if self.n_mixtures < 1:
            raise ValidationError("gmm: n_mixtures must be >= 1")
        if self.max_iters < 1:
            raise ValidationError("gmm: max_iters must be >= 1")
        if self.tol < 0 or self.var_floor_scale <= 0:
            raise ValidationError("gmm: tol must be >= 0 and var_floor_scale > 0")


@dataclass
class FusionConfig:
    l2: float = 1e-4
    max_iters: int = 100
    tol: float = 1e-10

    def validate(self):
        if self.l2 < 0:
            raise ValidationError("fusion: l2 must be >= 0")
        if self.max_iters < 1:
            raise ValidationError("fusion: max_iters must be >= 1")


@dataclass
class SynthConfig:
    n_speakers: int = 16  # split evenly: even index -> train, odd -> dev
    n_test_speakers: int = 0
    utterances_per_speaker: int = 25
    utterance_s: float = 1.0
    sample_rate_hz: int = 16000
    seed: int = 0

    def validate(self):
        if self.n_speakers < 2 or self.n_speakers % 2 != 0:
            raise ValidationError("synth: n_speakers must be an even number >= 2")
        if self.n_test_speakers < 0:
            raise ValidationError("synth: n_test_speakers must be >= 0")
        if self.utterances_per_speaker < 1:
            raise ValidationError("synth: utterances_per_speaker must be >= 1")
        if self.utterance_s <= 0:
            raise ValidationError("synth: utterance_s must be positive")
        if self.sample_rate_hz <= 0:
            raise ValidationError("synth: sample_rate_hz must be positive")


@dataclass
class MaskConfig:
    """Spectral effect applied to the clean signal to simulate a covered mouth."""

    attenuation_db: float = 6.0
    tilt_start_hz: float = 1000.0
    additive_noise_db: float = -40.0

    def validate(self):
        if self.attenuation_db < 0:
            raise ValidationError("mask: attenuation_db must be >= 0")
        if self.tilt_start_hz <= 0:
            raise ValidationError("mask: tilt_start_hz must be positive")


@dataclass
class PathsConfig:
    """Relative paths are resolved against the config file's directory."""

    work_dir: str = "work"
    corpus_dir: str = "corpus"
    manifest: str = "corpus/manifest.tsv"


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    framing: FramingConfig = field(default_factory=FramingConfig)
    lfcc: CepstralConfig = field(default_factory=CepstralConfig)
    mfcc: CepstralConfig = field(default_factory=CepstralConfig)
    ifcc: IfccConfig = field(default_factory=IfccConfig)
    cqcc: CqccConfig = field(default_factory=CqccConfig)
    deltas: DeltaConfig = field(default_factory=DeltaConfig)
    gmm: GmmConfig = field(default_factory=GmmConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    mask: MaskConfig = field(default_factory=MaskConfig)
    #: Anchor for relative paths; load_config sets it to the config file's
    #: directory. Not an INI section.
    base_dir: str = "."

    def validate(self):
        for name in _SECTION_FIELDS:
            section = getattr(self, name)
            if hasattr(section, "validate"):
                section.validate()

    def feature_fingerprint(self, kind: str) -> str:
        """Hex digest over every setting that affects features of this kind.

        Changing an unrelated section (e.g. gmm) must not invalidate cached
        feature files, so only framing, the kind's own section, and the
        delta settings enter the hash.
        """
        if kind not in ("lfcc", "mfcc", "ifcc", "cqcc"):
            raise ValidationError(f"unknown feature kind {kind!r}")
        parts = [f"kind={kind}"]
        for section in (self.framing, getattr(self, kind), self.deltas):
            for f in dataclasses.fields(section):
                parts.append(f"{f.name}={getattr(section, f.name)!r}")
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()[:16]


_SECTION_FIELDS = [f.name for f in dataclasses.fields(PipelineConfig) if f.name != "base_dir"]


def _coerce(raw: str, target_type: type, section: str, key: str):
    try:
        if target_type is bool:
            lowered = raw.strip().lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        return target_type(raw)
    except ValueError:
        raise ValidationError(
            f"config [{section}] {key}: cannot parse {raw!r} as {target_type.__name__}"
        ) from None


def load_config(path: str | Path) -> PipelineConfig:
    """Parse an INI file into a PipelineConfig, rejecting unknown keys."""
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ValidationError(f"config {path}: {exc}") from exc
    cfg = PipelineConfig()
    for section_name in parser.sections():
        if section_name not in _SECTION_FIELDS:
            raise ValidationError(f"config {path}: unknown section [{section_name}]")
        section = getattr(cfg, section_name)
        hints = {f.name: type(getattr(section, f.name)) for f in dataclasses.fields(section)}
        for key, raw in parser.items(section_name):
            if key not in hints:
                raise ValidationError(f"config {path}: unknown key {key!r} in [{section_name}]")
            setattr(section, key, _coerce(raw, hints[key], section_name, key))
    cfg.base_dir = str(path.resolve().parent)
    cfg.validate()
    return cfg


def save_config(cfg: PipelineConfig, path: str | Path):
    """Write every section and key, including values still at their default."""
    parser = configparser.ConfigParser(interpolation=None)
    for section_name in _SECTION_FIELDS:
        section = getattr(cfg, section_name)
        parser[section_name] = {
            f.name: str(getattr(section, f.name)) for f in dataclasses.fields(section)
        }
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)
