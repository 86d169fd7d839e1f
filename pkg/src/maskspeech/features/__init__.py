"""Acoustic feature extractors and the shared feature container."""

from __future__ import annotations

from ..config import PipelineConfig
from ..dsp import Waveform
from ..errors import ValidationError
from .cepstral import extract_lfcc, extract_mfcc, filterbank_log_energies
from .cqt import CqtKernel, CqtSpectrogram, build_cqt_kernel, cqt, cqt_direct, extract_cqcc
from .deltas import append_deltas, delta_matrix, delta_stack
from .instfreq import InstFreqTrack, extract_ifcc, instantaneous_frequency, subband_tracks
from .matrix import (
    FEATURE_KINDS,
    FULL_DIM,
    STATIC_DIM,
    FeatureMatrix,
    export_feature_text,
    load_feature_matrix,
    read_feature_header,
    save_feature_matrix,
)

__all__ = [
    "FEATURE_KINDS",
    "FULL_DIM",
    "STATIC_DIM",
    "FeatureMatrix",
    "CqtKernel",
    "CqtSpectrogram",
    "InstFreqTrack",
    "append_deltas",
    "build_cqt_kernel",
    "cqt",
    "cqt_direct",
    "delta_matrix",
    "delta_stack",
    "export_feature_text",
    "extract_cqcc",
    "extract_ifcc",
    "extract_lfcc",
    "extract_mfcc",
    "extract_static",
    "extract_full",
    "filterbank_log_energies",
    "instantaneous_frequency",
    "load_feature_matrix",
    "read_feature_header",
    "save_feature_matrix",
    "subband_tracks",
]


def extract_static(kind: str, w: Waveform, cfg: PipelineConfig) -> FeatureMatrix:
    """Dispatch one extractor by kind; 30 static coefficients per frame."""
    if kind == "lfcc":
        return extract_lfcc(w, cfg.framing, cfg.lfcc)
    if kind == "mfcc":
        return extract_mfcc(w, cfg.framing, cfg.mfcc)
    if kind == "ifcc":
        return extract_ifcc(w, cfg.framing, cfg.ifcc)
    if kind == "cqcc":
        return extract_cqcc(w, cfg.framing, cfg.cqcc)
    raise ValidationError(f"unknown feature kind {kind!r}")


def extract_full(kind: str, w: Waveform, cfg: PipelineConfig) -> FeatureMatrix:
    """Static coefficients plus delta and delta-delta blocks (90 columns)."""
    return append_deltas(extract_static(kind, w, cfg), cfg.deltas.window)
