"""Filterbank cepstral extractors: linear-scale (LFCC) and mel-scale (MFCC).

Per frame: power spectrum -> triangular filterbank energies -> log ->
orthonormal DCT truncated to the configured coefficient count. The mean
term (coefficient 0) is kept as the first coefficient.
"""

from __future__ import annotations

import numpy as np

from ..config import CepstralConfig, FramingConfig
from ..dsp import (
    TriangularFilterBank,
    Waveform,
    build_filterbank,
    dct2_orthonormal,
    frame_signal,
    log_power,
    pre_emphasis,
)
from ..errors import ValidationError
from .matrix import FeatureMatrix


def _framed_power(w: Waveform, framing: FramingConfig) -> np.ndarray:
    """(n_frames, n_fft//2 + 1) power spectra of the windowed frames."""
    framing.validate()
    x = pre_emphasis(w.samples, framing.pre_emphasis)
    seq = frame_signal(
        Waveform(x, w.sample_rate_hz), framing.frame_ms, framing.hop_ms, framing.window
    )
    if seq.n_frames == 0:
        raise ValidationError(
            f"signal of {len(w)} samples is shorter than one {framing.frame_ms} ms frame"
        )
    if seq.frame_len_samples > framing.n_fft:
        raise ValidationError(
            f"n_fft={framing.n_fft} smaller than the {seq.frame_len_samples}-sample frame"
        )
    spec = np.fft.rfft(seq.frames, n=framing.n_fft, axis=1)
    return np.abs(spec) ** 2


def filterbank_log_energies(
    w: Waveform, framing: FramingConfig, bank: TriangularFilterBank
) -> np.ndarray:
    """(n_frames, n_filters) floored log filterbank energies."""
    power = _framed_power(w, framing)
    if bank.weights.shape[1] != power.shape[1]:
        raise ValidationError("filterbank was built for a different n_fft")
    return log_power(power @ bank.weights.T)


def _extract(
    kind: str, scale: str, w: Waveform, framing: FramingConfig, cfg: CepstralConfig
) -> FeatureMatrix:
    cfg.validate()
    if cfg.fmax_hz > w.sample_rate_hz / 2:
        raise ValidationError(
            f"{kind}: fmax_hz={cfg.fmax_hz} exceeds Nyquist {w.sample_rate_hz / 2}"
        )
    bank = build_filterbank(
        scale, cfg.n_filters, framing.n_fft, w.sample_rate_hz, cfg.fmin_hz, cfg.fmax_hz
    )
    log_e = filterbank_log_energies(w, framing, bank)
    coeffs = dct2_orthonormal(log_e, cfg.n_coeffs)
    return FeatureMatrix(kind, coeffs, framing.hop_ms)


def extract_lfcc(w: Waveform, framing: FramingConfig, cfg: CepstralConfig) -> FeatureMatrix:
    """Cepstra over linearly spaced triangular filters."""
    return _extract("lfcc", "linear", w, framing, cfg)


def extract_mfcc(w: Waveform, framing: FramingConfig, cfg: CepstralConfig) -> FeatureMatrix:
    """Cepstra over mel-spaced triangular filters."""
    return _extract("mfcc", "mel", w, framing, cfg)
