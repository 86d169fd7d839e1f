"""Instantaneous-frequency cepstral features.

The signal is split into uniform-width subbands by masking its DFT, each
subband is turned into an analytic signal, and the per-sample
instantaneous frequency (IF) is the real part of a transform-domain
derivative ratio. Short-term processing happens only at the end: per-frame
averages of each subband's IF feed a DCT across subbands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import FramingConfig, IfccConfig
from ..dsp import AnalyticSpectrum, Waveform, dct2_orthonormal, frame_count
from ..errors import ValidationError
from .matrix import FeatureMatrix

#: Samples whose analytic envelope falls below this are flagged and given IF 0;
#: isolated envelope nulls must not poison a whole frame's mean.
DENOMINATOR_FLOOR = 1e-12


def instantaneous_frequency(z_spectrum: AnalyticSpectrum) -> tuple[np.ndarray, int]:
    """Per-sample IF in radians/sample from an analytic signal's spectrum.

    theta'[n] = (2*pi/N) * Re( ifft(k*Z[k]) / ifft(Z[k]) ), with k the
    0-based bin index. Returns (theta', n_flagged) where flagged samples
    had a near-zero denominator and were set to 0.
    """
    z = z_spectrum.bins
    if not np.any(z):
        raise ValidationError("spectrum is identically zero")
    n = z_spectrum.n
    den = np.fft.ifft(z)
    num = np.fft.ifft(np.arange(n) * z)
    theta = np.zeros(n)
    ok = np.abs(den) >= DENOMINATOR_FLOOR
    theta[ok] = (2.0 * np.pi / n) * np.real(num[ok] / den[ok])
    return theta, int(np.count_nonzero(~ok))


@dataclass
class InstFreqTrack:
    """Per-subband IF and envelope over the whole utterance."""

    subband_if: np.ndarray  # (n_subbands, n_samples), radians/sample in [0, pi]
    subband_centers_hz: np.ndarray  # (n_subbands,)
    envelopes: np.ndarray  # (n_subbands, n_samples), analytic magnitudes
    sample_rate_hz: int
    n_flagged: int


def subband_tracks(w: Waveform, cfg: IfccConfig) -> InstFreqTrack:
    """Decompose the full utterance into analytic subbands and compute IF.

    Subband b covers [b, b+1) * fmax/n_subbands in Hz; each positive DFT
    bin is assigned to exactly one subband and weighted like an analytic
    signal (positive bins doubled, DC/Nyquist kept once).
    """
    cfg.validate()
    if cfg.fmax_hz > w.sample_rate_hz / 2:
        raise ValidationError(
            f"ifcc: fmax_hz={cfg.fmax_hz} exceeds Nyquist {w.sample_rate_hz / 2}"
        )
    x = w.samples
    n = x.size
    b_count = cfg.n_subbands
    width_hz = cfg.fmax_hz / b_count

    spec = np.fft.fft(x)
    analytic_weight = np.zeros(n)
    if n % 2 == 0:
        analytic_weight[0] = 1.0
        analytic_weight[n // 2] = 1.0
        analytic_weight[1 : n // 2] = 2.0
    else:
        analytic_weight[0] = 1.0
        analytic_weight[1 : (n + 1) // 2] = 2.0
    weighted = spec * analytic_weight

    pos = np.nonzero(analytic_weight)[0]
    freqs = pos * (w.sample_rate_hz / n)
    band_of_bin = np.clip((freqs / width_hz).astype(np.int64), 0, b_count - 1)

    banded = np.zeros((b_count, n), dtype=np.complex128)
    banded[band_of_bin, pos] = weighted[pos]

    z = np.fft.ifft(banded, axis=1)
    num = np.fft.ifft(banded * np.arange(n), axis=1)
    envelopes = np.abs(z)
    ok = envelopes >= DENOMINATOR_FLOOR
    theta = np.zeros((b_count, n))
    theta[ok] = (2.0 * np.pi / n) * np.real(num[ok] / z[ok])
    np.clip(theta, 0.0, np.pi, out=theta)

    centers = (np.arange(b_count) + 0.5) * width_hz
    return InstFreqTrack(theta, centers, envelopes, w.sample_rate_hz, int(np.count_nonzero(~ok)))


def pool_per_frame(values: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Mean over each frame window; (n_subbands, n_samples) -> (n_frames, n_subbands)."""
    n = values.shape[1]
    count = frame_count(n, frame_len, hop)
    pooled = np.empty((count, values.shape[0]))
    for i in range(count):
        start = i * hop
        pooled[i] = values[:, start : start + frame_len].mean(axis=1)
    return pooled


def extract_ifcc(w: Waveform, framing: FramingConfig, cfg: IfccConfig) -> FeatureMatrix:
    """DCT across subbands of frame-pooled instantaneous frequencies."""
    framing.validate()
    track = subband_tracks(w, cfg)
    fs = w.sample_rate_hz
    frame_len = int(round(framing.frame_ms * fs / 1000.0))
    hop = int(round(framing.hop_ms * fs / 1000.0))
    if frame_count(len(w), frame_len, hop) == 0:
        raise ValidationError(
            f"signal of {len(w)} samples is shorter than one {framing.frame_ms} ms frame"
        )
    pooled = pool_per_frame(track.subband_if, frame_len, hop)
    coeffs = dct2_orthonormal(pooled, cfg.n_coeffs)
    return FeatureMatrix("ifcc", coeffs, framing.hop_ms)
