"""Shared DSP primitives: framing, power spectra, the orthonormal DCT,
analytic-signal construction, and triangular filterbanks.

Every function here is a pure function of its arguments, so concurrent use
from batch workers is safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import ValidationError

#: Floor applied under every log of a power value so silent frames stay finite.
LOG_POWER_FLOOR = 1e-30

WINDOW_KINDS = ("rectangular", "raised-cosine")


@dataclass
class Waveform:
    """Mono audio samples in [-1, 1] together with their sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValidationError("waveform must be a non-empty 1-D sample array")
        if not np.all(np.isfinite(self.samples)):
            raise ValidationError("waveform samples must be finite")
        if np.max(np.abs(self.samples)) > 1.0 + 1e-9:
            raise ValidationError("waveform samples must lie in [-1, 1]")
        self.sample_rate_hz = int(self.sample_rate_hz)
        if self.sample_rate_hz <= 0:
            raise ValidationError("sample_rate_hz must be positive")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass
class FrameSequence:
    """Fixed-length frames cut from a waveform, window already applied."""

    frames: np.ndarray  # (n_frames, frame_len_samples)
    frame_len_samples: int
    hop_samples: int
    sample_rate_hz: int

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass
class AnalyticSpectrum:
    """DFT of an analytic signal: negative-frequency bins are zero."""

    bins: np.ndarray  # complex, length n
    n: int

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=np.complex128)
        if self.bins.ndim != 1 or self.bins.size != self.n:
            raise ValidationError("spectrum length must equal the transform size n")
        if not np.all(np.isfinite(self.bins)):
            raise ValidationError("spectrum bins must be finite")


@dataclass
class TriangularFilterBank:
    """Unit-peak triangular filters sampled on the FFT bin grid.

    Adjacent triangles overlap 50%: each one spans from the previous
    center to the next, so between the first and last centers the rows
    sum to one at every frequency.
    """

    scale: str  # "linear" or "mel"
    weights: np.ndarray  # (n_filters, n_bins), non-negative
    center_freqs_hz: np.ndarray  # (n_filters,), strictly increasing

    @property
    def n_filters(self) -> int:
        return self.weights.shape[0]


def window_fn(kind: str, length: int) -> np.ndarray:
    """Analysis window of the given kind; raised-cosine is 0.54 - 0.46*cos."""
    if kind not in WINDOW_KINDS:
        raise ValidationError(f"unknown window kind {kind!r}, expected one of {WINDOW_KINDS}")
    if length < 1:
        raise ValidationError("window length must be >= 1")
    if kind == "rectangular" or length == 1:
        return np.ones(length)
    n = np.arange(length)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (length - 1))


def pre_emphasis(x: np.ndarray, coeff: float) -> np.ndarray:
    """First-order high-pass y[n] = x[n] - coeff*x[n-1]; coeff 0 is a no-op."""
    x = np.asarray(x, dtype=np.float64)
    if coeff == 0.0:
        return x
    return np.concatenate(([x[0]], x[1:] - coeff * x[:-1]))


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    """Number of full frames: floor((n - frame_len)/hop) + 1, or 0 if short."""
    if n_samples < frame_len:
        return 0
    return (n_samples - frame_len) // hop + 1


def frame_signal(
    w: Waveform,
    frame_ms: float,
    hop_ms: float,
    window: str = "raised-cosine",
) -> FrameSequence:
    """Cut a waveform into left-aligned frames and apply the window.

    A trailing partial frame is dropped, never padded. A signal shorter
    than one frame yields an empty sequence; feature extractors treat
    that as an error.
    """
    if not (frame_ms >= hop_ms > 0):
        raise ValidationError("require frame_ms >= hop_ms > 0")
    fs = w.sample_rate_hz
    frame_len = int(round(frame_ms * fs / 1000.0))
    hop = int(round(hop_ms * fs / 1000.0))
    if frame_len < 1 or hop < 1:
        raise ValidationError("frame and hop must be at least one sample long")
    n = frame_count(len(w), frame_len, hop)
    win = window_fn(window, frame_len)
    frames = np.empty((n, frame_len))
    for i in range(n):
        start = i * hop
        frames[i] = w.samples[start : start + frame_len] * win
    return FrameSequence(frames, frame_len, hop, fs)


def power_spectrum(frame: np.ndarray, n_fft: int) -> np.ndarray:
    """|DFT|^2 of the zero-padded frame, bins 0..n_fft/2 inclusive."""
    frame = np.asarray(frame, dtype=np.float64)
    if n_fft < 1 or (n_fft & (n_fft - 1)) != 0:
        raise ValidationError("n_fft must be a power of two")
    if frame.ndim != 1 or frame.size > n_fft:
        raise ValidationError("frame must be 1-D and no longer than n_fft")
    spec = np.fft.rfft(frame, n_fft)
    return np.abs(spec) ** 2


def log_power(p: np.ndarray) -> np.ndarray:
    """Natural log of a power value, floored so silence stays finite."""
    return np.log(np.maximum(p, LOG_POWER_FLOOR))


def dct2_orthonormal(v: np.ndarray, n_keep: int) -> np.ndarray:
    """Type-II DCT with orthonormal scaling, truncated to n_keep coefficients.

    Works along the last axis, so a (n_frames, dim) matrix transforms
    row-wise. Coefficient 0 (the mean term) is kept.
    """
    v = np.asarray(v, dtype=np.float64)
    if not (1 <= n_keep <= v.shape[-1]):
        raise ValidationError(f"n_keep={n_keep} out of range for length {v.shape[-1]}")
    return scipy.fft.dct(v, type=2, norm="ortho", axis=-1)[..., :n_keep]


def idct2_orthonormal(c: np.ndarray) -> np.ndarray:
    """Inverse of the full-length orthonormal type-II DCT."""
    return scipy.fft.idct(np.asarray(c, dtype=np.float64), type=2, norm="ortho", axis=-1)


def analytic_signal(x: np.ndarray) -> np.ndarray:
    """Complex signal z with real(z) = x and zero negative-frequency content.

    Frequency-domain construction: keep DC (and Nyquist for even lengths),
    double the positive bins, zero the negative ones.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValidationError("analytic_signal expects a non-empty 1-D real signal")
    n = x.size
    spec = np.fft.fft(x)
    h = np.zeros(n)
    if n % 2 == 0:
        h[0] = 1.0
        h[n // 2] = 1.0
        h[1 : n // 2] = 2.0
    else:
        h[0] = 1.0
        h[1 : (n + 1) // 2] = 2.0
    return np.fft.ifft(spec * h)


def hz_to_mel(f_hz):
    """mel(f) = 2595 * log10(1 + f/700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(f_hz, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def build_filterbank(
    scale: str,
    n_filters: int,
    n_fft: int,
    sample_rate_hz: int,
    fmin_hz: float,
    fmax_hz: float,
) -> TriangularFilterBank:
    """Triangular filterbank with centers equally spaced on the given scale.

    "linear" spaces centers uniformly in Hz, "mel" uniformly in mel. The
    ramps themselves are linear in Hz, which makes overlapping unit-peak
    triangles a partition of unity between the first and last centers.
    """
    if scale not in ("linear", "mel"):
        raise ValidationError(f"unknown filterbank scale {scale!r}")
    if n_filters < 2:
        raise ValidationError("need at least 2 filters")
    if not (0.0 <= fmin_hz < fmax_hz <= sample_rate_hz / 2.0):
        raise ValidationError(
            f"invalid band edges: need 0 <= fmin ({fmin_hz}) < fmax ({fmax_hz}) <= {sample_rate_hz / 2}"
        )
    if scale == "linear":
        points_hz = np.linspace(fmin_hz, fmax_hz, n_filters + 2)
    else:
        points_hz = mel_to_hz(np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_filters + 2))
    n_bins = n_fft // 2 + 1
    bin_freqs = np.arange(n_bins) * (sample_rate_hz / n_fft)
    weights = np.zeros((n_filters, n_bins))
    for i in range(n_filters):
        lo, center, hi = points_hz[i], points_hz[i + 1], points_hz[i + 2]
        rising = (bin_freqs - lo) / (center - lo)
        falling = (hi - bin_freqs) / (hi - center)
        weights[i] = np.clip(np.minimum(rising, falling), 0.0, None)
    return TriangularFilterBank(scale, weights, points_hz[1:-1].copy())
