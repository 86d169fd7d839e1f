"""Constant-Q transform and the cepstral features derived from it.

Bin center frequencies are geometric, f_k = fmin * 2^(k/B), and every
atom spans Q = 1/(2^(1/B) - 1) cycles, so window length N_k shrinks as
frequency grows: fine frequency resolution at the bottom, fine time
resolution at the top.

Two evaluation routes coexist on purpose. `cqt` is the optimized path
(stride-tricked windows + BLAS mat-vecs); `cqt_direct` is the defining
direct summation, kept as the reference the fast path is tested against.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..config import CqccConfig, FramingConfig
from ..dsp import Waveform, dct2_orthonormal, frame_count, log_power, window_fn
from ..errors import ValidationError
from .matrix import FeatureMatrix


@dataclass
class CqtKernel:
    """One complex atom per bin, unit l1 mass, centered at offset 0."""

    atoms: list  # k-th entry: complex array of length n_k[k]
    n_k: np.ndarray  # window lengths, non-increasing in k
    freqs_hz: np.ndarray  # geometric centers, f_{k+1}/f_k = 2^(1/B)
    bins_per_octave: int
    fmin_hz: float
    fmax_hz: float
    sample_rate_hz: int

    @property
    def n_bins(self) -> int:
        return self.freqs_hz.size


@dataclass
class CqtSpectrogram:
    y: np.ndarray  # (n_bins, n_frames) complex
    hop_samples: int
    frame_len_samples: int
    kernel: CqtKernel

    @property
    def n_frames(self) -> int:
        return self.y.shape[1]


@functools.lru_cache(maxsize=4)
def build_cqt_kernel(
    bins_per_octave: int, fmin_hz: float, fmax_hz: float, sample_rate_hz: int
) -> CqtKernel:
    """Atoms a_k[p] = win[p] * exp(j*2*pi*f_k*(p - N_k//2)/fs) / sum(win).

    The l1 normalization makes a matched unit-amplitude tone read
    |Y| ~ 1/2 at every bin, so log powers are comparable across k.
    """
    if bins_per_octave < 1:
        raise ValidationError("bins_per_octave must be >= 1")
    if not (0.0 < fmin_hz < fmax_hz <= sample_rate_hz / 2):
        raise ValidationError(
            f"need 0 < fmin ({fmin_hz}) < fmax ({fmax_hz}) <= Nyquist ({sample_rate_hz / 2})"
        )
    # The 1e-9 guard keeps an exact-octave span from losing its top bin
    # to floating-point rounding.
    n_bins = int(np.floor(bins_per_octave * np.log2(fmax_hz / fmin_hz) + 1e-9)) + 1
    k = np.arange(n_bins)
    freqs = fmin_hz * 2.0 ** (k / bins_per_octave)
    q = 1.0 / (2.0 ** (1.0 / bins_per_octave) - 1.0)
    n_k = np.round(q * sample_rate_hz / freqs).astype(np.int64)
    if n_k[-1] < 1:
        raise ValidationError("highest bin has an empty window; lower fmax or raise B")
    atoms = []
    for i in range(n_bins):
        length = int(n_k[i])
        win = window_fn("raised-cosine", length)
        offsets = np.arange(length) - length // 2
        atom = win * np.exp(2j * np.pi * freqs[i] * offsets / sample_rate_hz)
        atoms.append(atom / win.sum())
    return CqtKernel(
        atoms, n_k, freqs, bins_per_octave, float(fmin_hz), float(fmax_hz), int(sample_rate_hz)
    )


def _frame_centers(n_samples: int, frame_len: int, hop: int) -> np.ndarray:
    """Evaluation instants: the centers of the standard short-term frames.

    Sharing the short-term grid keeps every extractor's row count equal
    for a given input, so downstream models can mix them freely.
    """
    count = frame_count(n_samples, frame_len, hop)
    return frame_len // 2 + hop * np.arange(count)


def cqt(w: Waveform, kernel: CqtKernel, hop_samples: int, frame_len_samples: int) -> CqtSpectrogram:
    """Optimized transform; the signal is treated as zero outside its support."""
    if w.sample_rate_hz != kernel.sample_rate_hz:
        raise ValidationError(
            f"kernel built for {kernel.sample_rate_hz} Hz, signal is {w.sample_rate_hz} Hz"
        )
    if hop_samples < 1 or frame_len_samples < 1:
        raise ValidationError("hop and frame length must be positive")
    x = w.samples
    n_x = x.size
    centers = _frame_centers(n_x, frame_len_samples, hop_samples)
    if centers.size == 0:
        raise ValidationError("signal shorter than one frame")
    y = np.empty((kernel.n_bins, centers.size), dtype=np.complex128)

    h_max = int(kernel.n_k.max()) // 2
    xp = np.concatenate([np.zeros(h_max), x, np.zeros(h_max)])
    for k in range(kernel.n_bins):
        atom = kernel.atoms[k]
        length = int(kernel.n_k[k])
        half = length // 2
        if length < n_x:
            # Short atom: gather one signal window per frame, two real
            # mat-vecs against the atom.
            starts = centers + (h_max - half)
            windows = sliding_window_view(xp, length)[starts]
            y[k] = windows @ atom.real - 1j * (windows @ atom.imag)
        else:
            # Atom at least as long as the signal: slide the atom instead,
            # one signal-length slice per frame.
            pad = np.zeros(n_x)
            padded_r = np.concatenate([pad, atom.real, pad])
            padded_i = np.concatenate([pad, atom.imag, pad])
            starts = n_x + half - centers
            rows_r = sliding_window_view(padded_r, n_x)[starts]
            rows_i = sliding_window_view(padded_i, n_x)[starts]
            y[k] = rows_r @ x - 1j * (rows_i @ x)
    return CqtSpectrogram(y, hop_samples, frame_len_samples, kernel)


def cqt_direct(
    w: Waveform, kernel: CqtKernel, hop_samples: int, frame_len_samples: int
) -> CqtSpectrogram:
    """Reference evaluation: per (bin, frame) windowed inner product,
    indexing the raw signal directly. Slow; exists to pin down `cqt`."""
    if w.sample_rate_hz != kernel.sample_rate_hz:
        raise ValidationError(
            f"kernel built for {kernel.sample_rate_hz} Hz, signal is {w.sample_rate_hz} Hz"
        )
    x = w.samples
    n_x = x.size
    centers = _frame_centers(n_x, frame_len_samples, hop_samples)
    if centers.size == 0:
        raise ValidationError("signal shorter than one frame")
    y = np.zeros((kernel.n_bins, centers.size), dtype=np.complex128)
    for k in range(kernel.n_bins):
        conj_atom = np.conj(kernel.atoms[k])
        length = int(kernel.n_k[k])
        half = length // 2
        for i, center in enumerate(centers):
            base = center - half
            lo = max(0, -base)
            hi = min(length, n_x - base)
            if hi > lo:
                y[k, i] = np.dot(x[base + lo : base + hi], conj_atom[lo:hi])
    return CqtSpectrogram(y, hop_samples, frame_len_samples, kernel)


def resample_geometric_to_linear(
    values: np.ndarray, freqs_hz: np.ndarray, period_bins: int
) -> tuple[np.ndarray, np.ndarray]:
    """Linearly interpolate rows sampled at geometric freqs onto a uniform grid.

    The grid step is period_bins times the lowest geometric spacing, so the
    densest (lowest-frequency) region sets the resolution.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    freqs_hz = np.asarray(freqs_hz, dtype=np.float64)
    if freqs_hz.size < 2:
        raise ValidationError("need at least two frequency points to resample")
    if values.shape[1] != freqs_hz.size:
        raise ValidationError("value columns must match the frequency axis")
    step = period_bins * (freqs_hz[1] - freqs_hz[0])
    n_out = int(np.floor((freqs_hz[-1] - freqs_hz[0]) / step)) + 1
    grid = freqs_hz[0] + step * np.arange(n_out)
    out = np.empty((values.shape[0], n_out))
    for r in range(values.shape[0]):
        out[r] = np.interp(grid, freqs_hz, values[r])
    return grid, out


def extract_cqcc(w: Waveform, framing: FramingConfig, cfg: CqccConfig) -> FeatureMatrix:
    """log |CQT|^2 -> uniform resampling of the frequency axis -> DCT."""
    framing.validate()
    cfg.validate()
    if cfg.fmax_hz > w.sample_rate_hz / 2:
        raise ValidationError(
            f"cqcc: fmax_hz={cfg.fmax_hz} exceeds Nyquist {w.sample_rate_hz / 2}"
        )
    kernel = build_cqt_kernel(cfg.bins_per_octave, cfg.fmin_hz, cfg.fmax_hz, w.sample_rate_hz)
    fs = w.sample_rate_hz
    frame_len = int(round(framing.frame_ms * fs / 1000.0))
    hop = int(round(framing.hop_ms * fs / 1000.0))
    spec = cqt(w, kernel, hop, frame_len)
    log_pow = log_power(np.abs(spec.y) ** 2).T  # (n_frames, n_bins)
    _, resampled = resample_geometric_to_linear(log_pow, kernel.freqs_hz, cfg.resample_factor)
    if resampled.shape[1] < cfg.n_coeffs:
        raise ValidationError(
            f"cqcc: resampled axis has {resampled.shape[1]} points, "
            f"fewer than n_coeffs={cfg.n_coeffs}; lower resample_factor"
        )
    coeffs = dct2_orthonormal(resampled, cfg.n_coeffs)
    return FeatureMatrix("cqcc", coeffs, framing.hop_ms)
