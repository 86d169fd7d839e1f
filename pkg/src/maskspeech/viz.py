"""Diagnostic views: spectrograms and pyknograms, as images plus exact
plain-text data dumps.

The image is presentation only; every number a reader might care about is
in the sidecar dump, which is byte-deterministic for fixed input. Matplotlib
is imported lazily so batch feature jobs never pay for it.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import FramingConfig, IfccConfig
from .dsp import Waveform, frame_signal
from .errors import ValidationError
from .features.instfreq import pool_per_frame, subband_tracks

#: Spectrogram floor in dB; silence renders as a uniform field at this value.
DB_FLOOR = -120.0


@dataclass
class SpectrogramGrid:
    times_s: np.ndarray  # frame centers
    freqs_hz: np.ndarray
    log_power_db: np.ndarray  # (n_frames, n_bins)


@dataclass
class Pyknogram:
    """Amplitude-pruned scatter of per-subband instantaneous frequencies."""

    points: np.ndarray  # (n_points, 3) columns: time_s, freq_hz, amplitude
    n_subbands: int
    amp_threshold: float


def compute_spectrogram(w: Waveform, framing: FramingConfig) -> SpectrogramGrid:
    framing.validate()
    seq = frame_signal(w, framing.frame_ms, framing.hop_ms, framing.window)
    if seq.n_frames == 0:
        raise ValidationError("signal shorter than one frame")
    if seq.frame_len_samples > framing.n_fft:
        raise ValidationError(
            f"n_fft={framing.n_fft} smaller than the {seq.frame_len_samples}-sample frame"
        )
    power = np.abs(np.fft.rfft(seq.frames, n=framing.n_fft, axis=1)) ** 2
    db = 10.0 * np.log10(np.maximum(power, 10.0 ** (DB_FLOOR / 10.0)))
    fs = w.sample_rate_hz
    times = (seq.frame_len_samples / 2.0 + seq.hop_samples * np.arange(seq.n_frames)) / fs
    freqs = np.arange(framing.n_fft // 2 + 1) * (fs / framing.n_fft)
    return SpectrogramGrid(times, freqs, db)


def compute_pyknogram(
    w: Waveform,
    framing: FramingConfig,
    cfg: IfccConfig,
    amp_threshold_frac: float = 0.05,
) -> Pyknogram:
    """Frame-pooled subband IFs as (time, frequency, amplitude) points.

    A point survives only if its pooled envelope amplitude is STRICTLY
    above amp_threshold_frac times the utterance's peak pooled envelope,
    so silence keeps zero points. Points are ordered frame-major, then by
    subband, which makes dumps reproducible.
    """
    framing.validate()
    if not (0.0 <= amp_threshold_frac < 1.0):
        raise ValidationError("amp_threshold_frac must be in [0, 1)")
    track = subband_tracks(w, cfg)
    fs = w.sample_rate_hz
    frame_len = int(round(framing.frame_ms * fs / 1000.0))
    hop = int(round(framing.hop_ms * fs / 1000.0))
    pooled_if = pool_per_frame(track.subband_if, frame_len, hop)  # (n_frames, B)
    if pooled_if.shape[0] == 0:
        raise ValidationError("signal shorter than one frame")
    pooled_amp = pool_per_frame(track.envelopes, frame_len, hop)

    threshold = amp_threshold_frac * float(pooled_amp.max())
    times = (frame_len / 2.0 + hop * np.arange(pooled_if.shape[0])) / fs
    keep = pooled_amp > threshold
    frame_idx, band_idx = np.nonzero(keep)
    freqs = pooled_if[frame_idx, band_idx] * fs / (2.0 * np.pi)
    points = np.column_stack([times[frame_idx], freqs, pooled_amp[frame_idx, band_idx]])
    return Pyknogram(points, cfg.n_subbands, threshold)


# -- rendering -----------------------------------------------------------

def _dump_path(out_path: Path) -> Path:
    return out_path.with_suffix(out_path.suffix + ".txt")


def _dump_spectrogram(grid: SpectrogramGrid, path: Path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# spectrogram dB grid, rows = frames\n")
        fh.write("times_s " + " ".join(repr(float(v)) for v in grid.times_s) + "\n")
        fh.write("freqs_hz " + " ".join(repr(float(v)) for v in grid.freqs_hz) + "\n")
        for row in grid.log_power_db:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def _dump_pyknogram(pyk: Pyknogram, path: Path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# pyknogram points, n_subbands={pyk.n_subbands} "
                 f"amp_threshold={float(pyk.amp_threshold)!r}\n")
        for time_s, freq_hz, amp in pyk.points:
            fh.write(f"{float(time_s)!r} {float(freq_hz)!r} {float(amp)!r}\n")


def render(obj, out_path: str | Path, style: str = "default") -> Path:
    """Write a PNG panel plus its text dump next to it; returns the dump path.

    Accepts a SpectrogramGrid or a Pyknogram. An empty pyknogram still
    produces a (blank) panel and succeeds.
    """
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(8, 4), dpi=100)
    try:
        if isinstance(obj, SpectrogramGrid):
            mesh = ax.pcolormesh(
                obj.times_s, obj.freqs_hz, obj.log_power_db.T, shading="nearest", cmap="magma"
            )
            fig.colorbar(mesh, ax=ax, label="dB")
            ax.set_ylabel("frequency (Hz)")
        elif isinstance(obj, Pyknogram):
            if len(obj.points):
                ax.scatter(obj.points[:, 0], obj.points[:, 1], s=2.0,
                           c=obj.points[:, 2], cmap="viridis")
            ax.set_ylabel("instantaneous frequency (Hz)")
        else:
            raise ValidationError(f"cannot render object of type {type(obj).__name__}")
        ax.set_xlabel("time (s)")
        fig.tight_layout()
        fig.savefig(out_path)
    finally:
        plt.close(fig)

    dump = _dump_path(out_path)
    if isinstance(obj, SpectrogramGrid):
        _dump_spectrogram(obj, dump)
    else:
        _dump_pyknogram(obj, dump)
    return dump
