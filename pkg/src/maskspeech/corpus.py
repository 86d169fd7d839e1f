"""Corpus handling: WAV I/O, 1-second segmentation, label manifests, and a
synthetic corpus generator for desk-scale end-to-end runs.

The generator makes voiced-speech-like signals (harmonic source with a
wandering f0, formant resonances, aspiration noise, syllabic amplitude
envelope) and emits each utterance twice: clean, and passed through a
"worn mask" filter that tilts energy down above a corner frequency and
adds low-level broadband noise. No acoustic fidelity to any particular
mask is claimed; the point is a controllable class difference that the
real front ends can pick up.
"""

from __future__ import annotations

import dataclasses
import json
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.signal

from .config import MaskConfig, SynthConfig
from .dsp import Waveform
from .errors import ValidationError
from .labels import LABEL_MASK, LABEL_NO_MASK

REQUIRED_RATE = 16000
PARTITIONS = ("train", "dev", "test")


# -- WAV I/O -------------------------------------------------------------

def load_wav(path: str | Path) -> Waveform:
    """Strict reader: PCM 16-bit, mono, 16 kHz, anything else is rejected."""
    try:
        with wave.open(str(path), "rb") as wf:
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            if channels != 1:
                raise ValidationError(f"{path}: channel count is {channels}, need mono")
            if width != 2:
                raise ValidationError(f"{path}: sample width is {width * 8} bit, need 16 bit")
            if rate != REQUIRED_RATE:
                raise ValidationError(f"{path}: sample rate is {rate} Hz, need {REQUIRED_RATE} Hz")
            raw = wf.readframes(wf.getnframes())
    except (wave.Error, EOFError) as exc:
        # wave raises EOFError (via chunk.py) when the file is shorter
        # than a RIFF chunk header
        raise ValidationError(f"{path}: not a readable WAV file ({exc})") from exc
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if samples.size == 0:
        raise ValidationError(f"{path}: contains no samples")
    return Waveform(samples, rate)


def save_wav(path: str | Path, w: Waveform):
    if w.sample_rate_hz != REQUIRED_RATE:
        raise ValidationError(f"refusing to write {w.sample_rate_hz} Hz audio")
    ints = np.clip(np.round(w.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(REQUIRED_RATE)
        wf.writeframes(ints.tobytes())


def segment_1s(w: Waveform) -> list:
    """Consecutive non-overlapping 1-second pieces; the remainder is dropped."""
    fs = w.sample_rate_hz
    count = len(w) // fs
    return [Waveform(w.samples[i * fs : (i + 1) * fs].copy(), fs) for i in range(count)]


# -- manifests -----------------------------------------------------------

@dataclass
class ManifestEntry:
    utt_id: str
    path: str  # relative to the manifest's directory
    partition: str
    label: str | None  # None only on the blinded test partition


@dataclass
class Manifest:
    entries: list

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.utt_id in seen:
                raise ValidationError(f"duplicate utterance id {e.utt_id!r}")
            seen.add(e.utt_id)
            if e.partition not in PARTITIONS:
                raise ValidationError(f"{e.utt_id}: unknown partition {e.partition!r}")
            if e.label is None:
                if e.partition != "test":
                    raise ValidationError(f"{e.utt_id}: {e.partition} entries need a label")
            elif e.label not in (LABEL_MASK, LABEL_NO_MASK):
                raise ValidationError(f"{e.utt_id}: unknown label {e.label!r}")

    def partition(self, name: str) -> list:
        if name not in PARTITIONS:
            raise ValidationError(f"unknown partition {name!r}")
        return [e for e in self.entries if e.partition == name]

    def labels(self) -> dict:
        return {e.utt_id: e.label for e in self.entries if e.label is not None}


def load_manifest(path: str | Path) -> Manifest:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValidationError(
                    f"{path}:{line_no}: expected utt_id<TAB>path<TAB>partition<TAB>label"
                )
            utt_id, rel_path, partition, label = parts
            entries.append(
                ManifestEntry(utt_id, rel_path, partition, None if label == "?" else label)
            )
    return Manifest(entries)


def save_manifest(manifest: Manifest, path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            fh.write(f"{e.utt_id}\t{e.path}\t{e.partition}\t{e.label or '?'}\n")


# -- mask simulation -----------------------------------------------------

@dataclass
class MaskFilterSpec:
    """Spectral tilt plus a little broadband noise.

    Gain is 1 below tilt_start_hz and falls log-linearly to
    -attenuation_db_at_8khz at 8 kHz. The added white noise sits
    additive_noise_db below the clean signal's RMS.
    """

    attenuation_db_at_8khz: float = 6.0
    tilt_start_hz: float = 1000.0
    additive_noise_db: float = -40.0

    def validate(self):
        if self.attenuation_db_at_8khz < 0:
            raise ValidationError("mask: attenuation_db_at_8khz must be >= 0")
        if not (0.0 < self.tilt_start_hz < 8000.0):
            raise ValidationError("mask: tilt_start_hz must lie in (0, 8000)")

    @classmethod
    def from_config(cls, cfg: MaskConfig) -> "MaskFilterSpec":
        return cls(cfg.attenuation_db, cfg.tilt_start_hz, cfg.additive_noise_db)


def apply_mask_filter(w: Waveform, spec: MaskFilterSpec, rng: np.random.Generator) -> Waveform:
    spec.validate()
    x = w.samples
    n = x.size
    freqs = np.fft.rfftfreq(n, 1.0 / w.sample_rate_hz)
    top = 8000.0
    gain = np.ones_like(freqs)
    above = freqs > spec.tilt_start_hz
    gain_db = (
        -spec.attenuation_db_at_8khz
        * np.log2(np.maximum(freqs[above], spec.tilt_start_hz) / spec.tilt_start_hz)
        / np.log2(top / spec.tilt_start_hz)
    )
    gain[above] = 10.0 ** (gain_db / 20.0)
    y = np.fft.irfft(np.fft.rfft(x) * gain, n)

    clean_rms = float(np.sqrt(np.mean(x * x)))
    noise_rms = clean_rms * 10.0 ** (spec.additive_noise_db / 20.0)
    y = y + rng.standard_normal(n) * noise_rms
    return Waveform(np.clip(y, -1.0, 1.0), w.sample_rate_hz)


# -- synthetic speech ----------------------------------------------------

@dataclass
class _Voice:
    f0_base_hz: float
    formants_hz: tuple
    bandwidths_hz: tuple
    rolloff_db_oct: float
    aspiration: float
    hf_noise: float
    syllable_rate_hz: float


def _sample_voice(rng: np.random.Generator) -> _Voice:
    f1 = rng.uniform(300.0, 850.0)
    f2 = rng.uniform(f1 + 500.0, 2400.0)
    f3 = rng.uniform(2500.0, 3200.0)
    f4 = rng.uniform(3400.0, 4400.0)
    return _Voice(
        f0_base_hz=rng.uniform(100.0, 250.0),
        formants_hz=(f1, f2, f3, f4),
        bandwidths_hz=tuple(rng.uniform(60.0, 180.0, size=4)),
        rolloff_db_oct=rng.uniform(9.0, 13.0),
        aspiration=rng.uniform(0.06, 0.12),
        # Sets a guaranteed 4-8 kHz energy share of roughly 5-9%, enough that
        # any reasonable tilt removes more energy than the mask noise adds.
        hf_noise=rng.uniform(0.22, 0.30),
        syllable_rate_hz=rng.uniform(2.5, 5.0),
    )


def _formant_cascade(x: np.ndarray, voice: _Voice, fs: int) -> np.ndarray:
    for f_hz, bw_hz in zip(voice.formants_hz, voice.bandwidths_hz):
        r = np.exp(-np.pi * bw_hz / fs)
        theta = 2.0 * np.pi * f_hz / fs
        x = scipy.signal.lfilter([1.0 - r], [1.0, -2.0 * r * np.cos(theta), r * r], x)
    return x


def _synth_utterance(rng: np.random.Generator, voice: _Voice, n: int, fs: int) -> np.ndarray:
    t = np.arange(n) / fs

    # f0 wanders slowly around the speaker's base.
    ctrl = rng.uniform(-1.0, 1.0, size=8)
    f0 = voice.f0_base_hz * (1.0 + 0.06 * np.interp(t, np.linspace(0, t[-1], 8), ctrl))
    phase = 2.0 * np.pi * np.cumsum(f0) / fs

    n_harm = max(3, int(7600.0 / f0.max()))
    h = np.arange(1, n_harm + 1)
    amps = h ** (-voice.rolloff_db_oct / 6.02)  # glottal-like spectral rolloff
    offsets = rng.uniform(0.0, 2.0 * np.pi, size=n_harm)
    voiced = (amps * np.sin(np.outer(phase, h) + offsets)).sum(axis=1)
    voiced = _formant_cascade(voiced, voice, fs)

    # Syllabic envelope: periodic bumps over a small floor, plus slow wander.
    # The floor keeps troughs quietly voiced rather than silent; it is small
    # so that a mask's added noise audibly dominates the troughs while the
    # clean signal keeps its harmonic structure there.
    env_floor = 0.02
    syl_phase = rng.uniform(0.0, 2.0 * np.pi)
    shape = rng.uniform(0.8, 2.0)
    bumps = (0.5 - 0.5 * np.cos(2.0 * np.pi * voice.syllable_rate_hz * t + syl_phase)) ** shape
    wander = 0.7 + 0.3 * np.interp(t, np.linspace(0, t[-1], 4), rng.uniform(0.0, 1.0, size=4))
    env = (env_floor + (1.0 - env_floor) * bumps) * wander

    aspiration = _formant_cascade(rng.standard_normal(n), voice, fs)
    hf = rng.standard_normal(n)  # flat-spectrum component keeps 4-8 kHz populated

    def rms(v):
        return float(np.sqrt(np.mean(v * v))) or 1.0

    v = env * voiced
    x = (
        v
        + env * aspiration * (voice.aspiration * rms(voiced) / rms(aspiration))
        + env * hf * voice.hf_noise * rms(voiced)
    )
    x *= rng.uniform(0.35, 0.7) / np.max(np.abs(x))
    return x


def synth_corpus(out_dir: str | Path, cfg: SynthConfig, mask: MaskFilterSpec) -> Manifest:
    """Generate WAVs + manifest + metadata under out_dir; returns the manifest.

    Speakers 0..n_speakers-1 alternate train/dev (even/odd), then
    n_test_speakers more go to test. Every utterance appears as a clean
    (no_mask) and a mask-filtered (mask) file, cut into 1 s segments, so
    labels are exactly balanced within each partition.
    """
    cfg.validate()
    mask.validate()
    if cfg.sample_rate_hz != REQUIRED_RATE:
        raise ValidationError(f"synth: sample_rate_hz must be {REQUIRED_RATE}")
    out_dir = Path(out_dir)
    fs = cfg.sample_rate_hz
    n_samples = int(round(cfg.utterance_s * fs))

    total_speakers = cfg.n_speakers + cfg.n_test_speakers
    seed_seq = np.random.SeedSequence(cfg.seed)
    speaker_seqs = seed_seq.spawn(total_speakers)

    entries = []
    for spk in range(total_speakers):
        if spk < cfg.n_speakers:
            partition = "train" if spk % 2 == 0 else "dev"
        else:
            partition = "test"
        part_dir = out_dir / partition
        part_dir.mkdir(parents=True, exist_ok=True)
        voice_seq, *utt_seqs = speaker_seqs[spk].spawn(cfg.utterances_per_speaker + 1)
        voice = _sample_voice(np.random.default_rng(voice_seq))
        for utt in range(cfg.utterances_per_speaker):
            rng = np.random.default_rng(utt_seqs[utt])
            clean = Waveform(_synth_utterance(rng, voice, n_samples, fs), fs)
            masked = apply_mask_filter(clean, mask, rng)
            for tag, label, w in (
                ("clean", LABEL_NO_MASK, clean),
                ("masked", LABEL_MASK, masked),
            ):
                for seg_idx, seg in enumerate(segment_1s(w)):
                    utt_id = f"spk{spk:02d}-u{utt:03d}-{tag}-{seg_idx:02d}"
                    rel = f"{partition}/{utt_id}.wav"
                    save_wav(out_dir / rel, seg)
                    entries.append(ManifestEntry(utt_id, rel, partition, label))

    manifest = Manifest(entries)
    save_manifest(manifest, out_dir / "manifest.tsv")
    meta = {
        "synth": dataclasses.asdict(cfg),
        "mask": dataclasses.asdict(mask),
    }
    with open(out_dir / "metadata.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return manifest
