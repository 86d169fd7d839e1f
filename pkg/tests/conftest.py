"""Shared fixtures: deterministic tones, a small synthetic corpus, desk-scale configs."""

import numpy as np
import pytest

from maskspeech.config import CqccConfig, GmmConfig, PipelineConfig, SynthConfig
from maskspeech.corpus import MaskFilterSpec, synth_corpus
from maskspeech.dsp import Waveform

SAMPLE_RATE = 16_000


def make_tone(freq_hz, amp=0.4, seconds=1.0, rate=SAMPLE_RATE, phase=0.0):
    t = np.arange(int(round(seconds * rate))) / rate
    return Waveform(amp * np.sin(2 * np.pi * freq_hz * t + phase), rate)


def desk_config() -> PipelineConfig:
    """Pipeline config scaled for tests: small CQT kernel, small mixtures.

    The constant-Q kernel at production settings takes seconds to build;
    12 bins/octave from 600 Hz keeps every unit test under a second while
    exercising the same code paths.
    """
    cfg = PipelineConfig()
    cfg.cqcc = CqccConfig(
        bins_per_octave=12, fmin_hz=600.0, fmax_hz=7800.0, resample_factor=4
    )
    cfg.gmm = GmmConfig(n_mixtures=8, seed=0)
    return cfg


@pytest.fixture
def tone():
    return make_tone


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)


@pytest.fixture
def cfg():
    return desk_config()


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """4 speakers x 6 utterances with the default mask filter, built once."""
    out = tmp_path_factory.mktemp("corpus")
    synth = SynthConfig(n_speakers=4, utterances_per_speaker=6, seed=11)
    manifest = synth_corpus(out, synth, MaskFilterSpec())
    return out, manifest
