"""Fourier-domain instantaneous frequency and the subband IFCC extractor."""

import numpy as np
import pytest

from maskspeech.config import FramingConfig, IfccConfig
from maskspeech.dsp import AnalyticSpectrum, Waveform
from maskspeech.errors import ValidationError
from maskspeech.features.instfreq import (
    extract_ifcc,
    instantaneous_frequency,
    pool_per_frame,
    subband_tracks,
)

from conftest import make_tone


def single_bin_spectrum(n, k0, amp=1.0):
    bins = np.zeros(n, dtype=complex)
    bins[k0] = amp * n
    return AnalyticSpectrum(bins, n)


class TestSingleBin:
    def test_exact_bin_frequency(self):
        theta, flagged = instantaneous_frequency(single_bin_spectrum(1024, 37))
        assert flagged == 0
        assert np.max(np.abs(theta - 2 * np.pi * 37 / 1024)) < 1e-12

    def test_many_random_bins(self, rng):
        for _ in range(30):
            n = int(rng.integers(16, 2048))
            k0 = int(rng.integers(1, n // 2))
            theta, _ = instantaneous_frequency(single_bin_spectrum(n, k0))
            assert np.max(np.abs(theta - 2 * np.pi * k0 / n)) < 1e-9

    def test_amplitude_does_not_matter(self):
        a, _ = instantaneous_frequency(single_bin_spectrum(512, 100, amp=0.01))
        b, _ = instantaneous_frequency(single_bin_spectrum(512, 100, amp=40.0))
        assert np.max(np.abs(a - b)) < 1e-12


class TestTwoTone:
    def test_equal_tones_read_the_midpoint_everywhere(self):
        # z = e0 + e1 factors as 2cos(...) * e^{j*mid*n}; the quotient
        # (k0 e0 + k1 e1)/(e0 + e1) has real part (k0+k1)/2 at every
        # sample where the envelope is nonzero, so the estimate is exact.
        n, k0, k1 = 1024, 37, 90
        idx = np.arange(n)
        z = np.exp(2j * np.pi * k0 * idx / n) + np.exp(2j * np.pi * k1 * idx / n)
        theta, flagged = instantaneous_frequency(AnalyticSpectrum(np.fft.fft(z), n))
        mid = 2 * np.pi * (k0 + k1) / (2 * n)
        live = theta != 0.0
        assert np.max(np.abs(theta[live] - mid)) < 1e-9
        # envelope nulls: solutions of (k1-k0)*m = n/2 (mod n)
        nulls = sum(1 for m in range(n) if ((k1 - k0) * m - n // 2) % n == 0)
        assert flagged == nulls

    def test_unequal_tones_average_to_the_dominant_bin(self):
        # with distinct amplitudes the envelope never vanishes and the
        # time-averaged estimate equals the stronger component exactly
        n, k0, k1 = 1024, 37, 90
        idx = np.arange(n)
        z = 3.0 * np.exp(2j * np.pi * k0 * idx / n) + np.exp(2j * np.pi * k1 * idx / n)
        theta, flagged = instantaneous_frequency(AnalyticSpectrum(np.fft.fft(z), n))
        assert flagged == 0
        assert theta.mean() == pytest.approx(2 * np.pi * k0 / n, abs=1e-9)

    def test_dominance_is_symmetric(self):
        n, k0, k1 = 512, 20, 101
        idx = np.arange(n)
        z = np.exp(2j * np.pi * k0 * idx / n) + 2.5 * np.exp(2j * np.pi * k1 * idx / n)
        theta, _ = instantaneous_frequency(AnalyticSpectrum(np.fft.fft(z), n))
        assert theta.mean() == pytest.approx(2 * np.pi * k1 / n, abs=1e-9)


class TestGuards:
    def test_zero_spectrum_rejected(self):
        with pytest.raises(ValidationError):
            instantaneous_frequency(AnalyticSpectrum(np.zeros(64, dtype=complex), 64))

    def test_envelope_nulls_are_flagged_and_zeroed(self):
        # e^{j 2 pi k n / N} - 1 is analytic and has gcd(k, N) exact zeros
        n, k = 16, 4
        bins = np.zeros(n, dtype=complex)
        bins[k] = n
        bins[0] = -n
        theta, flagged = instantaneous_frequency(AnalyticSpectrum(bins, n))
        assert flagged == np.gcd(k, n)
        assert theta[0] == 0.0


class TestSubbands:
    def test_tone_lands_in_its_subband(self):
        track = subband_tracks(make_tone(2000), IfccConfig())
        width = 8000 / 60
        band = int(2000 // width)
        # strongest envelope in the band containing the tone
        assert np.argmax(track.envelopes.mean(axis=1)) == band
        # and that band reads the tone frequency
        hz = track.subband_if[band].mean() * 16000 / (2 * np.pi)
        assert hz == pytest.approx(2000.0, abs=1.0)

    def test_band_centers(self):
        track = subband_tracks(make_tone(500), IfccConfig())
        width = 8000 / 60
        assert track.subband_centers_hz[0] == pytest.approx(width / 2)
        assert np.allclose(np.diff(track.subband_centers_hz), width)

    def test_pooling_shape_and_means(self):
        values = np.arange(12.0).reshape(2, 6)  # 2 bands, 6 samples
        pooled = pool_per_frame(values, frame_len=4, hop=2)
        assert pooled.shape == (2, 2)
        assert pooled[0, 0] == pytest.approx(np.mean([0, 1, 2, 3]))
        assert pooled[1, 1] == pytest.approx(np.mean([8, 9, 10, 11]))


class TestExtractor:
    def test_shape(self):
        fm = extract_ifcc(make_tone(1500), FramingConfig(), IfccConfig())
        assert fm.rows.shape == (99, 30)
        assert fm.kind == "ifcc"

    def test_amplitude_invariance(self):
        quiet = make_tone(1234, amp=0.05)
        loud = make_tone(1234, amp=0.8)
        a = extract_ifcc(quiet, FramingConfig(), IfccConfig())
        b = extract_ifcc(loud, FramingConfig(), IfccConfig())
        assert np.max(np.abs(a.rows - b.rows)) < 1e-9

    def test_silence_degrades_to_flagged_constant_rows(self):
        # a silent input has no analytic envelope anywhere: every sample is
        # flagged, the track is all zeros, features are constant
        w = Waveform(np.zeros(16000), 16000)
        track = subband_tracks(w, IfccConfig())
        assert track.n_flagged == 60 * 16000
        fm = extract_ifcc(w, FramingConfig(), IfccConfig())
        assert np.allclose(fm.rows, fm.rows[0])

    def test_too_short_input_errors(self):
        w = make_tone(1000, seconds=0.01)
        with pytest.raises(ValidationError):
            extract_ifcc(w, FramingConfig(), IfccConfig())
