"""WAV handling, manifests, the mask filter, and the synthetic corpus."""

import wave

import numpy as np
import pytest

from maskspeech.config import SynthConfig
from maskspeech.corpus import (
    Manifest,
    ManifestEntry,
    MaskFilterSpec,
    apply_mask_filter,
    load_manifest,
    load_wav,
    save_manifest,
    save_wav,
    segment_1s,
    synth_corpus,
)
from maskspeech.dsp import Waveform
from maskspeech.errors import ValidationError

from conftest import make_tone


def write_raw_wav(path, rate=16000, channels=1, width=2, n=1600):
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(width)
        wf.setframerate(rate)
        wf.writeframes(b"\x00" * (n * width * channels))


class TestWavIo:
    def test_round_trip_within_quantization(self, tmp_path):
        w = make_tone(440, amp=0.5)
        path = tmp_path / "t.wav"
        save_wav(path, w)
        back = load_wav(path)
        assert back.sample_rate_hz == 16000
        assert len(back) == len(w)
        assert np.max(np.abs(back.samples - w.samples)) <= 1.0 / 32768.0

    def test_wrong_rate_named(self, tmp_path):
        path = tmp_path / "r.wav"
        write_raw_wav(path, rate=8000)
        with pytest.raises(ValidationError, match="sample rate is 8000"):
            load_wav(path)

    def test_stereo_named(self, tmp_path):
        path = tmp_path / "s.wav"
        write_raw_wav(path, channels=2)
        with pytest.raises(ValidationError, match="channel count is 2"):
            load_wav(path)

    def test_wrong_width_named(self, tmp_path):
        path = tmp_path / "w.wav"
        write_raw_wav(path, width=1)
        with pytest.raises(ValidationError, match="sample width is 8 bit"):
            load_wav(path)

    def test_garbage_file_rejected(self, tmp_path):
        path = tmp_path / "g.wav"
        path.write_bytes(b"not audio at all")
        with pytest.raises(ValidationError, match="not a readable WAV"):
            load_wav(path)

    def test_empty_wav_rejected(self, tmp_path):
        path = tmp_path / "e.wav"
        write_raw_wav(path, n=0)
        with pytest.raises(ValidationError, match="no samples"):
            load_wav(path)


class TestSegmentation:
    @pytest.mark.parametrize("seconds,count", [(10.0, 10), (2.5, 2), (0.5, 0), (1.0, 1)])
    def test_counts(self, seconds, count):
        segs = segment_1s(make_tone(300, seconds=seconds))
        assert len(segs) == count
        assert all(len(s) == 16000 for s in segs)

    def test_segments_tile_the_prefix(self):
        w = make_tone(123, seconds=3.7)
        segs = segment_1s(w)
        joined = np.concatenate([s.samples for s in segs])
        assert np.array_equal(joined, w.samples[: 3 * 16000])


class TestManifest:
    def entry(self, utt="u1", part="train", label="mask"):
        return ManifestEntry(utt, f"{part}/{utt}.wav", part, label)

    def test_round_trip(self, tmp_path):
        m = Manifest([
            ManifestEntry("a", "train/a.wav", "train", "mask"),
            ManifestEntry("b", "dev/b.wav", "dev", "no_mask"),
            ManifestEntry("c", "test/c.wav", "test", None),
        ])
        path = tmp_path / "manifest.tsv"
        save_manifest(m, path)
        back = load_manifest(path)
        assert [e.utt_id for e in back.entries] == ["a", "b", "c"]
        assert back.entries[2].label is None
        assert back.labels() == {"a": "mask", "b": "no_mask"}

    def test_duplicate_id_named(self):
        with pytest.raises(ValidationError, match="duplicate utterance id 'u1'"):
            Manifest([self.entry(), self.entry()])

    def test_unlabeled_train_rejected(self):
        with pytest.raises(ValidationError, match="need a label"):
            Manifest([ManifestEntry("u1", "train/u1.wav", "train", None)])

    def test_unknown_partition_rejected(self):
        with pytest.raises(ValidationError, match="unknown partition"):
            Manifest([ManifestEntry("u1", "x/u1.wav", "eval", "mask")])

    def test_unknown_label_rejected(self):
        with pytest.raises(ValidationError, match="unknown label"):
            Manifest([ManifestEntry("u1", "train/u1.wav", "train", "masked!")])

    def test_bad_column_count_rejected(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("u1\ttrain/u1.wav\ttrain\n")
        with pytest.raises(ValidationError):
            load_manifest(path)


class TestMaskFilter:
    def band_power(self, w, lo, hi):
        spec = np.abs(np.fft.rfft(w.samples)) ** 2
        freqs = np.fft.rfftfreq(len(w), 1.0 / 16000)
        return spec[(freqs >= lo) & (freqs < hi)].sum()

    def test_energy_strictly_decreases(self, rng):
        w = make_tone(3000, amp=0.4)
        masked = apply_mask_filter(w, MaskFilterSpec(), rng)
        assert np.sum(masked.samples**2) < np.sum(w.samples**2)

    def test_attenuation_reaches_stated_depth_at_8k(self, rng):
        # broadband probe; bins near 8 kHz must drop by about 6 dB
        x = np.clip(rng.normal(scale=0.15, size=16000), -1, 1)
        w = Waveform(x, 16000)
        masked = apply_mask_filter(w, MaskFilterSpec(additive_noise_db=-80.0), rng)
        drop_db = 10 * np.log10(
            self.band_power(w, 7800, 8000) / self.band_power(masked, 7800, 8000)
        )
        assert drop_db == pytest.approx(6.0, abs=0.4)

    def test_below_tilt_start_untouched(self, rng):
        x = np.clip(rng.normal(scale=0.15, size=16000), -1, 1)
        w = Waveform(x, 16000)
        masked = apply_mask_filter(w, MaskFilterSpec(additive_noise_db=-80.0), rng)
        low_in = self.band_power(w, 100, 900)
        low_out = self.band_power(masked, 100, 900)
        assert low_out == pytest.approx(low_in, rel=1e-3)

    def test_zero_phase(self, rng):
        # the tilt must not delay the signal: peak cross-correlation at lag 0
        w = make_tone(500, amp=0.4)
        masked = apply_mask_filter(w, MaskFilterSpec(additive_noise_db=-80.0), rng)
        xc = np.correlate(masked.samples[1000:2000], w.samples[1000:2000], "full")
        assert np.argmax(xc) == len(xc) // 2

    def test_validation(self):
        with pytest.raises(ValidationError):
            MaskFilterSpec(attenuation_db_at_8khz=-1.0).validate()
        with pytest.raises(ValidationError):
            MaskFilterSpec(tilt_start_hz=0.0).validate()


class TestSynthCorpus:
    def test_balance_and_layout(self, tiny_corpus):
        _, manifest = tiny_corpus
        # 4 speakers x 6 utterances x 2 conditions, 1 s each
        assert len(manifest.entries) == 48
        for part in ("train", "dev"):
            entries = manifest.partition(part)
            assert len(entries) == 24
            n_mask = sum(1 for e in entries if e.label == "mask")
            assert n_mask == 12

    def test_speakers_disjoint_across_partitions(self, tiny_corpus):
        _, manifest = tiny_corpus

        def speakers(part):
            return {e.utt_id.split("-")[0] for e in manifest.partition(part)}

        assert speakers("train") & speakers("dev") == set()

    def test_wavs_are_one_second_16k(self, tiny_corpus):
        corpus_dir, manifest = tiny_corpus
        for e in manifest.entries[:6]:
            w = load_wav(corpus_dir / e.path)
            assert len(w) == 16000
            assert w.sample_rate_hz == 16000

    def test_masked_pair_loses_energy_and_high_band(self, tiny_corpus):
        corpus_dir, manifest = tiny_corpus
        helper = TestMaskFilter()
        pairs = {}
        for e in manifest.entries:
            stem = e.utt_id.rsplit("-", 2)[0] + "-" + e.utt_id.rsplit("-", 1)[1]
            pairs.setdefault(stem, {})[e.label] = e
        for stem, pair in pairs.items():
            clean = load_wav(corpus_dir / pair["no_mask"].path)
            masked = load_wav(corpus_dir / pair["mask"].path)
            e_clean = np.sum(clean.samples**2)
            e_masked = np.sum(masked.samples**2)
            assert e_masked < e_clean, stem
            hf_clean = helper.band_power(clean, 4000, 8000) / e_clean
            hf_masked = helper.band_power(masked, 4000, 8000) / e_masked
            assert hf_masked < hf_clean, stem

    def test_clean_side_has_high_band_content(self, tiny_corpus):
        # the mask has nothing to remove unless voices carry 4-8 kHz energy
        corpus_dir, manifest = tiny_corpus
        helper = TestMaskFilter()
        for e in manifest.entries:
            if e.label != "no_mask":
                continue
            w = load_wav(corpus_dir / e.path)
            frac = helper.band_power(w, 4000, 8000) / np.sum(w.samples**2)
            assert frac > 0.01, e.utt_id

    def test_regeneration_is_bit_identical(self, tmp_path, tiny_corpus):
        corpus_dir, manifest = tiny_corpus
        again = tmp_path / "again"
        synth_corpus(again, SynthConfig(n_speakers=4, utterances_per_speaker=6, seed=11), MaskFilterSpec())
        assert (again / "manifest.tsv").read_bytes() == (corpus_dir / "manifest.tsv").read_bytes()
        for e in manifest.entries[:8]:
            assert (again / e.path).read_bytes() == (corpus_dir / e.path).read_bytes()

    def test_different_seed_changes_audio(self, tmp_path, tiny_corpus):
        corpus_dir, manifest = tiny_corpus
        other = tmp_path / "other"
        synth_corpus(other, SynthConfig(n_speakers=4, utterances_per_speaker=6, seed=12), MaskFilterSpec())
        e = manifest.entries[0]
        assert (other / e.path).read_bytes() != (corpus_dir / e.path).read_bytes()

    def test_test_partition_speakers_appended(self, tmp_path):
        cfg = SynthConfig(n_speakers=2, n_test_speakers=1, utterances_per_speaker=2, seed=5)
        manifest = synth_corpus(tmp_path / "c", cfg, MaskFilterSpec())
        test_entries = manifest.partition("test")
        assert len(test_entries) == 4  # 1 speaker x 2 utts x 2 conditions
        assert all(e.label is not None for e in test_entries)
        test_speakers = {e.utt_id.split("-")[0] for e in test_entries}
        other_speakers = {
            e.utt_id.split("-")[0] for e in manifest.entries if e.partition != "test"
        }
        assert test_speakers & other_speakers == set()
