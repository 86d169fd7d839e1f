"""Binary feature container: round trips, header reads, corruption handling."""

import numpy as np
import pytest

from maskspeech.errors import ValidationError
from maskspeech.features.matrix import (
    FeatureMatrix,
    export_feature_text,
    load_feature_matrix,
    read_feature_header,
    save_feature_matrix,
)


def sample_matrix(rng, kind="mfcc", shape=(99, 90)):
    return FeatureMatrix(kind, rng.normal(size=shape), 10.0, source_hash=b"\x07" * 32)


class TestRoundTrip:
    def test_bit_exact(self, rng, tmp_path):
        fm = sample_matrix(rng)
        path = tmp_path / "a.fm"
        save_feature_matrix(fm, path)
        back = load_feature_matrix(path)
        assert back.kind == "mfcc"
        assert back.frame_hop_ms == 10.0
        assert back.source_hash == b"\x07" * 32
        assert np.array_equal(back.rows, fm.rows)

    def test_static_dim_round_trip(self, rng, tmp_path):
        fm = sample_matrix(rng, kind="cqcc", shape=(50, 30))
        path = tmp_path / "b.fm"
        save_feature_matrix(fm, path)
        assert np.array_equal(load_feature_matrix(path).rows, fm.rows)

    def test_header_read_matches(self, rng, tmp_path):
        fm = sample_matrix(rng, kind="ifcc")
        path = tmp_path / "c.fm"
        save_feature_matrix(fm, path)
        head = read_feature_header(path)
        assert head["kind"] == "ifcc"
        assert head["n_frames"] == 99
        assert head["dim"] == 90
        assert head["source_hash"] == b"\x07" * 32


class TestValidation:
    def test_odd_dim_rejected(self, rng):
        with pytest.raises(ValidationError):
            FeatureMatrix("lfcc", rng.normal(size=(10, 40)), 10.0)

    def test_unknown_kind_rejected(self, rng):
        with pytest.raises(ValidationError):
            FeatureMatrix("plp", rng.normal(size=(10, 30)), 10.0)

    def test_non_finite_rejected(self, rng):
        rows = rng.normal(size=(10, 30))
        rows[3, 7] = np.inf
        with pytest.raises(ValidationError):
            FeatureMatrix("lfcc", rows, 10.0)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            FeatureMatrix("lfcc", np.zeros((0, 30)), 10.0)


class TestCorruption:
    def test_bad_magic(self, rng, tmp_path):
        fm = sample_matrix(rng)
        path = tmp_path / "d.fm"
        save_feature_matrix(fm, path)
        raw = bytearray(path.read_bytes())
        raw[0:4] = b"XXXX"
        path.write_bytes(bytes(raw))
        with pytest.raises(ValidationError):
            load_feature_matrix(path)
        with pytest.raises(ValidationError):
            read_feature_header(path)

    def test_truncated_payload(self, rng, tmp_path):
        fm = sample_matrix(rng)
        path = tmp_path / "e.fm"
        save_feature_matrix(fm, path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-16])
        with pytest.raises(ValidationError):
            load_feature_matrix(path)

    def test_header_too_short(self, tmp_path):
        path = tmp_path / "f.fm"
        path.write_bytes(b"MSFC\x01")
        with pytest.raises(ValidationError):
            read_feature_header(path)


class TestTextExport:
    def test_line_count_and_determinism(self, rng, tmp_path):
        fm = sample_matrix(rng, shape=(20, 30))
        p1 = tmp_path / "x.txt"
        p2 = tmp_path / "y.txt"
        export_feature_text(fm, p1)
        export_feature_text(fm, p2)
        assert p1.read_bytes() == p2.read_bytes()
        lines = p1.read_text().splitlines()
        data_lines = [ln for ln in lines if not ln.startswith("#")]
        assert len(data_lines) == 20
        first = np.array([float(v) for v in data_lines[0].split()])
        assert np.array_equal(first, fm.rows[0])
