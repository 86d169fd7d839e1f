"""Unweighted average recall and the report table."""

import pytest

from maskspeech.errors import ValidationError
from maskspeech.metrics import ConfusionMatrix, format_uar_table, uar


def labels(n_no_correct, n_no_wrong, n_mask_correct, n_mask_wrong):
    truth, pred = [], []
    truth += ["no_mask"] * (n_no_correct + n_no_wrong)
    pred += ["no_mask"] * n_no_correct + ["mask"] * n_no_wrong
    truth += ["mask"] * (n_mask_correct + n_mask_wrong)
    pred += ["mask"] * n_mask_correct + ["no_mask"] * n_mask_wrong
    return truth, pred


class TestUar:
    def test_recalls_eighty_sixty_give_seventy(self):
        cm = ConfusionMatrix.from_labels(*labels(8, 2, 6, 4))
        report = uar(cm)
        assert report.recall_no_mask == pytest.approx(0.8)
        assert report.recall_mask == pytest.approx(0.6)
        assert abs(report.uar_percent - 70.0) < 1e-9
        assert f"{report.uar_percent:.2f}" == "70.00"

    def test_perfect_is_one_hundred(self):
        cm = ConfusionMatrix.from_labels(*labels(5, 0, 7, 0))
        assert abs(uar(cm).uar_percent - 100.0) < 1e-9

    def test_single_class_predictor_is_fifty(self):
        # always answer no_mask: recall 1.0 on one class, 0.0 on the other
        truth = ["no_mask"] * 3 + ["mask"] * 9
        pred = ["no_mask"] * 12
        report = uar(ConfusionMatrix.from_labels(truth, pred))
        assert abs(report.uar_percent - 50.0) < 1e-9
        assert f"{report.uar_percent:.2f}" == "50.00"

    def test_class_imbalance_does_not_tilt_the_average(self):
        # same per-class recalls, wildly different class sizes
        small = uar(ConfusionMatrix.from_labels(*labels(8, 2, 6, 4)))
        big = uar(ConfusionMatrix.from_labels(*labels(80, 20, 6, 4)))
        assert small.uar_percent == pytest.approx(big.uar_percent, abs=1e-12)

    def test_empty_true_class_rejected(self):
        cm = ConfusionMatrix.from_labels(["no_mask"], ["no_mask"])
        with pytest.raises(ValidationError):
            uar(cm)


class TestConfusionMatrix:
    def test_counts(self):
        cm = ConfusionMatrix.from_labels(*labels(3, 1, 4, 2))
        assert cm.counts[0][0] == 3  # no_mask predicted no_mask
        assert cm.counts[0][1] == 1
        assert cm.counts[1][0] == 2
        assert cm.counts[1][1] == 4
        assert cm.total == 10

    def test_unknown_label_rejected(self):
        with pytest.raises(ValidationError):
            ConfusionMatrix.from_labels(["mask"], ["maybe"])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            ConfusionMatrix.from_labels(["mask", "mask"], ["mask"])


class TestTable:
    def test_exact_layout(self):
        rows = [
            ("LFCC", 93.25, 88.5),
            ("MFCC", 91.0, None),
            ("Majority vote", 95.125, 90.0),
        ]
        table = format_uar_table(rows)
        lines = table.splitlines()
        assert lines[0] == f"{'System':<16}{'Dev':>8}{'Test':>8}"
        assert lines[1] == "-" * 32
        assert lines[2] == f"{'LFCC':<16}{'93.25':>8}{'88.50':>8}"
        assert lines[3] == f"{'MFCC':<16}{'91.00':>8}{'-':>8}"
        assert lines[4] == f"{'Majority vote':<16}{'95.12':>8}{'90.00':>8}"
        assert table.endswith("\n")
