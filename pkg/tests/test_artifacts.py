"""CSV and weight artifact formats: exact float round trips, hash headers."""

import numpy as np
import pytest

from istaprune.artifacts import (
    METRICS_HEADER,
    SCHEDULE_HEADER,
    metrics_csv,
    parse_weights,
    schedule_csv,
    weights_text,
)


class TestScheduleCsv:
    thresholds = np.array([0.0, 0.1, 0.25])
    lrs = np.array([0.1, 0.05])
    penalties = np.array([1.0, 3.0])

    def test_layout(self):
        text = schedule_csv(self.thresholds, self.lrs, self.penalties, "abc123")
        lines = text.splitlines()
        assert lines[0] == "# config_hash=abc123"
        assert lines[1] == SCHEDULE_HEADER
        assert lines[2] == "0,0.0,0.1,1.0"
        # the final threshold has no step after it: lr and penalty are empty
        assert lines[-1] == "2,0.25,,"

    def test_floats_survive_repr_round_trip(self):
        vals = np.array([0.1 + 0.2, 1 / 3, 1e-17])
        text = schedule_csv(vals, np.ones(2), np.ones(2), "h")
        read_back = [float(line.split(",")[1]) for line in text.splitlines()[2:]]
        np.testing.assert_array_equal(read_back, vals)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            schedule_csv(np.zeros(3), np.zeros(3), np.zeros(2), "h")


class TestMetricsCsv:
    def test_layout(self):
        text = metrics_csv(
            np.array([1, 2]),
            np.array([0.5, 0.25]),
            np.array([0.0, 0.5]),
            np.array([0.1, 0.2]),
            np.array([1.0, 2.0]),
            "deadbeef0000",
        )
        lines = text.splitlines()
        assert lines[0] == "# config_hash=deadbeef0000"
        assert lines[1] == METRICS_HEADER
        assert lines[2] == "1,0.5,0.0,0.1,1.0"
        assert len(lines) == 4


class TestWeightsText:
    def test_round_trip_is_bit_exact(self):
        rng = np.random.default_rng(0)
        w = rng.standard_normal(20) * np.logspace(-12, 3, 20)
        text = weights_text(w, "cafe00000000")
        np.testing.assert_array_equal(parse_weights(text), w)

    def test_meta_lines_are_comments(self):
        text = weights_text(np.array([1.5]), "h", meta={"model": "linear", "seed": 3})
        lines = text.splitlines()
        assert lines[0] == "# config_hash=h"
        assert lines[1] == "# dim=1"
        assert "# model=linear" in lines
        assert "# seed=3" in lines
        np.testing.assert_array_equal(parse_weights(text), [1.5])

    def test_dim_checked_on_parse(self):
        text = "# config_hash=h\n# dim=3\n1.0\n2.0\n"
        with pytest.raises(ValueError):
            parse_weights(text)

    def test_negative_zero_preserved(self):
        w = np.array([-0.0, 0.0])
        out = parse_weights(weights_text(w, "h"))
        assert np.signbit(out[0])
        assert not np.signbit(out[1])
