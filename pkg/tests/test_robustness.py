"""Run-length prediction filter: examples and stream properties."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from portcast.robustness import ShipHistory, _runs


def history(values, capacity=64) -> ShipHistory:
    h = ShipHistory("S", capacity)
    for v in values:
        h.window.append(v)
    return h


class TestExamples:
    def test_minority_newcomer_suppressed(self):
        h = history(["A", "A", "A"])
        assert h.filter("B") == "A"
        assert list(h.window) == ["A", "A", "A", "B"]

    def test_dominant_run_passes_through(self):
        h = history(["A", "B", "B"])
        assert h.filter("B") == "B"

    def test_empty_window_reports_raw(self):
        assert ShipHistory("S", 8).filter("X") == "X"

    def test_raw_matching_an_older_long_run_passes(self):
        h = history(["A", "A", "B"])
        assert h.filter("A") == "A"  # raw extends no run but A(2) is dominant

    def test_recency_breaks_equal_lengths(self):
        # Runs A(2) then B(2): equal length, B more recent, so raw C is
        # replaced by B.
        h = history(["A", "A", "B", "B"], capacity=8)
        assert h.filter("C") == "B"

    def test_top_k_membership(self):
        h = history(["A", "A", "A", "B"], capacity=16)
        assert h.filter("B", k=2) == "B"  # B(2) is the 2nd-longest run
        h = history(["A", "A", "A", "B"], capacity=16)
        assert h.filter("B", k=1) == "A"

    def test_reset(self):
        h = history(["A", "A", "A"])
        h.reset()
        assert h.filter("X") == "X"
        h.reset()
        h.reset()  # idempotent
        assert len(h.window) == 0
        for _ in range(3):
            h.filter("A")
        assert list(h.window) == ["A", "A", "A"]


class TestRuns:
    def test_run_extraction(self):
        assert _runs(["A", "A", "B", "A"]) == [("A", 2, 1), ("B", 1, 2), ("A", 1, 3)]

    def test_single_value(self):
        assert _runs(["X"]) == [("X", 1, 0)]


ports = st.sampled_from(["A", "B", "C", "D"])


class TestProperties:
    @settings(max_examples=200)
    @given(st.lists(ports, min_size=1, max_size=80), ports, st.integers(1, 4))
    def test_reported_port_is_in_window(self, stream, raw, k):
        h = ShipHistory("S", 16)
        for v in stream:
            h.filter(v, k)
        reported = h.filter(raw, k)
        assert reported in h.window

    @settings(max_examples=200)
    @given(st.lists(ports, min_size=0, max_size=30), ports)
    def test_consensus_identity(self, prefix, v):
        h = ShipHistory("S", 16)
        for p in prefix:
            h.filter(p)
        h.window.clear()
        for _ in range(5):
            h.window.append(v)
        assert h.filter(v) == v

    @settings(max_examples=200)
    @given(st.lists(ports, min_size=0, max_size=100), ports)
    def test_convergence_within_window(self, prefix, v):
        capacity = 16
        h = ShipHistory("S", capacity)
        for p in prefix:
            h.filter(p)
        last = None
        for _ in range(capacity):
            last = h.filter(v)
        assert last == v

    def test_k_equal_to_capacity_passes_raw_through(self):
        # With k = capacity and at most k runs in the window, the raw value
        # always sits within the top-k runs.
        rng = random.Random(5)
        capacity = 8
        h = ShipHistory("S", capacity)
        for _ in range(300):
            raw = rng.choice("AB")
            reported = h.filter(raw, k=capacity)
            assert reported == raw

    def test_thousand_random_sequences(self):
        # Acceptance-grade sweep: membership + convergence on random streams.
        rng = random.Random(2018)
        for _ in range(1_000):
            capacity = rng.choice([4, 8, 16, 64])
            h = ShipHistory("S", capacity)
            for _ in range(rng.randrange(0, 2 * capacity)):
                assert h.filter(rng.choice("ABCD")) in h.window
            v = rng.choice("ABCD")
            last = None
            for _ in range(capacity):
                last = h.filter(v)
            assert last == v


class TestValidation:
    def test_empty_raw_rejected(self):
        with pytest.raises(ValueError):
            ShipHistory("S", 4).filter("")

    def test_bad_k(self):
        with pytest.raises(ValueError):
            ShipHistory("S", 4).filter("A", k=0)
