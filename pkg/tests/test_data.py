import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hazseg.data import (
    CutGrid,
    SurvivalData,
    make_cut_grid,
    parse_survival_text,
    sufficient_stats,
)


def direct_stats(times, statuses, cuts):
    """Per-individual summation oracle for the per-bin statistics."""
    edges = [0.0] + list(cuts) + [math.inf]
    L = len(edges) - 1
    O = [0] * L
    R = [0.0] * L
    for t, s in zip(times, statuses):
        for l in range(L):
            lo, hi = edges[l], edges[l + 1]
            if t >= lo:
                R[l] += max(0.0, min(hi, t) - lo)
            if lo < t <= hi and s == 1:
                O[l] += 1
    return np.array(O), np.array(R)


class TestParse:
    def test_two_rows(self):
        data = parse_survival_text("time,status\n5.0,1\n15.0,0\n")
        assert data.n == 2
        assert data.time.tolist() == [5.0, 15.0]
        assert data.status.tolist() == [1, 0]

    def test_tab_delimited(self):
        data = parse_survival_text("time\tstatus\n5.0\t1\n")
        assert data.n == 1

    def test_custom_columns(self):
        data = parse_survival_text("days,dead\n3,1\n", time_column="days", status_column="dead")
        assert data.time.tolist() == [3.0]

    def test_non_positive_time(self):
        with pytest.raises(ValueError, match="non-positive time at row 1"):
            parse_survival_text("time,status\n-1.0,1\n")

    def test_invalid_status(self):
        with pytest.raises(ValueError, match="invalid status"):
            parse_survival_text("time,status\n5.0,2\n")

    def test_missing_column(self):
        with pytest.raises(ValueError, match="missing column"):
            parse_survival_text("t,status\n5.0,1\n")

    def test_missing_value_rejected(self):
        with pytest.raises(ValueError, match="missing time value at row 2"):
            parse_survival_text("time,status\n5.0,1\n,0\n")
        with pytest.raises(ValueError, match="row 1"):
            parse_survival_text("time,status\nNA,1\n")

    def test_empty_input(self):
        with pytest.raises(ValueError, match="no observations"):
            parse_survival_text("time,status\n")

    def test_row_order_preserved(self):
        data = parse_survival_text("time,status\n9,0\n1,1\n4,0\n")
        assert data.time.tolist() == [9.0, 1.0, 4.0]


class TestCutGrid:
    def test_range_1_100(self):
        grid = make_cut_grid(start=1, end=100, step=1)
        assert grid.cuts.size == 99
        assert grid.n_bins == 100
        assert grid.cuts[0] == 1.0 and grid.cuts[-1] == 99.0

    def test_range_pbc(self):
        grid = make_cut_grid(start=1, end=4800, step=10)
        assert grid.cuts[0] == 1.0
        assert grid.cuts[-1] == 4791.0
        assert grid.n_bins == 481

    def test_explicit(self):
        grid = make_cut_grid([20, 40, 50, 70])
        assert grid.n_bins == 5

    def test_non_increasing_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            make_cut_grid([10, 10, 20])

    def test_non_positive_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            make_cut_grid([0.0, 5.0])

    def test_bad_step(self):
        with pytest.raises(ValueError, match="step"):
            make_cut_grid(start=1, end=10, step=0)

    @given(st.integers(1, 50), st.integers(2, 400))
    @settings(max_examples=30, deadline=None)
    def test_range_stays_below_end(self, step, end):
        if end <= step:
            end = step + 1
        grid = make_cut_grid(start=float(step), end=float(end), step=float(step))
        assert np.all(grid.cuts < end)
        assert np.all(np.diff(grid.cuts) > 0)


class TestSufficientStats:
    def test_single_event_before_cut(self):
        data = SurvivalData(np.array([5.0]), np.array([1]))
        stats = sufficient_stats(data, CutGrid(np.array([10.0])))
        assert stats.events.tolist() == [1, 0]
        assert stats.exposure.tolist() == [5.0, 0.0]

    def test_exposure_splits_at_cut(self):
        data = SurvivalData(np.array([15.0]), np.array([0]))
        stats = sufficient_stats(data, CutGrid(np.array([10.0])))
        assert stats.events.tolist() == [0, 0]
        assert stats.exposure.tolist() == [10.0, 5.0]

    def test_matches_direct_summation(self, rng):
        for _ in range(20):
            n = 50
            times = rng.uniform(0.1, 30.0, n)
            statuses = rng.integers(0, 2, n)
            cuts = np.sort(rng.uniform(1.0, 25.0, rng.integers(1, 8)))
            cuts = np.unique(cuts)
            data = SurvivalData(times, statuses)
            stats = sufficient_stats(data, CutGrid(cuts))
            O, R = direct_stats(times, statuses, cuts)
            assert np.array_equal(stats.events, O)
            assert np.allclose(stats.exposure, R, rtol=1e-12, atol=1e-12)
            assert stats.events.sum() == statuses.sum()
            assert math.isclose(stats.exposure.sum(), times.sum(), rel_tol=1e-12)

    def test_time_exactly_on_cut(self):
        # bin membership is (c_{l-1}, c_l]: the event lands left of the cut
        data = SurvivalData(np.array([10.0]), np.array([1]))
        stats = sufficient_stats(data, CutGrid(np.array([10.0])))
        assert stats.events.tolist() == [1, 0]
        assert stats.exposure.tolist() == [10.0, 0.0]

    def test_trailing_bins_empty(self):
        data = SurvivalData(np.array([3.0, 4.0]), np.array([1, 1]))
        stats = sufficient_stats(data, CutGrid(np.array([5.0, 10.0, 20.0])))
        assert stats.events.tolist() == [2, 0, 0, 0]
        assert stats.exposure[1:].tolist() == [0.0, 0.0, 0.0]

    def test_refinement_aggregates(self, rng):
        times = rng.uniform(0.5, 40.0, 80)
        statuses = rng.integers(0, 2, 80)
        data = SurvivalData(times, statuses)
        coarse = CutGrid(np.array([10.0, 30.0]))
        fine = CutGrid(np.array([10.0, 17.5, 30.0, 35.0]))
        cs = sufficient_stats(data, coarse)
        fs = sufficient_stats(data, fine)
        # coarse bin (10, 30] splits into (10, 17.5] + (17.5, 30]; (30, inf) into two
        assert cs.events[1] == fs.events[1] + fs.events[2]
        assert cs.events[2] == fs.events[3] + fs.events[4]
        assert abs(cs.exposure[1] - (fs.exposure[1] + fs.exposure[2])) <= 1e-9 * max(cs.exposure[1], 1.0)
        assert abs(cs.exposure[2] - (fs.exposure[3] + fs.exposure[4])) <= 1e-9 * max(cs.exposure[2], 1.0)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_order_invariance(self, seed):
        rng = np.random.default_rng(seed)
        times = rng.uniform(0.1, 20.0, 40)
        statuses = rng.integers(0, 2, 40)
        cuts = CutGrid(np.array([4.0, 9.0, 15.0]))
        base = sufficient_stats(SurvivalData(times, statuses), cuts)
        perm = rng.permutation(40)
        shuf = sufficient_stats(SurvivalData(times[perm], statuses[perm]), cuts)
        assert np.array_equal(base.events, shuf.events)
        assert np.array_equal(base.exposure, shuf.exposure)  # bitwise, via exact summation

    def test_duplicates_allowed(self):
        data = SurvivalData(np.array([5.0, 5.0, 5.0]), np.array([1, 1, 0]))
        stats = sufficient_stats(data, CutGrid(np.array([10.0])))
        assert stats.events.tolist() == [2, 0]
        assert stats.exposure.tolist() == [15.0, 0.0]
