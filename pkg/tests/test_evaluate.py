import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ivlasso.evaluate import (
    INTERVAL_CRITERIA,
    POINT_CRITERIA,
    CriteriaReport,
    ForecastPairSeries,
    criteria_csv,
    cumulative_tracking_errors,
    dm_test,
    evaluate,
    interval_criteria,
    point_criteria,
    tracking_errors,
)
from ivlasso.ivcore import Kernel

K511 = Kernel(5, 1, 1)


def fps(pred, act):
    return ForecastPairSeries(np.array(pred, float), np.array(act, float))


def test_perfect_forecast_all_zero(rng):
    y = np.sort(rng.normal(size=(20, 2)), axis=1)
    rep = evaluate(fps(y, y), K511)
    for name, v in rep.to_dict().items():
        assert v == 0.0, name


def test_touching_intervals():
    rep = interval_criteria(fps([[0, 1]] * 3, [[1, 2]] * 3), K511)
    assert rep.omega_1 == pytest.approx(1.0)
    assert rep.omega_nsd1 == pytest.approx(1.0)
    assert rep.omega_nsd2 == pytest.approx(1.0)
    assert rep.omega_rate == pytest.approx(1.0)


def test_rate_example():
    rep = interval_criteria(fps([[0, 2]], [[1, 2]]), K511)
    assert rep.omega_rate == pytest.approx(0.5)
    assert rep.omega_1 == pytest.approx(0.5)
    # nested: union width 2, overlap 1 -> both symmetric-difference forms give 1/2
    assert rep.omega_nsd1 == pytest.approx(0.5) and rep.omega_nsd2 == pytest.approx(0.5)


def test_overlap_floor_flag():
    f = fps([[0, 1]], [[3, 4]])
    assert interval_criteria(f, K511).omega_1 == pytest.approx(1.0)
    # unfloored: overlap -2 over hull 4 -> 1 + 1/2
    assert interval_criteria(f, K511, overlap_floor=False).omega_1 == pytest.approx(1.5)
    assert interval_criteria(f, K511, overlap_floor=False).omega_rate == pytest.approx(3.0)


def test_dk_and_mde_examples():
    f = fps([[0, 2], [1, 1]], [[1, 2], [0, 0]])
    k1 = Kernel(0.25, -0.25, 0.25)
    mid_gaps = np.array([1.0 - 1.5, 1.0 - 0.0])
    assert interval_criteria(f, k1).omega_dk == pytest.approx(np.sqrt((mid_gaps ** 2).sum()) / 2)
    # radius gaps: (1 - 0.5), 0
    assert interval_criteria(f, K511).omega_mde == pytest.approx(
        (math.sqrt(0.25 + 0.5) + math.sqrt(1.0)) / 2)


def test_reversed_predictions_canonicalized_for_overlap():
    a = interval_criteria(fps([[2, 0]], [[1, 2]]), K511)
    b = interval_criteria(fps([[0, 2]], [[1, 2]]), K511)
    assert a.omega_1 == b.omega_1 and a.omega_rate == b.omega_rate
    assert a.omega_dk != b.omega_dk  # raw bounds


def test_degenerate_points():
    rep = interval_criteria(fps([[1, 1]], [[1, 1]]), K511)
    assert rep.omega_1 == 0 and rep.omega_nsd1 == 0 and rep.omega_nsd2 == 0 and rep.omega_rate == 0
    rep = interval_criteria(fps([[1, 1]], [[2, 2]]), K511)
    assert rep.omega_1 == 1 and rep.omega_nsd1 == 1


def test_point_examples():
    rep = point_criteria(fps([[0, 4]], [[0, 2]]))
    assert (rep.omega_h, rep.omega_m, rep.omega_r, rep.omega_l) == (2, 1, 1, 0)
    rep = point_criteria(fps([[1.5, 3.5], [0.5, 0.5]], [[1, 3], [0, 0]]))
    assert rep.omega_l == rep.omega_h == rep.omega_m == pytest.approx(0.5) and rep.omega_r == 0


def test_fixture_three_rows():
    pred = [[0, 2], [1, 3], [5, 6]]
    act = [[1, 2], [0, 4], [0, 1]]
    rep = evaluate(fps(pred, act), K511)
    # per-row overlap/hull: 1/2, 2/4, 0/6
    assert rep.omega_1 == pytest.approx(1 - (0.5 + 0.5 + 0) / 3)
    assert rep.omega_rate == pytest.approx(1 - (0.5 + 1.0 + 0) / 3)
    assert rep.omega_nsd2 == pytest.approx(((2 - 3 / 2) + (2 - 6 / 4) + (2 - 2 / 6)) / 3)
    assert rep.omega_nsd1 == pytest.approx((0.5 + 0.5 + 1) / 3)
    e = np.array(pred, float) - np.array(act, float)
    assert rep.omega_l == pytest.approx(np.sqrt(np.mean(e[:, 0] ** 2)))
    d2 = [5 * r * r + l * l - 2 * r * l for l, r in e]
    assert rep.omega_dk == pytest.approx(np.sqrt(sum(d2)) / 3)


pairs = st.lists(st.tuples(st.floats(-50, 50), st.floats(0.01, 20), st.floats(-50, 50), st.floats(0.01, 20)),
                 min_size=1, max_size=20)


@settings(max_examples=200, deadline=None)
@given(pairs)
def test_ranges_and_symmetry(rows):
    pred = np.array([[a, a + w] for a, w, _, _ in rows])
    act = np.array([[b, b + v] for _, _, b, v in rows])
    r1 = interval_criteria(fps(pred, act), K511)
    r2 = interval_criteria(fps(act, pred), K511)
    for name in ("omega_1", "omega_nsd1", "omega_nsd2"):
        assert getattr(r1, name) == pytest.approx(getattr(r2, name), abs=1e-12)
    for name in ("omega_1", "omega_nsd1", "omega_rate"):
        assert -1e-12 <= getattr(r1, name) <= 1 + 1e-12
    assert -1e-12 <= r1.omega_nsd2 <= 2
    overlapping = np.minimum(pred[:, 1], act[:, 1]) >= np.maximum(pred[:, 0], act[:, 0])
    if overlapping.all():
        assert r1.omega_nsd1 == pytest.approx(r1.omega_nsd2, abs=1e-9)
        assert r1.omega_nsd2 <= 1 + 1e-12


def test_rate_is_asymmetric():
    f = fps([[0, 4]], [[1, 2]])
    g = fps([[1, 2]], [[0, 4]])
    assert interval_criteria(f, K511).omega_rate != interval_criteria(g, K511).omega_rate


def test_empty_and_mismatch():
    with pytest.raises(ValueError):
        interval_criteria(fps(np.zeros((0, 2)), np.zeros((0, 2))), K511)
    with pytest.raises(ValueError):
        fps([[0, 1]], [[0, 1], [1, 2]])


class TestDm:
    def test_identical(self, rng):
        e = rng.normal(size=50)
        assert dm_test(e, e, 1) == (0.0, 1.0)

    def test_null_size(self):
        # equal-accuracy errors: rejection rate at 5% stays near nominal
        rejections = 0
        for seed in range(400):
            rng = np.random.default_rng(seed)
            _, p = dm_test(rng.normal(size=200), rng.normal(size=200), 1)
            rejections += p < 0.05
        assert 0.02 <= rejections / 400 <= 0.09

    def test_pm_one_differential(self):
        # d_t = e_a^2 - e_b^2 i.i.d. +-1 with T = 1000: |stat| < 3 about 99.7% of the time
        big = 0
        for seed in range(300):
            d = np.random.default_rng(seed).choice([-1.0, 1.0], size=1000)
            stat, _ = dm_test(np.sqrt(1.0 + d), np.ones(1000), 1)
            big += abs(stat) >= 3
        assert big <= 4

    def test_dominance(self, rng):
        e = rng.normal(size=500)
        stat, p = dm_test(e, 2 * e, 1)
        assert stat < 0 and p < 0.05
        stat2, p2 = dm_test(e, 2 * e, 4)
        assert stat2 < 0 and p2 < 0.05

    def test_errors(self):
        with pytest.raises(ValueError):
            dm_test(np.ones(5), np.ones(5))
        with pytest.raises(ValueError):
            dm_test(np.ones(20), np.ones(21))


class TestTracking:
    def test_examples(self):
        assert tracking_errors([1, 2, 3], [1, 2, 3]) == (0, 0)
        s, m = tracking_errors([1, -1], [0, 0])
        assert s == pytest.approx(math.sqrt(2)) and m == 1
        s, m = tracking_errors([3, 4, 5], [1, 2, 3])
        assert s == 0 and m == 2

    def test_cumulative(self, rng):
        r, rh = rng.normal(size=30), rng.normal(size=30)
        s, m = cumulative_tracking_errors(r, rh)
        assert math.isnan(s[0])
        for tau in (2, 10, 30):
            assert (s[tau - 1], m[tau - 1]) == pytest.approx(tracking_errors(r[:tau], rh[:tau]))

    def test_mismatch(self):
        with pytest.raises(ValueError):
            tracking_errors([1, 2], [1])


def test_csv_rows():
    text = criteria_csv({("PLR", 60): evaluate(fps([[0, 1]], [[0, 1]]), K511)})
    lines = text.splitlines()
    assert lines[0] == "model,window,criterion,value" and len(lines) == 11
    assert {ln.split(",")[2] for ln in lines[1:]} == set(INTERVAL_CRITERIA + POINT_CRITERIA)


def test_merge():
    a = CriteriaReport(omega_1=0.1)
    b = CriteriaReport(omega_l=0.2)
    c = a.merge(b)
    assert c.omega_1 == 0.1 and c.omega_l == 0.2 and math.isnan(c.omega_dk)
