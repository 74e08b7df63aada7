import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sysindex.core import CONTINUOUS, DISCRETE, IndexKind, Method, Sample, Trajectory
from sysindex.errors import (AllDeadZone, HasRealizationBreaks, NoSamples, NonFiniteInput,
                             NonMonotoneTime, ZeroDenominator, BoundViolation)
from sysindex.estimators import (ALL_KINDS, IndexEstimates, MeanEstimates, OnlineEstimator, avg_estimates,
                                 bounds_report, calibrate_ks, estimate_series, ffo_estimates,
                                 gain_of_squared, mean_estimates, online_update,
                                 ks_from_means, param_free_estimates, per_sample_terms)

L2G, IFP, OFP = ALL_KINDS


def disc(u, y):
    return Trajectory(np.arange(len(u)), u, y, DISCRETE)


def random_traj(rng, n, continuous=True, m=1):
    t = np.cumsum(rng.uniform(0.01, 1.0, n)) if continuous else np.arange(n, dtype=float)
    u = rng.normal(1.0, 1.0, (n, m))
    y = rng.normal(0.5, 1.0, (n, m))
    return Trajectory(t, u, y, CONTINUOUS if continuous else DISCRETE)


def test_per_sample_terms():
    assert per_sample_terms(Sample(0, [1, 2], [3, 0])) == (5, 9, 3)
    assert per_sample_terms(Sample(0, [0, 0], [1, 1])) == (0, 2, 0)
    assert per_sample_terms(Sample(0, [1], [1])) == (1, 1, 1)


class TestAvg:
    def test_constant_signals(self):
        tr = Trajectory([0, 0.5, 2.0], [1, 1, 1], [1, 1, 1])
        est = avg_estimates(tr)
        assert (est.l2g_sq, est.ifp, est.ofp) == (1, 1, 1)

    def test_two_term_sums(self):
        est = avg_estimates(disc([1, 2], [2, 2]))
        assert est.l2g_sq == pytest.approx(8 / 5)
        assert est.ifp == pytest.approx(6 / 5)
        assert est.ofp == pytest.approx(6 / 8)
        assert est.method is Method.AVG

    def test_trapezoid(self):
        tr = Trajectory([0, 1, 3], [1, 1, 1], [0, 2, 2])
        # yy integral: 0.5*(0+4)*1 + 0.5*(4+4)*2 = 10 over uu integral 3
        assert avg_estimates(tr).l2g_sq == pytest.approx(10 / 3)

    def test_refuses_breaks(self):
        tr = Trajectory([0, 1, 0, 1], [1] * 4, [1] * 4, breaks=(2,))
        with pytest.raises(HasRealizationBreaks):
            avg_estimates(tr)

    def test_zero_denominator(self):
        with pytest.raises(ZeroDenominator):
            avg_estimates(disc([0, 0], [1, 1]), kinds=[L2G])
        assert avg_estimates(disc([0, 0], [1, 1]), kinds=[OFP]).ofp == 0

    def test_unrequested_kinds_are_none(self):
        est = avg_estimates(disc([1, 2], [2, 2]), kinds=["ifp"])
        assert est.l2g_sq is None and est.ofp is None and est.ifp is not None


class TestParamFreeAndFfo:
    def test_param_free(self):
        est = param_free_estimates(disc([1, 2], [2, 2]))
        assert (est.l2g_sq, est.ifp, est.ofp) == (4, 1, 0.5)

    def test_identity(self):
        est = param_free_estimates(disc([1, -2, 3], [1, -2, 3]))
        assert (est.l2g_sq, est.ifp, est.ofp) == (1, 1, 1)

    def test_dead_sample_skipped(self):
        assert param_free_estimates(disc([1, 0, 2], [3, 7, 2])).l2g_sq == 9

    def test_ffo_single_sample(self):
        assert ffo_estimates(disc([1], [3]), 5.0).l2g_sq == 4

    def test_ks_zero_matches_param_free(self):
        tr = random_traj(np.random.default_rng(3), 50)
        a, b = ffo_estimates(tr, 0.0), param_free_estimates(tr)
        assert (a.l2g_sq, a.ifp, a.ofp) == (b.l2g_sq, b.ifp, b.ofp)

    def test_per_kind_ks(self):
        tr = disc([1, 2], [2, 2])
        est = ffo_estimates(tr, {IndexKind.L2G: 1.0, "ifp": 2.0, "ofp": 0.0})
        assert est.l2g_sq == 3 and est.ifp == 1.5 and est.ofp == 0.5

    def test_witness_is_sample_time(self):
        tr = Trajectory([0.0, 0.5, 1.5], [1, 1, 1], [1, 3, 2])
        assert ffo_estimates(tr, 0.0).witnesses[L2G] == 0.5

    def test_negative_ks_rejected(self):
        with pytest.raises(ValueError):
            ffo_estimates(disc([1], [1]), -1.0)

    def test_all_dead(self):
        with pytest.raises(AllDeadZone):
            param_free_estimates(disc([0, 0], [1, 1]), kinds=[L2G])


def test_gain_of_squared():
    assert gain_of_squared(4) == (2, False)
    assert gain_of_squared(0) == (0, False)
    assert gain_of_squared(-3) == (0, True)


class TestMean:
    def test_values(self):
        a = IndexEstimates(2.0, -1.0, 0.5, Method.AVG)
        b = IndexEstimates(4.0, -3.0, 0.5, Method.PARAM_FREE)
        m = mean_estimates(a, b)
        assert (m.l2g_sq, m.ifp, m.ofp) == (3.0, -2.0, 0.5)

    def test_idempotent(self):
        a = IndexEstimates(1.5, 0.25, 2.0, Method.AVG)
        m = mean_estimates(a, a)
        assert (m.l2g_sq, m.ifp, m.ofp) == (1.5, 0.25, 2.0)

    def test_non_finite(self):
        a = IndexEstimates(math.inf, 0.0, 0.0, Method.AVG)
        with pytest.raises(NonFiniteInput):
            mean_estimates(a, a)


class TestCalibration:
    def test_single_sample(self):
        # gamma_bar^2 = 4 from both estimates here, so the raw candidate is 0
        cal = calibrate_ks(disc([1], [2]), calib_end=None, kinds=[L2G])
        assert cal.ks_l2g == 0.0

    def test_given_mean(self):
        means = MeanEstimates(1.0, None, None)
        assert ks_from_means(disc([1], [2]), means, kinds=[L2G]) == {"l2g": 3.0}

    def test_known_mean(self):
        # avg 8/5 and param-free 4 give mean 2.8; samples give 4 - 2.8 and 4 - 11.2
        cal = calibrate_ks(disc([1, 2], [2, 2]), calib_end=None)
        assert cal.mean_estimates.l2g_sq == pytest.approx(2.8)
        assert cal.ks_l2g == pytest.approx(1.2)

    def test_identity_signals(self):
        cal = calibrate_ks(disc([1, 2, 3], [1, 2, 3]), calib_end=None)
        assert cal.mean_estimates.l2g_sq == 1
        assert (cal.ks_l2g, cal.ks_ifp, cal.ks_ofp) == (0, 0, 0)

    def test_raw_candidates_nonnegative_on_own_window(self):
        # the parameter-free extremum sample alone makes each candidate >= 0
        cal = calibrate_ks(random_traj(np.random.default_rng(7), 40), calib_end=None)
        assert all(v >= 0 for v in cal.raw.values())
        assert cal.as_dict() == cal.raw

    def test_window(self):
        tr = Trajectory(np.arange(20) * 1.0, np.ones(20), np.arange(20) * 1.0)
        cal = calibrate_ks(tr, calib_end=5.0)
        assert cal.window == (0.0, 4.0)

    def test_empty_window(self):
        tr = Trajectory([10.0, 11.0], [1, 1], [1, 1])
        with pytest.raises(NoSamples):
            calibrate_ks(tr, calib_end=0.0)


class TestBounds:
    def test_example(self):
        tr = disc([1, 2], [2, 2])
        rep = bounds_report(avg_estimates(tr), param_free_estimates(tr), ffo_estimates(tr, 1.0))
        assert rep.ok
        assert rep.checks[1].rhs - rep.checks[1].lhs == pytest.approx(2.4)

    def test_ks_zero_collapse(self):
        tr = random_traj(np.random.default_rng(0), 30)
        avg = avg_estimates(tr)
        rep = bounds_report(avg, param_free_estimates(tr), ffo_estimates(tr, 0.0))
        assert rep.slack["l2g"] == 0
        assert rep.l2g_sq_lower == avg.l2g_sq

    def test_violation_raises(self):
        avg = IndexEstimates(5.0, 0.0, 0.0, Method.AVG)
        pf = IndexEstimates(4.0, 0.0, 0.0, Method.PARAM_FREE)
        with pytest.raises(BoundViolation):
            bounds_report(avg, pf, pf)
        assert not bounds_report(avg, pf, pf, strict=False).ok


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 50), st.booleans())
def test_ordering_chains_hold_exactly(seed, ks, continuous):
    tr = random_traj(np.random.default_rng(seed), 40, continuous)
    rep = bounds_report(avg_estimates(tr), param_free_estimates(tr), ffo_estimates(tr, ks))
    assert rep.ok


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 10), st.floats(0, 10))
def test_ks_monotonicity(seed, k1, k2):
    lo, hi = sorted((k1, k2))
    tr = random_traj(np.random.default_rng(seed), 30)
    a, b = ffo_estimates(tr, lo), ffo_estimates(tr, hi)
    assert b.l2g_sq <= a.l2g_sq and b.ifp >= a.ifp and b.ofp >= a.ofp


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_containment_on_calibration_window(seed, continuous):
    tr = random_traj(np.random.default_rng(seed), 60, continuous)
    cal = calibrate_ks(tr, calib_end=None)
    est = ffo_estimates(tr, cal)
    m = cal.mean_estimates
    tol = 1e-12
    assert est.l2g_sq <= m.l2g_sq + tol * abs(m.l2g_sq)
    assert est.ifp >= m.ifp - tol * abs(m.ifp)
    assert est.ofp >= m.ofp - tol * abs(m.ofp)


def _close(a, b):
    if a is None or b is None:
        return a is b
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-300)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 200), st.booleans(), st.floats(0, 5))
def test_online_matches_batch(seed, n, continuous, ks):
    tr = random_traj(np.random.default_rng(seed), n, continuous, m=2)
    state = OnlineEstimator(ks, tr.time_kind)
    for s in tr:
        state = online_update(state, s)
    for got, want in ((state.ffo(), ffo_estimates(tr, ks)),
                      (state.param_free(), param_free_estimates(tr))):
        for k in ALL_KINDS:
            assert _close(got.get(k), want.get(k))
    if n > 1 or not continuous:
        avg = avg_estimates(tr)
        for k in ALL_KINDS:
            assert _close(state.avg().get(k), avg.get(k))


def test_online_memory_is_constant():
    state = OnlineEstimator(1.0)
    assert not hasattr(state, "__dict__")
    rng = np.random.default_rng(0)
    for i in range(500):
        state.update(Sample(i * 0.01, rng.normal(size=1), rng.normal(size=1)))
    sizes = [len(v) for v in (state.integrals, state.ffo_best, state.pf_best)]
    assert sizes == [3, 3, 3]


def test_online_constant_signals():
    state = OnlineEstimator(0.0)
    for t in range(3):
        state.update(Sample(t, [1.0], [1.0]))
    for est in (state.avg(), state.ffo()):
        assert (est.l2g_sq, est.ifp, est.ofp) == (1, 1, 1)


def test_online_empty_read():
    with pytest.raises(NoSamples):
        OnlineEstimator().ffo()


def test_online_rejects_time_going_back():
    state = OnlineEstimator()
    state.update(Sample(1.0, [1], [1]))
    with pytest.raises(NonMonotoneTime):
        state.update(Sample(1.0, [1], [1]))


def test_online_new_realization():
    state = OnlineEstimator()
    state.update(Sample(0.0, [1], [2]))
    state.update(Sample(1.0, [1], [2]))
    state.new_realization()
    state.update(Sample(0.0, [1], [3]))
    assert state.ffo().l2g_sq == 9
    with pytest.raises(HasRealizationBreaks):
        state.avg()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 120), st.booleans())
def test_series_matches_batch_prefixes(seed, n, continuous):
    tr = random_traj(np.random.default_rng(seed), n, continuous)
    series = estimate_series(tr, 0.7)
    for k in (1, n // 2, n):
        head = tr.head(k)
        ffo = ffo_estimates(head, 0.7)
        for kind in ALL_KINDS:
            assert _close(series.ffo[kind][k - 1], ffo.get(kind))
        if k > 1:
            avg = avg_estimates(head)
            for kind in ALL_KINDS:
                assert _close(series.avg[kind][k - 1], avg.get(kind))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_estimates_monotone_in_time(seed):
    tr = random_traj(np.random.default_rng(seed), 80)
    s = estimate_series(tr, 0.3)
    assert (np.diff(s.ffo[L2G]) >= 0).all()
    assert (np.diff(s.ffo[IFP]) <= 0).all() and (np.diff(s.ffo[OFP]) <= 0).all()
