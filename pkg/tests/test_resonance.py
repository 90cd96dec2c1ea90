import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dkg2d.fields import MassPair
from dkg2d.resonance import (CaseTag, DyadicTuple, bound_ratio_scan, classify_case, prec,
                             resonance_mu, resonance_ray_root, succeq, vanishing_integral_test,
                             vanishing_predicate, vanishing_regression_set)

vec = st.tuples(st.floats(-100, 100), st.floats(-100, 100))
sign = st.sampled_from([1, -1])


@settings(max_examples=200, deadline=None)
@given(vec, vec, sign, sign)
def test_mu_recomputable(a, b, s1, s2):
    a, b = np.array(a), np.array(b)
    M = MassPair(1.0, 1.0)
    w = lambda x, m: np.sqrt(m * m + x @ x)
    want = w(a - b, 1.0) + s1 * w(a, 1.0) - s2 * w(b, 1.0)
    assert np.isclose(resonance_mu(a, b, s1, s2, M), want, rtol=1e-12, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(vec, vec, sign, sign)
def test_one_case_tag(a, b, s1, s2):
    tag = classify_case(np.array(a), np.array(b), s1, s2)
    assert isinstance(tag, CaseTag)
    if (s1, s2) == (1, -1):
        assert tag.high_modulation


def test_nonresonant_masses_bound_mu_away_from_zero():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((100000, 2)) * 50
    b = rng.standard_normal((100000, 2)) * 50
    for s1 in (1, -1):
        for s2 in (1, -1):
            mu = np.abs(resonance_mu(a, b, s1, s2, MassPair(1.0, 1.0)))
            assert mu.min() > 0


def test_ray_root_for_resonant_masses():
    masses = MassPair(0.4, 1.0)
    root = resonance_ray_root(masses)
    xi = np.array([root, 0.0])
    assert abs(resonance_mu(xi, xi, -1, 1, masses)) < 1e-10
    assert resonance_ray_root(MassPair(1.0, 1.0)) is None


def test_prec():
    assert prec(0, 11) and not prec(0, 10)
    assert succeq(5, 5)


def test_predicate_and_integral():
    low = DyadicTuple(3, 3, 3, -14, -14, -14, 1, 1)
    assert vanishing_predicate(low, part="i")
    case1 = DyadicTuple(4, 4, 4, -7, -7, -7, 1, -1)
    assert vanishing_predicate(case1, part="ii") and not vanishing_predicate(case1, part="i")
    res = vanishing_integral_test(case1, seed=0)
    assert res.residual <= 1e-10 and res.control >= 1e-3
    high = DyadicTuple(2, 2, 2, 5, 5, 5, 1, 1)
    assert not vanishing_predicate(high)
    with pytest.raises(ValueError):
        DyadicTuple(-1, 0, 0, 0, 0, 0, 1, 1)
    with pytest.raises(ValueError):
        DyadicTuple(1, 1, 1, 0, 0, 0, 2, 1)


def test_regression_set_is_deterministic():
    a = vanishing_regression_set(12, seed=3)
    b = vanishing_regression_set(12, seed=3)
    assert a == b and len(a) == 12
    for t, l, caps in a:
        assert vanishing_predicate(t, l, caps)


def test_bound_ratio_scan_small():
    rep = bound_ratio_scan("non-res", MassPair(1.0, 1.0), 20000, seed=0)
    assert rep.passed and rep.details["min_mu_times_max_weight"] > 0
    with pytest.raises(ValueError):
        bound_ratio_scan("non-res", MassPair(0.4, 1.0), 1000)
    neg = bound_ratio_scan("non-res", MassPair(0.4, 1.0), 20000, negative_control=True)
    assert neg.details["min_abs_mu_at_argmin"] < 1e-6
    with pytest.raises(ValueError):
        bound_ratio_scan("nope")
