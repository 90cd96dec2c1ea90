import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dkg2d.decompositions import lp_symbol, modulation_project, mixed_norm
from dkg2d.fields import Trajectory, free_wave
from dkg2d.grid import make_spacetime_grid
from dkg2d.norms import (aggregate_norm, lplq_norm, sk_norm, slow_norm, xblock_norm,
                         xsum_norm, zk_norm)


def _grid():
    return make_spacetime_grid(32, 2 * np.pi, 32, 2 * np.pi / 128)


def _shell_wave(k, seed=0, s=1):
    g = _grid()
    rng = np.random.default_rng(seed)
    sp = g.spatial
    amp = lp_symbol(k, sp.abs_xi) * (rng.standard_normal(sp.shape)
                                     + 1j * rng.standard_normal(sp.shape))
    return free_wave(g, amp, s, 1.0)


def _random_traj(seed=0):
    g = _grid()
    rng = np.random.default_rng(seed)
    return Trajectory(g, rng.standard_normal((32, 32, 32)) + 1j * rng.standard_normal((32, 32, 32)))


def test_zero_trajectory():
    tr = Trajectory(_grid(), np.zeros((32, 32, 32)))
    assert lplq_norm(tr, 4, 4 / 3) == 0
    assert sk_norm(tr, 2, 1) == 0
    assert aggregate_norm(tr, 1.1, "S") == 0


def test_lplq_matches_direct_sum():
    tr = _random_traj(1)
    g = tr.grid
    for p, q in ((2, 2), (4, 4 / 3), (np.inf, 2)):
        assert np.isclose(lplq_norm(tr, p, q), mixed_norm(tr.data, p, q, g.dt, g.spatial.dx),
                          rtol=1e-12)


def test_xblock_parseval_without_caps():
    tr = _random_traj(2)
    g = tr.grid
    k, b = 1, 0.5
    lo, hi = g.modulation_range()
    for j in range(max(k, lo), hi + 1):
        q = modulation_project(tr, j, 1, 1.0)
        want = 2.0 ** (j * b) * mixed_norm(q.data, 2, 2, g.dt, g.spatial.dx)
        assert np.isclose(xblock_norm(tr, k, j, 1, b, 2, 2), want, rtol=1e-10)


def test_xblock_cap_sum_sandwich():
    # windows sum to one, squares sum to at least 1/2
    tr = _random_traj(3)
    g = tr.grid
    lo, _ = g.modulation_range()
    k = lo + 4
    j = k - 2
    q = modulation_project(tr, j, 1, 1.0)
    full = mixed_norm(q.data, 2, 2, g.dt, g.spatial.dx)
    v = xblock_norm(tr, k, j, 1, 0.0, 2, 2)
    assert full / np.sqrt(2) - 1e-12 <= v <= full + 1e-12


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 10.0), st.integers(0, 100))
def test_norms_homogeneous(c, seed):
    tr = _random_traj(seed)
    tc = tr.replace(c * tr.data)
    assert np.isclose(xsum_norm(tc, 2, 1, 0.5, 4, 4 / 3, 2), c * xsum_norm(tr, 2, 1, 0.5, 4, 4 / 3, 2),
                      rtol=1e-10)
    assert np.isclose(lplq_norm(tc, 8 / 3, 8), c * lplq_norm(tr, 8 / 3, 8), rtol=1e-10)


def test_sk_and_zk_on_free_waves():
    for k in (2, 3):
        tr = _shell_wave(k)
        s = sk_norm(tr, k, 1)
        z = zk_norm(tr, k, 1)
        assert np.isfinite(s) and s > 0
        assert z >= s


def test_norm_guards():
    tr = _random_traj(4)
    with pytest.raises(ValueError):
        lplq_norm(tr, 0.5, 2)
    with pytest.raises(ValueError):
        xblock_norm(tr, 2, -5, 1, 0.5, 2, 2)
    with pytest.raises(ValueError):
        sk_norm(tr, 0, 1)
    with pytest.raises(ValueError):
        aggregate_norm(tr, 1.1, "Q")


def test_slow_norm_finite():
    tr = _random_traj(5)
    assert np.isfinite(slow_norm(tr, 1)) and slow_norm(tr, 1) > 0
