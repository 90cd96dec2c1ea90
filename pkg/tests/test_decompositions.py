import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dkg2d import decompositions as D
from dkg2d.fields import ScalarField, Trajectory, random_sobolev_field
from dkg2d.grid import make_grid, make_spacetime_grid


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10, allow_nan=False))
def test_rho0_shape(s):
    v = D.rho0(np.array(s))
    assert 0 <= v <= 1
    assert np.isclose(v, D.rho0(np.array(-s)))
    if abs(s) <= 1:
        assert v == 1
    if abs(s) >= 2:
        assert v == 0


def test_rho0_smooth():
    s = np.linspace(0.9, 2.1, 20001)
    d = np.diff(D.rho0(s)) / np.diff(s)
    assert np.max(np.abs(np.diff(d))) < 1e-2


@settings(max_examples=100, deadline=None)
@given(st.floats(2.0 ** -8, 2.0 ** 12))
def test_dyadic_bands_tile(y):
    ks = np.arange(-20, 30)
    assert np.isclose(sum(D.rho_k(k, np.array(y)) for k in ks), 1.0, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.floats(0, 2 * np.pi))
def test_caps_partition_of_unity(l, theta):
    caps = D.CapSystem(l)
    tot = sum(caps.window(i, np.array(theta)) for i in range(caps.count))
    assert np.isclose(tot, 1.0, atol=1e-12)
    hits = sum(caps.window(i, np.array(theta)) > 0 for i in range(caps.count))
    assert hits <= 3


def test_cap_support_width():
    for l in (1, 3, 5):
        caps = D.CapSystem(l)
        th = np.linspace(0, 2 * np.pi, 20000, endpoint=False)
        for i in (0, caps.count // 3):
            w = caps.window(i, th)
            d = np.abs(np.angle(np.exp(1j * (th[w > 0] - caps.centers[i]))))
            assert d.max() <= 2 * 2.0 ** -l + 1e-12
    assert D.CapSystem(0).count == 1 and D.CapSystem(2).count == 32
    with pytest.raises(ValueError):
        D.CapSystem(-1)
    with pytest.raises(IndexError):
        D.CapSystem(1).window(16, np.zeros(3))


def test_cap_distance():
    assert D.cap_distance(3, 0, 1, 0, 1) == 0.0
    # antipodal cap with opposite sign coincides
    assert D.cap_distance(3, 0, 1, 32, -1) == 0.0
    assert D.cap_distance(3, 0, 1, 32, 1) > 0


def test_lp_tilde_reproduces():
    g = make_grid(64, 2 * np.pi)
    f = random_sobolev_field(g, "scalar", 1.0, 0.0, seed=0)
    for k in (1, 2, 3, 4):
        pk = D.lp_project(f, k)
        assert np.allclose(D.lp_tilde(pk, k).data, pk.data, atol=1e-12)


def test_lp_partition_on_lattice():
    g = make_grid(64, 2 * np.pi)
    kmax = D.lp_max_index(g)
    tot = D.lp_le_symbol(0, g.abs_xi) + sum(D.lp_symbol(k, g.abs_xi) for k in range(1, kmax + 1))
    inside = g.abs_xi <= 2.0 ** kmax
    assert np.allclose(tot[inside], 1.0, atol=1e-12)


def test_modulation_bands_recompose():
    stg = make_spacetime_grid(16, 2 * np.pi, 32, 2 * np.pi / 64)
    rng = np.random.default_rng(0)
    tr = Trajectory(stg, rng.standard_normal((32, 16, 16)))
    lo, hi = stg.modulation_range()
    acc = D.modulation_project_le(tr, lo, 1, 1.0).data
    for j in range(lo + 1, hi + 1):
        acc = acc + D.modulation_project(tr, j, 1, 1.0).data
    rest = D.spectrum(tr) * (1 - D.modulation_le_symbol(stg, hi, 1, 1.0))
    acc = acc + Trajectory.from_spectrum(stg, rest).data
    assert np.allclose(acc, tr.data, atol=1e-12)
    with pytest.raises(ValueError):
        D.modulation_project(tr, hi + 5, 1, 1.0)


def test_temporal_window():
    w = D.temporal_window(64)
    assert w.shape == (64,) and 0 <= w.min() and w.max() <= 1
    assert np.allclose(w, w[::-1])
    assert np.all(w[10:54] == 1)


def test_mixed_norm_constant():
    # |f| = 1 on [0, T) x [0, L)^2 -> T^(1/p) L^(2/q)
    stg = make_spacetime_grid(16, 2.0, 16, 0.25)
    phys = np.ones((16, 16, 16))
    for p, q in ((2, 2), (4, 4 / 3), (np.inf, 2), (8 / 3, 8)):
        want = (4.0 ** (0 if p == np.inf else 1 / p)) * (4.0 ** (1 / q))
        assert np.isclose(D.mixed_norm(phys, p, q, 0.25, stg.spatial.dx), want, rtol=1e-12)
