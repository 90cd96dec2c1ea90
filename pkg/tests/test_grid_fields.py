import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dkg2d.fields import (FieldError, MassPair, ScalarField, SpinorField, Trajectory, fft2,
                          free_wave, l2_norm, random_sobolev_field, sobolev_norm,
                          spacetime_forward, spacetime_inverse, spacetime_l2)
from dkg2d.grid import GridError, SpaceTimeGrid, SpatialGrid, make_grid, make_spacetime_grid
from dkg2d.snapshot import SnapshotError, SnapshotVersionError, read_snapshot, write_snapshot


def test_grid_basics():
    g = make_grid(16, 2 * np.pi)
    assert g.shape == (16, 16)
    assert np.isclose(g.dx, 2 * np.pi / 16)
    assert np.isclose(g.dxi, 1.0)
    assert np.isclose(g.nyquist, 8.0)
    assert g.xi.shape == (16, 16, 2)
    assert g.abs_xi[0, 0] == 0
    assert g.dealias_mask.dtype == bool and g.dealias_mask[0, 0]
    assert not g.dealias_mask[8, 0]


@pytest.mark.parametrize("n, L", [(7, 1.0), (6, 1.0), (16, 0.0), (16, -1.0), (16, np.inf)])
def test_grid_rejects(n, L):
    with pytest.raises(GridError):
        SpatialGrid(n, L)


def test_spacetime_grid_rejects_short_time_axis():
    with pytest.raises(GridError):
        make_spacetime_grid(16, 1.0, 8, 0.1)
    with pytest.raises(GridError):
        make_spacetime_grid(16, 1.0, 16, 0.0)


def test_grid_equality_and_hash():
    assert make_grid(16, 3.0) == make_grid(16, 3.0)
    assert hash(make_grid(16, 3.0)) == hash(make_grid(16, 3.0))
    assert make_grid(16, 3.0) != make_grid(32, 3.0)


def test_single_mode_sobolev_norm():
    # coefficient a at one lattice mode -> <xi0>^s |a| / L
    g = make_grid(16, 4.0)
    a = 2.0 - 1.5j
    h = np.zeros(g.shape, complex)
    h[3, 2] = a
    f = ScalarField(g, h, "frequency")
    xi0 = g.xi[3, 2]
    for s in (0.0, 0.5, 1.1):
        want = (1 + xi0 @ xi0) ** (s / 2) * abs(a) / g.length
        assert np.isclose(sobolev_norm(f, s), want, rtol=1e-12)


def test_field_roundtrip_and_parseval():
    g = make_grid(32, 5.0)
    f = random_sobolev_field(g, "spinor", 1.3, 0.7, seed=1)
    back = f.frequency().physical()
    assert np.allclose(back.data, f.physical().data, atol=1e-13)
    # L^2 in physical space equals the frequency-side sum / L^2
    p = f.physical().data
    assert np.isclose(np.sqrt(np.sum(np.abs(p) ** 2) * g.dx ** 2), l2_norm(f), rtol=1e-12)


def test_field_guards():
    g = make_grid(16, 1.0)
    with pytest.raises(FieldError):
        ScalarField(g, np.zeros((8, 8)))
    with pytest.raises(FieldError):
        SpinorField(g, np.full((2, 16, 16), np.nan))
    a = ScalarField(g, np.ones(g.shape))
    with pytest.raises(FieldError):
        a + a.frequency()
    with pytest.raises(ValueError):
        a.data[0, 0] = 2


def test_mass_pair():
    assert MassPair(1.0, 1.0).nonresonant
    assert not MassPair(0.4, 1.0).nonresonant


def test_free_wave_spacetime_roundtrip():
    st_ = make_spacetime_grid(16, 2 * np.pi, 32, 2 * np.pi / 32 / 4)
    amp = np.zeros(st_.spatial.shape, complex)
    amp[1, 0] = 1.0
    tr = free_wave(st_, amp, 1, 1.0)
    spec = spacetime_forward(st_, tr.data)
    assert np.allclose(spacetime_inverse(st_, spec), tr.data, atol=1e-12)
    assert np.isclose(spacetime_l2(st_, spec) ** 2,
                      np.sum(np.abs(tr.data) ** 2) * st_.dt * st_.spatial.dx ** 2, rtol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(0.5, 20.0))
def test_parseval_property(seed, L):
    g = make_grid(16, L)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    lhs = np.sum(np.abs(u) ** 2) * g.dx ** 2
    rhs = np.sum(np.abs(fft2(u) * g.dx ** 2) ** 2) / L ** 2
    assert np.isclose(lhs, rhs, rtol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(0.1, 3.0))
def test_sobolev_norm_homogeneous(seed, c):
    g = make_grid(16, 3.0)
    f = random_sobolev_field(g, "scalar", 1.0, 0.5, seed=seed)
    assert np.isclose(sobolev_norm(c * f, 1.1), c * sobolev_norm(f, 1.1), rtol=1e-12)


def test_snapshot_roundtrip(tmp_path):
    g = make_grid(16, 2.0)
    f = random_sobolev_field(g, "spinor", 1.0, 0.5, seed=3)
    write_snapshot(f, tmp_path / "f.snap")
    h = read_snapshot(tmp_path / "f.snap")
    assert type(h) is SpinorField and np.array_equal(h.data, f.data) and h.grid == g
    st_ = make_spacetime_grid(16, 2.0, 16, 0.05)
    tr = Trajectory(st_, np.ones((16, 16, 16)), t0=0.5)
    write_snapshot(tr, tmp_path / "t.snap")
    back = read_snapshot(tmp_path / "t.snap")
    assert np.array_equal(back.data, tr.data) and back.t0 == 0.5


def test_snapshot_errors(tmp_path):
    p = tmp_path / "bad.snap"
    p.write_bytes(b"not json\n")
    with pytest.raises(SnapshotError):
        read_snapshot(p)
    g = make_grid(16, 2.0)
    write_snapshot(ScalarField(g, np.ones(g.shape)), p)
    raw = p.read_bytes()
    head, body = raw.split(b"\n", 1)
    p.write_bytes(head.replace(b'"version": 1', b'"version": 99') + b"\n" + body)
    with pytest.raises(SnapshotVersionError):
        read_snapshot(p)
    p.write_bytes(head + b"\n" + body[:-8])
    with pytest.raises(SnapshotError):
        read_snapshot(p)
