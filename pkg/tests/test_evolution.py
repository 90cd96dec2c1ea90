import numpy as np
import pytest

from dkg2d.algebra import pi_symbol
from dkg2d.evolution import (DKGState, GuardError, PicardDivergence, SolverConfig, StateError,
                             charge, evolve, nonlinearity, prepare_initial, random_initial_data,
                             read_diagnostics_csv, residual_second_order, scattering_profiles,
                             scattering_sweep, write_diagnostics_csv)
from dkg2d.fields import MassPair, ScalarField, SpinorField
from dkg2d.grid import make_grid


def _zero_state(g, masses=MassPair()):
    z = np.zeros((2,) + g.shape)
    return prepare_initial(SpinorField(g, z), ScalarField(g, z[0]), ScalarField(g, z[0]), masses)


def test_zero_data_stays_zero():
    g = make_grid(16, 8.0)
    tr = evolve(_zero_state(g), SolverConfig(dt=0.1, t_end=1.0, stride=5))
    assert np.all(tr.data == 0)
    assert all(r["charge"] == 0 for r in tr.diagnostics)


def test_linear_mode_matches_free_flow():
    g = make_grid(32, 16.0)
    st = random_initial_data(g, 0.1, seed=1)
    cfg = SolverConfig(dt=0.05, t_end=2.0, stride=40, nonlinear=False)
    tr = evolve(st, cfg)
    U0, U1 = st.pack(), tr.data[-1]
    M, m = st.masses.M, st.masses.m
    wM, wm = g.weight(M), g.weight(m)
    t = 2.0
    want = np.concatenate([U0[0:2] * np.exp(-1j * t * wM), U0[2:4] * np.exp(1j * t * wM),
                           U0[4:5] * np.exp(-1j * t * wm)])
    assert np.max(np.abs(U1 - want)) <= 1e-10 * np.max(np.abs(U0))


def test_nonlinearity_matches_direct_convolution():
    # F_+ = Pi_+ [Re(phi_+) beta psi] against an explicit cyclic convolution on 8 x 8
    g = make_grid(8, 2 * np.pi)
    rng = np.random.default_rng(0)
    masses = MassPair(1.0, 1.0)
    psi_h = np.zeros((2,) + g.shape, complex)
    psi_h[:, 1, 2] = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    psi_h = np.einsum("xyab,bxy->axy", pi_symbol(g.xi, 1.0, 1), psi_h)
    phi_h = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    st = DKGState(0.0, SpinorField(g, psi_h, "frequency"),
                  SpinorField(g, np.zeros_like(psi_h), "frequency"),
                  ScalarField(g, phi_h, "frequency"), masses)
    fp, fm, _ = nonlinearity(st, dealias=False)
    n, L = g.n, g.length
    idx = np.arange(n)
    re_phi = 0.5 * (phi_h + np.conj(phi_h[-idx[:, None] % n, -idx[None, :] % n]))
    bpsi = psi_h * np.array([1.0, -1.0])[:, None, None]
    conv = np.zeros((2, n, n), complex)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    conv[:, a, b] += re_phi[(a - c) % n, (b - d) % n] * bpsi[:, c, d]
    conv /= L ** 2
    want = np.einsum("xyab,bxy->axy", pi_symbol(g.xi, 1.0, 1), conv)
    assert np.max(np.abs(fp.data - want)) <= 1e-12 * max(1.0, np.max(np.abs(want)))
    assert np.allclose(fp.data + fm.data, conv, atol=1e-12)


def test_state_rejects_unprojected_halves():
    g = make_grid(16, 4.0)
    rng = np.random.default_rng(1)
    bad = SpinorField(g, rng.standard_normal((2,) + g.shape), "frequency")
    z = SpinorField(g, np.zeros((2,) + g.shape), "frequency")
    with pytest.raises(StateError):
        DKGState(0.0, bad, z, ScalarField(g, np.zeros(g.shape), "frequency"))
    with pytest.raises(StateError):
        prepare_initial(z, ScalarField(g, 1j * np.ones(g.shape)), ScalarField(g, np.zeros(g.shape)))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0)
    with pytest.raises(ValueError):
        SolverConfig(stride=0)
    with pytest.raises(ValueError):
        SolverConfig(mode="euler")
    g = make_grid(16, 4.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=1.0).validate(g)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=0.25).validate(g)


def test_small_run_conserves_charge(tmp_path):
    g = make_grid(32, 16.0)
    st = random_initial_data(g, 1e-2, seed=2)
    tr = evolve(st, SolverConfig(dt=0.05, t_end=2.0, stride=10))
    q = [r["charge"] for r in tr.diagnostics]
    assert abs(q[-1] - q[0]) <= 1e-8 * q[0]
    write_diagnostics_csv(tr.diagnostics, tmp_path / "d.csv")
    back = read_diagnostics_csv(tmp_path / "d.csv")
    assert len(back) == len(tr.diagnostics)
    assert np.isclose(back[-1]["charge"], q[-1], rtol=1e-15)


def test_large_data_trips_guard():
    g = make_grid(64, 32.0)
    st = random_initial_data(g, 10.0, seed=0)
    with pytest.raises(GuardError) as e:
        evolve(st, SolverConfig(dt=0.125, t_end=4.0, stride=2))
    assert e.value.reason in ("charge", "blowup", "nonfinite")
    assert e.value.diagnostics


def test_picard_agrees_and_diverges():
    g = make_grid(32, 16.0)
    st = random_initial_data(g, 1e-3, seed=3)
    a = evolve(st, SolverConfig(dt=0.05, t_end=1.0, stride=20))
    b = evolve(st, SolverConfig(dt=0.05, t_end=1.0, stride=20, mode="picard"))
    lin = evolve(st, SolverConfig(dt=0.05, t_end=1.0, stride=20, nonlinear=False))
    # trapezoid Duhamel error is small against the nonlinear part itself
    nl = np.max(np.abs(a.data[-1] - lin.data[-1]))
    assert np.max(np.abs(a.data[-1] - b.data[-1])) <= 1e-2 * nl
    # large data on a small torus over a long window: no contraction
    g = make_grid(32, 2 * np.pi)
    dt = g.dx / 4
    n = int(round(5.0 / dt))
    big = random_initial_data(g, 10.0, seed=3)
    with pytest.raises(PicardDivergence):
        evolve(big, SolverConfig(dt=dt, t_end=n * dt, stride=n, mode="picard"))


def test_residual_controls():
    g = make_grid(16, 8.0)
    tr = evolve(_zero_state(g), SolverConfig(dt=0.1, t_end=1.0))
    assert residual_second_order(tr) == (0.0, 0.0)
    st = random_initial_data(g, 1.0, seed=4)
    tr = evolve(st, SolverConfig(dt=0.1, t_end=1.0))
    rng = np.random.default_rng(0)
    tr.data = rng.standard_normal(tr.data.shape) * np.abs(tr.data).max()
    rd, rk = residual_second_order(tr)
    assert rd > 1e-2 and rk > 1e-2


def test_scattering_profiles_and_sweep():
    g = make_grid(32, 32.0)
    st = random_initial_data(g, 1e-2, seed=5, envelope=3.0)
    cfg = SolverConfig(dt=0.25, t_end=4.0, stride=4)
    rep = scattering_profiles(evolve(st, cfg))
    assert np.allclose(rep.distances, rep.distances.T) and np.all(rep.distances >= 0)
    with pytest.raises(ValueError):
        scattering_sweep(g, [1e-3], cfg)
    with pytest.raises(ValueError):
        scattering_sweep(g, [1e-3, -1.0], cfg)
    with pytest.raises(ValueError):
        scattering_sweep(g, [1e-3, 1e-2], SolverConfig(dt=0.25, t_end=4.0, stride=5))
    sw = scattering_sweep(g, [1e-3, 3e-3, 1e-2], cfg, envelope=3.0)
    assert abs(sw.slope - 2) <= 0.2


def test_charge_is_l2_squared():
    g = make_grid(16, 4.0)
    st = random_initial_data(g, 0.5, seed=6)
    psi = st.psi_plus.physical().data + st.psi_minus.physical().data
    assert np.isclose(charge(st.pack(), g), np.sum(np.abs(psi) ** 2) * g.dx ** 2, rtol=1e-12)
