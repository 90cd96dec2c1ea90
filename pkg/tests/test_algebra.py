import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dkg2d import algebra as A
from dkg2d.grid import make_grid

I2 = np.eye(2)
finite = st.floats(-1e3, 1e3, allow_nan=False)
mass = st.floats(0.0, 5.0)
sign = st.sampled_from([1, -1])


def test_named_constants():
    for p in (A.pauli1, A.pauli2, A.pauli3):
        assert np.allclose(p @ p, I2)
        assert np.allclose(p, p.conj().T)
    assert np.allclose(A.pauli1 @ A.pauli2, 1j * A.pauli3)
    assert np.allclose(A.gamma0 @ A.gamma0, I2)
    for g in (A.gamma1, A.gamma2):
        assert np.allclose(g @ g, -I2)
        assert np.allclose(g @ A.gamma0 + A.gamma0 @ g, 0)
    assert np.allclose(A.gamma1 @ A.gamma2 + A.gamma2 @ A.gamma1, 0)
    for a in (A.alpha1, A.alpha2):
        assert np.allclose(a @ A.beta + A.beta @ a, 0)


@settings(max_examples=200, deadline=None)
@given(finite, finite, mass, sign)
def test_projector_properties(x, y, M, s):
    xi = np.array([x, y])
    if M == 0 and x == y == 0:
        return
    P = A.pi_symbol(xi, M, s)
    Q = A.pi_symbol(xi, M, -s)
    assert np.allclose(P @ P, P, atol=1e-12)
    assert np.allclose(P, P.conj().T, atol=1e-14)
    assert np.isclose(np.trace(P).real, 1.0, atol=1e-12)
    assert np.allclose(P + Q, I2, atol=1e-14)
    assert np.allclose(P @ Q, 0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(finite, finite, mass, sign)
def test_projector_matches_spin_eigenvector(x, y, M, s):
    # independent closed form |u><u| for the n.sigma eigenvector
    xi = np.array([x, y])
    if M == 0 and x == y == 0:
        return
    assert np.allclose(A.pi_symbol(xi, M, s), A.spin_projector(xi, M, s), atol=1e-12)


def test_projector_idempotent_on_random_spinors():
    rng = np.random.default_rng(0)
    xi = rng.standard_normal((10000, 2)) * 30
    v = rng.standard_normal((10000, 2)) + 1j * rng.standard_normal((10000, 2))
    P = A.pi_symbol(xi, 1.0, 1)
    once = np.einsum("nab,nb->na", P, v)
    twice = np.einsum("nab,nb->na", P, once)
    assert np.max(np.abs(twice - once)) <= 1e-12 * np.max(np.abs(v))


def test_commutation_residual_at_origin():
    # at xi = 0 the beta form misses by diag(1,0) - diag(1,-2)
    rp, rc = A.commutation_residual(np.zeros(2), 1.0, 1)
    assert np.isclose(rp, 2.0)
    assert rc <= 1e-15


@settings(max_examples=100, deadline=None)
@given(finite, finite, mass, sign)
def test_commutation_identity_form(x, y, M, s):
    if M == 0 and x == y == 0:
        return
    _, rc = A.commutation_residual(np.array([x, y]), M, s)
    assert rc <= 1e-12


def test_null_pairing_spin_expectation():
    # Pi_+ v is an n.sigma eigenstate, so <u, sigma3 u> = n3 |u|^2 with n3 = M/<xi>
    rng = np.random.default_rng(1)
    for _ in range(50):
        xi = rng.standard_normal(2) * 5
        M = rng.uniform(0.1, 3)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        u = A.pi_symbol(xi, M, 1) @ v
        got = A.null_pairing(xi, 1, v, xi, 1, v, M)
        want = M / np.sqrt(M * M + xi @ xi) * np.vdot(u, u).real
        assert np.isclose(got, want, rtol=1e-12, atol=1e-14)


def test_massless_aligned_product_vanishes():
    rng = np.random.default_rng(2)
    xi = rng.standard_normal((1000, 2)) * 10
    P = A.pi_symbol(xi, 0.0, 1) @ A.pi_symbol(xi, 0.0, -1)
    assert np.max(np.abs(P)) <= 1e-15


def test_weight_and_angle():
    assert np.isclose(A.weight([3.0, 4.0], 0.0), 5.0)
    assert np.isclose(A.angle([1.0, 0.0], [0.0, 2.0]), np.pi / 2)
    assert A.angle([0.0, 0.0], [1.0, 0.0]) == 0
    with pytest.raises(ValueError):
        A.weight([1.0, 1.0], -1.0)
    with pytest.raises(ValueError):
        A.pi_symbol([1.0, 2.0, 3.0], 1.0, 1)
    with pytest.raises(ValueError):
        A.pi_symbol([1.0, 2.0], 1.0, 0)


def test_symbol_product_scan_stable():
    rep = A.symbol_product_scan(1, -1, 1.0, 100000, seed=0)
    assert rep.passed and 0 < rep.constant < 1
    assert abs(rep.details["constant_2n"] - rep.details["constant_n"]) <= 0.1 * rep.details["constant_n"]


def test_cap_pairing_bound_scan():
    a = A.cap_pairing_bound_scan(6, 6, 3, 1, -1, 10000, seed=0)
    b = A.cap_pairing_bound_scan(8, 8, 5, 1, -1, 10000, seed=0)
    assert a.passed and b.passed
    assert abs(a.constant - b.constant) <= 0.1 * max(a.constant, b.constant)
    with pytest.raises(ValueError):
        A.cap_pairing_bound_scan(6, 6, 0, 1, -1)
    with pytest.raises(ValueError):
        A.cap_pairing_bound_scan(6, 6, 3, 1, -1, variant="other")


def test_apply_projector_on_lattice():
    g = make_grid(16, 2 * np.pi)
    rng = np.random.default_rng(3)
    f = rng.standard_normal((2,) + g.shape) + 1j * rng.standard_normal((2,) + g.shape)
    p = A.apply_projector(f, g, 1.0, 1)
    m = A.apply_projector(f, g, 1.0, -1)
    assert np.allclose(p + m, f, atol=1e-13)
    assert np.allclose(A.apply_projector(p, g, 1.0, 1), p, atol=1e-13)
