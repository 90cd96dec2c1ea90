"""Two-component Dirac algebra and the sign projectors.

We use ``gamma0 = beta = sigma3``, ``alpha_j = sigma_j`` and
``gamma_j = gamma0 sigma_j``.  The projector symbols are

    Pi_s(xi) = (I + s (xi . alpha + M beta) / <xi>_M) / 2,

the spectral projectors of the free Dirac Hamiltonian ``H(xi) = xi . alpha + M beta``.
Vectorized functions take wavevectors with a trailing axis of length 2 and
return matrices with two trailing axes.
"""
import time

import numpy as np

from .report import LemmaReport

pauli1 = np.array([[0, 1], [1, 0]], dtype=complex)
pauli2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
pauli3 = np.array([[1, 0], [0, -1]], dtype=complex)
identity = np.eye(2, dtype=complex)

beta = gamma0 = pauli3
alpha1, alpha2 = pauli1, pauli2
gamma1 = gamma0 @ pauli1
gamma2 = gamma0 @ pauli2

# Minkowski metric, signature (+, -, -)
metric = np.diag([1.0, -1.0, -1.0])


def _xi(xi):
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1:] != (2,):
        raise ValueError("wavevectors need a trailing axis of length 2")
    return xi


def _sign(s):
    if s in (1, -1, "+", "-"):
        return 1 if s in (1, "+") else -1
    raise ValueError(f"sign must be +1 or -1, got {s!r}")


def weight(xi, mass):
    """``<xi>_mass = sqrt(mass^2 + |xi|^2)``."""
    if mass < 0:
        raise ValueError("mass must be >= 0")
    xi = _xi(xi)
    # hypot avoids underflow of tiny masses
    return np.hypot(np.hypot(xi[..., 0], xi[..., 1]), mass)


def hamiltonian_symbol(xi, M):
    xi = _xi(xi)
    return (xi[..., 0, None, None] * alpha1 + xi[..., 1, None, None] * alpha2
            + M * beta)


def _unit(xi, M):
    """Components of ``(xi1, xi2, M) / <xi>_M``, zero where ``<xi>_M = 0``.

    Inputs are rescaled by their largest entry first so subnormal values
    keep full precision.
    """
    a = np.maximum(np.maximum(np.abs(xi[..., 0]), np.abs(xi[..., 1])), M)
    a = np.where(a > 0, a, 1.0)
    v1, v2, v3 = xi[..., 0] / a, xi[..., 1] / a, M / a
    w = np.sqrt(v1 * v1 + v2 * v2 + v3 * v3)
    w = np.where(w > 0, w, 1.0)
    return v1 / w, v2 / w, v3 / w


def pi_symbol(xi, M, s):
    """Projector ``Pi_s^M(xi)`` as an array of shape ``xi.shape[:-1] + (2, 2)``.

    At ``xi = 0`` with ``M = 0`` the symbol is undefined; we return ``I/2``.
    """
    if M < 0:
        raise ValueError("M must be >= 0")
    s = _sign(s)
    xi = _xi(xi)
    n1, n2, n3 = _unit(xi, M)
    h = (n1[..., None, None] * alpha1 + n2[..., None, None] * alpha2
         + n3[..., None, None] * beta)
    return 0.5 * (identity + s * h)


def spin_projector(xi, M, s):
    """Closed form ``|u><u|`` for the ``s``-eigenvector of ``n . sigma``.

    Independent of :func:`pi_symbol`: builds the unit eigenvector from the
    polar angles of ``n = (xi1, xi2, M) / <xi>_M`` and forms its outer product.
    """
    s = _sign(s)
    xi = _xi(xi)
    # angles are scale invariant; rescaling avoids subnormal rounding, and
    # arctan2 keeps the polar angle accurate near the poles
    M = np.asarray(M, dtype=float)
    a = np.maximum(np.maximum(np.abs(xi[..., 0]), np.abs(xi[..., 1])), M)
    a = np.where(a > 0, a, 1.0)
    xi = xi / a[..., None]
    th = np.arctan2(np.hypot(xi[..., 0], xi[..., 1]), s * M / a)
    ph = np.arctan2(s * xi[..., 1], s * xi[..., 0])
    u = np.stack([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)], axis=-1)
    return u[..., :, None] * u[..., None, :].conj()


def commutation_residual(xi, M, s):
    """Residuals of the two candidate forms of the projector/beta swap rule.

    Returns
    -------
    residual_beta : ndarray
        ``||Pi_s beta - beta Pi_{-s} - s M <xi>^{-1} beta||``
    residual_identity : ndarray
        Same with ``I`` in place of the trailing ``beta``; this is the form
        that holds exactly.
    """
    s = _sign(s)
    xi = _xi(xi)
    d = pi_symbol(xi, M, s) @ beta - beta @ pi_symbol(xi, M, -s)
    c = (s * _unit(xi, M)[2])[..., None, None]
    r_beta = np.linalg.norm(d - c * beta, ord=2, axis=(-2, -1))
    r_ident = np.linalg.norm(d - c * identity, ord=2, axis=(-2, -1))
    return r_beta, r_ident


def null_pairing(xi1, s1, v1, xi2, s2, v2, M):
    """``(Pi_{s1}(xi1) v1)^* beta Pi_{s2}(xi2) v2``, conjugate-linear in ``v1``."""
    a = np.einsum("...ab,...b->...a", pi_symbol(xi1, M, s1), np.asarray(v1, dtype=complex))
    b = np.einsum("...ab,...b->...a", pi_symbol(xi2, M, s2), np.asarray(v2, dtype=complex))
    return np.einsum("...a,...a->...", a.conj(), b * np.array([1.0, -1.0]))


def angle(u, v):
    """Angle in ``[0, pi]`` between planar vectors; 0 if either vanishes."""
    u, v = _xi(u), _xi(v)
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    dot = u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]
    return np.abs(np.arctan2(cross, dot))


def _random_vectors(rng, n, rmin=2.0 ** -6, rmax=2.0 ** 10):
    r = rmin * (rmax / rmin) ** rng.random(n)
    th = 2 * np.pi * rng.random(n)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def _unit_spinors(rng, n):
    v = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _product_ratios(xi, eta, s1, s2, M):
    prod = pi_symbol(xi, M, s1) @ pi_symbol(eta, M, s2)
    num = np.linalg.norm(prod, ord=2, axis=(-2, -1))
    ang = angle(xi, eta) if s1 != s2 else angle(-xi, eta)
    den = ang + 1.0 / weight(xi, 1.0) + 1.0 / weight(eta, 1.0)
    return num / den


def symbol_product_scan(s1, s2, M=1.0, sample_count=100000, seed=0, tol=0.1):
    """Empirical constant in ``|Pi_{s1}(xi) Pi_{s2}(eta)| <= C (angle + <xi>^-1 + <eta>^-1)``.

    The angle is ``angle(xi, eta)`` for opposite signs and ``angle(-xi, eta)``
    for equal signs.  Half of the ``eta`` draws sit near the null direction so
    the small-angle regime is well sampled.  The scan is repeated with twice
    the samples and passes when the maximum moves by less than ``tol``.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    s1, s2 = _sign(s1), _sign(s2)
    t0 = time.perf_counter()

    def draw(rng, n):
        xi = _random_vectors(rng, n)
        eta = _random_vectors(rng, n)
        half = n // 2
        # near-null: eta close to the direction where the product degenerates
        d = xi[:half] if s1 != s2 else -xi[:half]
        ang = rng.standard_normal(half) * 2.0 ** rng.uniform(-12, 0, half)
        c, s = np.cos(ang), np.sin(ang)
        rot = np.stack([c * d[:, 0] - s * d[:, 1], s * d[:, 0] + c * d[:, 1]], -1)
        eta[:half] = rot / np.linalg.norm(d, axis=-1, keepdims=True) \
            * np.linalg.norm(eta[:half], axis=-1, keepdims=True)
        return _product_ratios(xi, eta, s1, s2, M)

    rng = np.random.default_rng(seed)
    r1 = draw(rng, sample_count)
    r2 = np.concatenate([r1, draw(rng, sample_count)])
    c1, c2 = float(r1.max()), float(r2.max())
    stable = abs(c2 - c1) <= tol * c1 if c1 > 0 else c2 == 0
    return LemmaReport("PiPi", {"s1": s1, "s2": s2, "M": M, "sample_count": sample_count},
                       seed, r2.size, r2, c2, bool(np.isfinite(c2) and stable),
                       {"constant_n": c1, "constant_2n": c2},
                       time.perf_counter() - t0)


def _stable1_ratios(rng, n, k1, k2, l, s1, s2, M):
    om1 = 2 * np.pi * rng.random(n)
    d = (2 * rng.random(n) - 1) * 2.0 ** -l
    # s2 * omega2 is within 2^-l of s1 * omega1
    om2 = om1 + d + (np.pi if s1 != s2 else 0.0)
    xi1 = 2.0 ** k1 * np.stack([np.cos(om1), np.sin(om1)], -1)
    xi2 = 2.0 ** k2 * np.stack([np.cos(om2), np.sin(om2)], -1)
    v1, v2 = _unit_spinors(rng, n), _unit_spinors(rng, n)
    return np.abs(null_pairing(xi1, s1, v1, xi2, s2, v2, M)) * 2.0 ** l


def cap_pairing_bound_scan(k1, k2, l, s1, s2, sample_count=10000, seed=0, M=1.0,
                           variant="stable1", tol=0.1, grid=None):
    """Empirical constant for the cap-localized null pairing.

    ``variant='stable1'`` samples unit spinors and frequencies ``2^k omega``
    with ``dist(s1 omega1, s2 omega2) <= 2^-l`` and reports
    ``max |<Pi_{s1} v1, beta Pi_{s2} v2>| 2^l``.  ``variant='stable2'`` measures
    ``||(Pi_s(D) - Pi_s(2^k omega_cap)) P_cap f||_2 / ||P_cap f||_2 * 2^l``
    over random cap-localized fields (``k = k1``, ``s = s1``).
    """
    if not (1 <= l <= min(k1, k2) + 10):
        raise ValueError(f"l={l} outside [1, min(k1, k2) + 10]")
    s1, s2 = _sign(s1), _sign(s2)
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    if variant == "stable1":
        r1 = _stable1_ratios(rng, sample_count, k1, k2, l, s1, s2, M)
        r2 = np.concatenate([r1, _stable1_ratios(rng, sample_count, k1, k2, l, s1, s2, M)])
    elif variant == "stable2":
        from .decompositions import cap_projector_deviation
        r1 = cap_projector_deviation(k1, l, s1, sample_count, rng, M, grid)
        r2 = np.concatenate([r1, cap_projector_deviation(k1, l, s1, sample_count, rng, M, grid)])
    else:
        raise ValueError(f"unknown variant {variant!r}")
    c1, c2 = float(r1.max()), float(r2.max())
    stable = abs(c2 - c1) <= tol * c1 if c1 > 0 else c2 == 0
    return LemmaReport(variant, {"k1": k1, "k2": k2, "l": l, "s1": s1, "s2": s2, "M": M,
                                 "sample_count": sample_count},
                       seed, r2.size, r2, c2, bool(np.isfinite(c2) and stable),
                       {"constant_n": c1, "constant_2n": c2},
                       time.perf_counter() - t0)


def lattice_projector(grid, M, s):
    """``Pi_s^M`` evaluated on a grid's lattice, shape ``(n, n, 2, 2)``."""
    return pi_symbol(grid.xi, M, s)


def apply_projector(spec, grid, M, s):
    """Apply ``Pi_s^M(D)`` to a spinor spectrum of shape ``(..., 2, n, n)``."""
    P = lattice_projector(grid, M, s)
    return np.einsum("xyab,...bxy->...axy", P, spec)
