"""Dyadic bound tables for the trilinear estimates and their summability.

A table ``G(k, k1, k2) >= 0`` is summable when the trilinear form

    T(a, b, c) = sum_{max ~ med} G(k, k1, k2) a_k b_k1 c_k2 / (min(k, k1, k2) + 1)^10

is bounded on ``l^2 x l^2 x l^2``.  Here ``max ~ med`` means the two largest
indices differ by at most 10, and each case table lives on its own region
(``|k - k2| <= 10`` and so on).  The norm of the truncation to indices
``<= K_max`` is computed by the higher-order power method, which for a
nonnegative tensor converges to the maximum over nonnegative unit vectors.
"""
import time

import numpy as np

from ..report import LemmaReport

NEAR = 10


def _jb(k):
    return np.sqrt(1.0 + k * k)


def _c1(k, k1, k2, r, r0):
    return _jb(k1) * 2.0 ** (-r * k1) + np.maximum(
        _jb(k1) * 2.0 ** (k * (0.5 - 2 * r) + k1 * (r - 0.5)), 2.0 ** ((r0 - 0.5 - r) * k1))


def _c2(k, k1, k2, r, r0):
    return _c1(k, k2, k1, r, r0)


def _c3(k, k1, k2, r, r0):
    return _jb(k) * 2.0 ** (-r * k) + np.maximum(
        2.0 ** (k1 * (0.5 - 2 * r) + k * (r - 0.5)), 2.0 ** ((r0 - r - 0.5) * k))


def _tg1cc1(k, k1, k2, r, r0):
    return 2.0 ** ((0.5 - r) * k1) * 2.0 ** ((1 - r0) * k)


def _tg1cc2(k, k1, k2, r, r0):
    return _tg1cc1(k, k2, k1, r, r0)


def _tg1cc3(k, k1, k2, r, r0):
    return 2.0 ** ((1 - 2 * r) * k1) * 2.0 ** ((r + 0.5 - r0) * k)


def _tg2cc1(k, k1, k2, r, r0):
    return 2.0 ** (k2 * (0.5 - r)) * 2.0 ** (k1 * (1 - r0))


def _tg2cc2(k, k1, k2, r, r0):
    return 2.0 ** (k1 * (r - r0)) * 2.0 ** (k * (1 - 2 * r))


def _tg2cc3(k, k1, k2, r, r0):
    return 2.0 ** (k * (0.5 - r)) * 2.0 ** (k1 * (1 - r0))


def _near(a, b):
    return np.abs(a - b) <= NEAR


# table id -> (formula, region)
TABLES = {
    "C1": (_c1, lambda k, k1, k2: _near(k, k2)),
    "C2": (_c2, lambda k, k1, k2: _near(k, k1)),
    "C3": (_c3, lambda k, k1, k2: _near(k1, k2)),
    "tG1cc1": (_tg1cc1, lambda k, k1, k2: _near(k, k2)),
    "tG1cc2": (_tg1cc2, lambda k, k1, k2: _near(k, k1)),
    "tG1cc3": (_tg1cc3, lambda k, k1, k2: _near(k1, k2)),
    "tG2cc1": (_tg2cc1, lambda k, k1, k2: _near(k, k1)),
    "tG2cc2": (_tg2cc2, lambda k, k1, k2: _near(k, k2)),
    "tG2cc3": (_tg2cc3, lambda k, k1, k2: _near(k1, k2)),
    "zero": (lambda k, k1, k2, r, r0: np.zeros(np.broadcast(k, k1, k2).shape),
             lambda k, k1, k2: np.ones(np.broadcast(k, k1, k2).shape, bool)),
}

# case tables making up each proposition's G
FAMILIES = {"cunn2": ("C1", "C2", "C3"), "cunn22": ("tG1cc1", "tG1cc2", "tG1cc3"),
            "cunn222": ("tG2cc1", "tG2cc2", "tG2cc3")}


def g_value(table_id, k, k1, k2, r=0.6, r0=1.0):
    """Entry of a case table (``0`` outside its region or off ``max ~ med``)."""
    f, region = TABLES[table_id]
    k, k1, k2 = (np.asarray(v, dtype=float) for v in (k, k1, k2))
    s = np.sort(np.stack(np.broadcast_arrays(k, k1, k2)), axis=0)
    ok = (s[2] - s[1] <= NEAR) & region(k, k1, k2)
    return np.where(ok, f(k, k1, k2, r, r0), 0.0)


def family_value(family, k, k1, k2, r=0.6, r0=1.0):
    """Largest case bound that applies at ``(k, k1, k2)``."""
    vals = [g_value(t, k, k1, k2, r, r0) for t in FAMILIES[family]]
    return np.max(vals, axis=0)


def weighted_tensor(table_id, K_max, r=0.6, r0=1.0):
    """``G / (min + 1)^10`` on ``{0..K_max}^3`` with the admissibility mask applied."""
    i = np.arange(K_max + 1, dtype=float)
    k, k1, k2 = np.meshgrid(i, i, i, indexing="ij")
    if table_id in FAMILIES:
        G = family_value(table_id, k, k1, k2, r, r0)
    else:
        G = g_value(table_id, k, k1, k2, r, r0)
    mn = np.minimum(np.minimum(k, k1), k2)
    return G / (mn + 1.0) ** 10


def _hopm(T, b, c, iters, tol):
    val = 0.0
    a = np.zeros(T.shape[0])
    for _ in range(iters):
        a = np.einsum("ijk,j,k->i", T, b, c)
        a /= np.linalg.norm(a)
        b = np.einsum("ijk,i,k->j", T, a, c)
        b /= np.linalg.norm(b)
        c = np.einsum("ijk,i,j->k", T, a, b)
        nc = np.linalg.norm(c)
        c /= nc
        done = abs(nc - val) <= tol * nc
        val = nc
        if done:
            break
    return float(val), (a, b, c)


def trilinear_norm(T, iters=2000, tol=1e-13, starts=None, restarts=8, seed=0):
    """Norm of a nonnegative trilinear form by the higher-order power method.

    The iteration can stall at a local maximum, so it is run from the
    uniform vector, from point masses at each end of the index range, from
    ``restarts`` random nonnegative vectors and from any ``starts`` given
    (pairs ``(b, c)``); the best value is kept.

    Returns
    -------
    value : float
    vectors : tuple of ndarray
    """
    n0, n1, n2 = T.shape
    if not np.any(T):
        return 0.0, (np.zeros(n0), np.zeros(n1), np.zeros(n2))
    if np.any(T < 0):
        raise ValueError("power iteration here needs a nonnegative tensor")
    rng = np.random.default_rng(seed)
    cand = [(np.ones(n1), np.ones(n2))]
    for pos in (0, -1):
        b, c = np.full(n1, 1e-3), np.full(n2, 1e-3)
        b[pos] = c[pos] = 1.0
        cand.append((b, c))
    cand += [(rng.random(n1), rng.random(n2)) for _ in range(restarts)]
    cand += list(starts or [])
    best = (-1.0, None)
    for b, c in cand:
        b = np.asarray(b, float) + 1e-12
        c = np.asarray(c, float) + 1e-12
        v = _hopm(T, b / np.linalg.norm(b), c / np.linalg.norm(c), iters, tol)
        if v[0] > best[0]:
            best = v
    return best


def _pad(v, n):
    out = np.zeros(n)
    out[:len(v)] = v
    return out


def gbound_summability(table_id, r=0.6, r0=1.0, K_max=32, return_vectors=False, starts=None):
    """Norm of the ``(G)`` form of a case table (or family) truncated at ``K_max``."""
    if table_id not in TABLES and table_id not in FAMILIES:
        raise KeyError(f"unknown table {table_id!r}")
    val, vec = trilinear_norm(weighted_tensor(table_id, K_max, r, r0), starts=starts)
    return (val, vec) if return_vectors else val


def summability_report(table_id, r=0.6, r0=1.0, K_values=(16, 32, 64), tol=0.05,
                       expect_bounded=True):
    """Truncated norms across ``K_values``; passes when they agree to ``tol``.

    Each truncation also starts from the previous maximizer padded with
    zeros, so the computed values never decrease with ``K_max``.  With
    ``expect_bounded=False`` (negative controls) the pass flag requires
    growth beyond ``tol`` instead.
    """
    t0 = time.perf_counter()
    vals, prev = [], None
    for K in sorted(K_values):
        starts = None if prev is None else [(_pad(prev[1], K + 1), _pad(prev[2], K + 1))]
        v, prev = gbound_summability(table_id, r, r0, K, True, starts)
        vals.append(v)
    vals = np.array(vals)
    top = vals.max()
    spread = float((top - vals.min()) / top) if top > 0 else 0.0
    growth = float(vals[-1] / vals[0]) if vals[0] > 0 else float("nan")
    bounded = spread <= tol
    ok = bounded if expect_bounded else not bounded
    return LemmaReport("G-summability", {"table": table_id, "r": r, "r0": r0,
                                         "K_values": sorted(K_values)},
                       None, len(vals), vals, float(top), bool(ok),
                       {"spread": spread, "growth": growth, "bounded": bool(bounded),
                        "expect_bounded": expect_bounded}, time.perf_counter() - t0)
