"""Space-time norms built from the dyadic decompositions.

Every norm is evaluated from a trajectory's space-time spectrum.  Sums and
suprema over modulation indices ``j`` run over the bands the lattice
resolves (see :meth:`SpaceTimeGrid.modulation_range`); content below the
lowest resolved band is lumped into one extra block at index ``j_lo - 1``
and :class:`NormReport` records that this happened.

Defaults follow the regularity bookkeeping used throughout: ``r = 0.6``,
``sigma = r + 1/2`` and loss ``r0 = 1``.
"""
from dataclasses import dataclass, field

import numpy as np

from .decompositions import (batched_mixed_norm, cap_pieces_norms, lp_le_symbol,
                             lp_max_index, lp_symbol, modulation_symbol, rho0,
                             spectrum)
from .fields import Trajectory, spacetime_inverse

R_DEFAULT = 0.6
SIGMA_DEFAULT = R_DEFAULT + 0.5
R0_DEFAULT = 1.0


@dataclass
class NormReport:
    """A norm value with its ingredients.

    Attributes
    ----------
    value : float
    table : dict
        Contributing blocks keyed by ``(j, l)`` (``j = inf`` for the
        unfiltered data) or by component name.
    truncation : dict
        Resolved ``j`` range, whether low-modulation content was lumped, and
        whether a temporal window was applied.
    """
    value: float
    table: dict = field(default_factory=dict)
    truncation: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        return {"value": self.value,
                "table": {str(k): v for k, v in self.table.items()},
                "truncation": self.truncation}


def _check_pq(*vals):
    for v in vals:
        if not (v == np.inf or v >= 1):
            raise ValueError(f"exponent {v} outside [1, inf]")


def _bcast(sym, cube):
    return sym[:, None] if cube.ndim == 4 else sym


def _spatial(sym, cube):
    return sym[None, None] if cube.ndim == 4 else sym[None]


def _norm(grid, cube, p, q):
    phys = spacetime_inverse(grid, cube)
    return float(batched_mixed_norm(phys[None], p, q, grid.dt, grid.spatial.dx)[0])


def lplq_norm(traj, p, q, window=False):
    """Riemann-sum ``L^p_t L^q_x`` norm; spinors use the pointwise Euclidean modulus."""
    _check_pq(p, q)
    if window:
        return _norm(traj.grid, spectrum(traj, True), p, q)
    g = traj.grid
    return float(batched_mixed_norm(traj.data[None], p, q, g.dt, g.spatial.dx)[0])


class _Bands:
    """Modulation bookkeeping for one spectrum and sign."""

    def __init__(self, grid, cube, s, mass):
        self.grid, self.cube, self.s, self.mass = grid, cube, s, mass
        self.lo, self.hi = grid.modulation_range()
        self.y = grid.modulation(s, mass)

    def band(self, j):
        if j == self.lo - 1:
            # everything below the first resolved band
            return self.cube * _bcast(rho0(self.y * 2.0 ** -j), self.cube)
        return self.cube * _bcast(modulation_symbol(self.grid, j, self.s, self.mass), self.cube)

    def le(self, j):
        if j == np.inf:
            return self.cube
        return self.cube * _bcast(rho0(self.y * 2.0 ** -j), self.cube)

    def low_mass(self):
        c = self.band(self.lo - 1)
        return float(np.sum(np.abs(c) ** 2))

    def indices(self, jmin=None):
        """Resolved indices ``>= jmin`` plus the lumped block when it is admissible."""
        lo = self.lo if jmin is None else max(self.lo, jmin)
        js = list(range(lo, self.hi + 1))
        lumped = (jmin is None or self.lo - 1 >= jmin) and self.low_mass() > 0
        if lumped:
            js = [self.lo - 1] + js
        return js, lumped

    def meta(self, lumped, window):
        return {"j_lo": self.lo, "j_hi": self.hi, "lumped_low": bool(lumped),
                "window": bool(window)}


def _cap_level(k, j):
    return max(0, (k - j) // 2)


def _xblock(bands, k, j, b, p, q):
    cube = bands.band(j)
    if j >= k:
        val = _norm(bands.grid, cube, p, q)
    else:
        v = cap_pieces_norms(cube, bands.grid, _cap_level(k, j), [(p, q)])[0]
        val = float(np.sqrt(np.sum(v ** 2)))
    return 2.0 ** (j * b) * val


def xblock_norm(traj, k, j, s, b, p, q, mass=1.0, window=False):
    """``2^(jb) (sum_kappa ||Q_j P_kappa f||^2)^(1/2)`` with ``2l = k - j``.

    For ``j >= k`` the caps are dropped.  When ``k - j`` is odd the level is
    ``floor((k - j) / 2)``.
    """
    _check_pq(p, q)
    if j < -k:
        raise ValueError(f"block j={j} lies below -k={-k}")
    bands = _Bands(traj.grid, spectrum(traj, window), s, mass)
    if not bands.lo <= j <= bands.hi:
        raise ValueError(f"band j={j} not resolved (range [{bands.lo}, {bands.hi}])")
    return _xblock(bands, k, j, b, p, q)


def _lr(vals, r):
    vals = np.asarray(vals, dtype=float)
    if vals.size == 0:
        return 0.0
    if r == np.inf:
        return float(vals.max())
    return float(np.sum(vals ** r) ** (1.0 / r))


def _xsum(bands, k, b, p, q, r, window):
    js, lumped = bands.indices(jmin=-k)
    table = {j: _xblock(bands, k, j, b, p, q) for j in js}
    meta = bands.meta(lumped, window)
    meta["truncated_below"] = bool(bands.lo > -k)
    return NormReport(_lr(list(table.values()), r), table, meta)


def xsum_norm(traj, k, s, b, p, q, r, mass=1.0, window=False, report=False):
    """``l^r`` sum over ``j >= -k`` of :func:`xblock_norm`."""
    _check_pq(p, q, r)
    rep = _xsum(_Bands(traj.grid, spectrum(traj, window), s, mass), k, b, p, q, r, window)
    return rep if report else rep.value


def _xdot(bands, b, r, window):
    js, lumped = bands.indices()
    table = {j: 2.0 ** (j * b) * _norm(bands.grid, bands.band(j), 2, 2) for j in js}
    return NormReport(_lr(list(table.values()), r), table, bands.meta(lumped, window))


def xdot_norm(traj, s, b, r, mass=1.0, window=False, report=False):
    """``l^r`` over all resolved ``j`` of ``2^(jb) ||Q_j f||_{L^2}``."""
    _check_pq(r)
    rep = _xdot(_Bands(traj.grid, spectrum(traj, window), s, mass), b, r, window)
    return rep if report else rep.value


def _sk(bands, k, levels, window):
    g = bands.grid
    linf = _norm(g, bands.cube, np.inf, 2)
    xd = _xdot(bands, 0.5, np.inf, window).value
    js = [j for j in range(max(-k, bands.lo), min(k, bands.hi) + 1)] + [np.inf]
    levels = range(k + 1) if levels is None else levels
    table = {}
    best = 0.0
    for j in js:
        c = bands.le(j)
        for l in levels:
            v = cap_pieces_norms(c, g, l, [(8 / 3, 8), (8, 8 / 3)])
            a = float(np.sqrt(np.sum(v[0] ** 2)))
            bb = float(np.sqrt(np.sum(v[1] ** 2)))
            val = 2.0 ** (-0.75 * k) * a + 2.0 ** (-0.25 * k) * bb
            table[(j, l)] = val
            best = max(best, val)
    table["LinfL2"] = linf
    table["Xdot"] = xd
    meta = bands.meta(False, window)
    meta["j_sup_range"] = [js[0], js[-2] if len(js) > 1 else None]
    return NormReport(linf + xd + best, table, meta)


def sk_norm(traj, k, s, mass=1.0, window=False, levels=None, report=False):
    """``S_k`` norm: energy, ``Xdot^{1/2, inf}`` and cap-localized Strichartz parts.

    The Strichartz part is the supremum over ``j`` in ``[-k, k]`` (resolved
    bands only) and ``j = inf`` and over cap levels ``0 <= l <= k`` of
    ``2^(-3k/4) ||Q_{<=j} f||_{L^{8/3} L^8 [k; l]} + 2^(-k/4) ||Q_{<=j} f||_{L^8 L^{8/3} [k; l]}``.

    Parameters
    ----------
    levels : iterable of int, optional
        Restrict the cap levels (all of ``0..k`` by default).
    report : bool
        Return the :class:`NormReport` instead of the value.
    """
    if k < 1:
        raise ValueError("S_k needs k >= 1; use slow_norm for the low part")
    if k > lp_max_index(traj.grid.spatial):
        raise ValueError(f"shell k={k} beyond the lattice range")
    rep = _sk(_Bands(traj.grid, spectrum(traj, window), s, mass), k, levels, window)
    return rep if report else rep.value


def _slow(bands, window):
    g = bands.grid
    linf = _norm(g, bands.cube, np.inf, 2)
    stz = _norm(g, bands.cube, 8 / 3, 8)
    xd = _xdot(bands, 0.5, np.inf, window).value
    js, lumped = bands.indices(jmin=0)
    hm = sum(2.0 ** (j / 2) * _norm(g, bands.band(j), 4 / 3, 4) for j in js)
    table = {"LinfL2": linf, "L83L8": stz, "Xdot": xd, "high_mod": hm}
    return NormReport(linf + stz + xd + hm, table, bands.meta(lumped, window))


def slow_norm(traj, s, mass=1.0, window=False, report=False):
    """Low-frequency norm: ``L^inf L^2 + L^{8/3} L^8 + Xdot^{1/2, inf}`` plus
    ``sum_{j >= 0} 2^(j/2) ||Q_j f||_{L^{4/3} L^4}``.  No projection is applied."""
    rep = _slow(_Bands(traj.grid, spectrum(traj, window), s, mass), window)
    return rep if report else rep.value


def _z_extra(bands, k, r0, window):
    return 2.0 ** (-r0 * k) * _xsum(bands, k, 0.5, 4 / 3, 4, 1, window).value


def zk_norm(traj, k, s, mass=1.0, r0=R0_DEFAULT, window=False, levels=None):
    """``Z_k = S_k + 2^(-r0 k) X^{1/2, 1}_{k, 4/3, 4}``."""
    bands = _Bands(traj.grid, spectrum(traj, window), s, mass)
    if k < 1:
        raise ValueError("Z_k needs k >= 1; use aggregate_norm for the low part")
    return _sk(bands, k, levels, window).value + _z_extra(bands, k, r0, window)


def aggregate_norm(traj, sigma=SIGMA_DEFAULT, family="S", s=1, mass=1.0, r0=R0_DEFAULT,
                   window=False, report=False, levels=None):
    """``||P_{<=0} f|| + (sum_{k >= 1} 2^(2 sigma k) ||P_k f||^2)^(1/2)`` in the S or Z scale.

    The low part uses the low-frequency norm; in the Z scale it also gets
    the ``X^{1/2, 1}_{0, 4/3, 4}`` term.
    """
    if family not in ("S", "Z"):
        raise ValueError("family must be 'S' or 'Z'")
    g = traj.grid
    cube = spectrum(traj, window)
    ax = g.spatial.abs_xi
    low = cube * _spatial(lp_le_symbol(0, ax), cube)
    table = {}
    lb = _Bands(g, low, s, mass)
    lowv = _slow(lb, window).value if np.any(low) else 0.0
    if family == "Z" and np.any(low):
        lowv += _z_extra(lb, 0, r0, window)
    table[0] = lowv
    acc = 0.0
    for k in range(1, lp_max_index(g.spatial) + 1):
        ck = cube * _spatial(lp_symbol(k, ax), cube)
        if not np.any(np.abs(ck) > 0):
            continue
        b = _Bands(g, ck, s, mass)
        v = _sk(b, k, levels, window).value
        if family == "Z":
            v += _z_extra(b, k, r0, window)
        table[k] = v
        acc += 2.0 ** (2 * sigma * k) * v * v
    rep = NormReport(lowv + np.sqrt(acc), table,
                     {"window": bool(window), "family": family, "sigma": sigma,
                      "low_part": "S_low + X term" if family == "Z" else "S_low"})
    return rep if report else rep.value


def from_spectrum(grid, cube):
    return Trajectory.from_spectrum(grid, cube)
