"""Sampled ratios for the dyadic trilinear estimates.

For dyadic pieces ``phi = P_k phi`` and ``psi_i = P_ki Pi_si psi_i`` the
left side ``|int phi <psi_1, beta psi_2> dx dt|`` is a direct space-time
sum, and the right side combines the ``S``, ``Z`` and ``X`` norms from
:mod:`dkg2d.norms` with the matching bound table from :mod:`.gbound`.
Pieces are random Gaussian spectra on their exact support, so the ratios
bound the best constants from below only; nothing here searches for
extremizers.

Four estimates are available:

``cunn2-S``  ``G 2^(k/2) 2^(r(-k+k1+k2)) |phi|_S |psi1|_Z |psi2|_Z``
``cunn2-Z``  ``G 2^(k/2) 2^(r(k-k1+k2)) |phi|_Z |psi1|_S |psi2|_Z``
``cunn22``   ``G1 2^(k(1/2-r+r0)) 2^(r(k1+k2)) |Q phi|_X |psi1|_S |psi2|_S``
``cunn222``  ``G2 2^(k1(r0-r)) 2^((r+1/2)k+r k2) |phi|_S |Q psi1|_X |psi2|_S``

where ``Q = Q_{>=-k}`` (on ``phi``) or ``Q_{>=-k1}`` (on ``psi1``) and
``X = X^{1/2, inf}_{., 4, 4/3}``.
"""
import itertools
import time

import numpy as np

from ..algebra import apply_projector
from ..decompositions import lp_symbol, modulation_le_symbol, rho0, spectrum
from ..fields import Trajectory
from ..grid import SpaceTimeGrid, SpatialGrid
from ..norms import R0_DEFAULT, R_DEFAULT, _Bands, _sk, _xsum, _z_extra
from ..report import LemmaReport, loglog_slope
from .gbound import family_value

ESTIMATES = ("cunn2-S", "cunn2-Z", "cunn22", "cunn222")
_FAMILY = {"cunn2-S": "cunn2", "cunn2-Z": "cunn2", "cunn22": "cunn22", "cunn222": "cunn222"}
ANOMALY_RHS = 1e-14
# left sides below this (relative to the product of L^2 norms) count as zero
ZERO_LHS = 1e-12


def default_grid():
    """``32^2 x 64`` lattice resolving shells ``k <= 5`` and their modulations."""
    return SpaceTimeGrid(SpatialGrid(32, np.pi / 2), 64, np.pi / 96)


def oracle_grid():
    """Tiny ``8^2 x 16`` lattice for the direct frequency-sum cross-check."""
    return SpaceTimeGrid(SpatialGrid(8, np.pi), 16, np.pi / 16)


def random_piece(grid, k, s, mass, rng, spinor, floor=None):
    """Gaussian space-time spectrum of a dyadic piece.

    The support is ``P_k`` in space and ``Q^s_{<=k}`` in modulation; spinor
    pieces are projected by ``Pi_s``.  With ``floor`` the modulation is
    further restricted to ``Q_{>=floor}``.
    """
    sp = grid.spatial
    shape = (grid.nt, 2) + sp.shape if spinor else (grid.nt,) + sp.shape
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    sym = lp_symbol(k, sp.abs_xi)[None] * modulation_le_symbol(grid, k, s, mass)
    if floor is not None:
        sym = sym * (1.0 - rho0(grid.modulation(s, mass) * 2.0 ** -floor))
    if spinor:
        c = apply_projector(c * sym[:, None], sp, mass, s)
    else:
        c = c * sym
    return c


def fast_integral(grid, phi, psi1, psi2):
    """``int phi <psi1, beta psi2> dx dt`` as a Riemann sum of physical samples."""
    dens = np.conj(psi1[:, 0]) * psi2[:, 0] - np.conj(psi1[:, 1]) * psi2[:, 1]
    return complex(np.sum(phi * dens) * grid.dt * grid.spatial.dx ** 2)


def direct_frequency_integral(grid, phi_hat, psi1_hat, psi2_hat):
    """The same integral as a sum over frequency pairs.

    With spectra ``fhat = dt dx^2 DFT(f)`` on a lattice of period ``T`` and
    side ``L``::

        I = (T L^2)^-2 sum_{z1, z2} phihat(z1 - z2) conj(psi1hat(z1)) . beta psi2hat(z2)

    Quadratic in the lattice size; meant for tiny grids.
    """
    nt, n = grid.nt, grid.n
    it, ix, iy = np.meshgrid(np.arange(nt), np.arange(n), np.arange(n), indexing="ij")
    it, ix, iy = it.ravel(), ix.ravel(), iy.ravel()
    a0, a1 = np.conj(psi1_hat[:, 0].ravel()), np.conj(psi1_hat[:, 1].ravel())
    b0, b1 = psi2_hat[:, 0].ravel(), psi2_hat[:, 1].ravel()
    total = 0j
    for z1 in range(it.size):
        ph = phi_hat[(it[z1] - it) % nt, (ix[z1] - ix) % n, (iy[z1] - iy) % n]
        total += np.sum(ph * (a0[z1] * b0 - a1[z1] * b1))
    return complex(total / (grid.period * grid.spatial.length ** 2) ** 2)


def oracle_check(seed=0, M=1.0, m=1.0):
    """Relative gap between the fast and direct integrals on :func:`oracle_grid`."""
    g = oracle_grid()
    rng = np.random.default_rng(seed)
    ph = random_piece(g, 1, 1, m, rng, False)
    a = random_piece(g, 1, 1, M, rng, True)
    b = random_piece(g, 2, -1, M, rng, True)
    inv = lambda c: Trajectory.from_spectrum(g, c).data
    fast = fast_integral(g, inv(ph), inv(a), inv(b))
    direct = direct_frequency_integral(g, ph, a, b)
    if direct == 0:
        raise RuntimeError("oracle pieces vanished; the tiny grid misses the shells")
    return abs(fast - direct) / max(abs(direct), 1e-300), fast, direct


class PiecePool:
    """Random pieces with their norms, cached per ``(role, k, sign)``.

    ``role`` is ``'phi'``, ``'psi1'`` or ``'psi2'``; each role has its own
    random stream so pieces of different roles are independent.
    """

    def __init__(self, grid=None, size=4, seed=0, M=1.0, m=1.0, r0=R0_DEFAULT):
        self.grid = default_grid() if grid is None else grid
        self.size, self.seed, self.M, self.m, self.r0 = size, seed, M, m, r0
        self._cache = {}

    def _draw(self, role, k, s, restricted):
        key = (role, k, s, restricted)
        if key in self._cache:
            return self._cache[key]
        ss = np.random.SeedSequence([self.seed, ("phi", "psi1", "psi2").index(role),
                                     k, (s + 1) // 2, int(restricted)])
        rng = np.random.default_rng(ss)
        spinor = role != "phi"
        mass = self.M if spinor else self.m
        out = []
        for _ in range(self.size):
            c = random_piece(self.grid, k, s, mass, rng, spinor,
                             floor=-k if restricted else None)
            tr = Trajectory.from_spectrum(self.grid, c)
            bands = _Bands(self.grid, spectrum(tr), s, mass)
            S = _sk(bands, k, None, False).value
            nm = {"S": S, "Z": S + _z_extra(bands, k, self.r0, False)}
            if restricted:
                nm["X"] = _xsum(bands, k, 0.5, 4, 4 / 3, np.inf, False).value
            out.append((tr.data, nm))
        self._cache[key] = out
        return out

    def get(self, role, k, s, restricted=False):
        return self._draw(role, k, s, restricted)


def _rhs(estimate, k, k1, k2, nphi, n1, n2, r, r0):
    G = float(family_value(_FAMILY[estimate], k, k1, k2, r, r0))
    if estimate == "cunn2-S":
        return G * 2.0 ** (k / 2 + r * (-k + k1 + k2)) * nphi["S"] * n1["Z"] * n2["Z"]
    if estimate == "cunn2-Z":
        return G * 2.0 ** (k / 2 + r * (k - k1 + k2)) * nphi["Z"] * n1["S"] * n2["Z"]
    if estimate == "cunn22":
        return G * 2.0 ** (k * (0.5 - r + r0) + r * (k1 + k2)) * nphi["X"] * n1["S"] * n2["S"]
    return G * 2.0 ** (k1 * (r0 - r) + (r + 0.5) * k + r * k2) * nphi["S"] * n1["X"] * n2["S"]


def trilinear_ratio_sample(k, k1, k2, s1, s2, estimate="cunn2-S", n_samples=64, grid=None,
                           seed=0, r=R_DEFAULT, r0=R0_DEFAULT, M=1.0, m=1.0, pool=None,
                           pool_size=4, zero=(), oracle=True):
    """LHS / RHS of one dyadic trilinear estimate over random pieces.

    Samples are triples of pieces taken from a :class:`PiecePool`, so with a
    pool of size ``P`` up to ``P^3`` distinct samples reuse ``3P`` norm
    evaluations.

    Parameters
    ----------
    k, k1, k2 : int
        Shells of ``phi``, ``psi1``, ``psi2`` (``>= 1``, resolved on the grid).
    s1, s2 : {+1, -1}
    estimate : str
        One of :data:`ESTIMATES`.
    zero : iterable of str
        Roles replaced by zero (e.g. ``('psi2',)``).
    oracle : bool
        Also cross-check the fast integral against the direct frequency sum
        on the tiny grid.

    Returns
    -------
    LemmaReport
        ``ratios`` holds LHS / RHS per sample; samples whose right side falls
        below ``1e-14`` while the left side is nonzero are listed in
        ``details['anomalies']`` and left out of the ratios.
    """
    t0 = time.perf_counter()
    if estimate not in ESTIMATES:
        raise ValueError(f"unknown estimate {estimate!r}")
    if r <= 0.5:
        raise ValueError("the estimates need r > 1/2")
    for v in (s1, s2):
        if v not in (1, -1):
            raise ValueError("signs must be +1 or -1")
    if pool is None:
        pool = PiecePool(grid, pool_size, seed, M, m, r0)
    g = pool.grid
    top = g.spatial.max_shell
    for kk in (k, k1, k2):
        if not 1 <= kk <= top:
            raise ValueError(f"shell {kk} not representable (1..{top})")
    P = pool.size
    phis = pool.get("phi", k, 1, estimate == "cunn22")
    a = pool.get("psi1", k1, s1, estimate == "cunn222")
    b = pool.get("psi2", k2, s2)
    combos = list(itertools.product(range(P), repeat=3))
    order = np.random.default_rng([seed, k, k1, k2, (s1 + 1) // 2, (s2 + 1) // 2]).permutation(len(combos))
    combos = [combos[i] for i in order[:n_samples]]
    dv = g.dt * g.spatial.dx ** 2
    ratios, lhs, rhs, anomalies = [], [], [], []
    for i0, i1, i2 in combos:
        f, nf = phis[i0]
        u, nu = a[i1]
        v, nv = b[i2]
        f = 0 * f if "phi" in zero else f
        u = 0 * u if "psi1" in zero else u
        v = 0 * v if "psi2" in zero else v
        L = abs(fast_integral(g, f, u, v))
        scale = np.sqrt(np.sum(np.abs(f) ** 2) * np.sum(np.abs(u) ** 2) * np.sum(np.abs(v) ** 2)) * dv
        if L <= ZERO_LHS * scale or scale == 0:
            L = 0.0
        R = _rhs(estimate, k, k1, k2, nf, nu, nv, r, r0)
        lhs.append(L)
        rhs.append(R)
        if R < ANOMALY_RHS:
            if L > 0:
                anomalies.append({"sample": [i0, i1, i2], "lhs": L, "rhs": R})
            else:
                ratios.append(0.0)
            continue
        ratios.append(L / R)
    ratios = np.array(ratios)
    det = {"lhs": lhs, "rhs": rhs, "anomalies": anomalies, "pool_size": P,
           "grid": {"n": g.n, "L": g.spatial.length, "nt": g.nt, "dt": g.dt},
           "sampling": "random pieces; lower bound on the constant only"}
    ok = bool(np.all(np.isfinite(ratios))) and not anomalies
    if oracle:
        gap, _, _ = oracle_check(seed, M, m)
        det["oracle_gap"] = gap
        ok &= gap <= 1e-10
    const = float(ratios.max()) if ratios.size else 0.0
    return LemmaReport("trilinear", {"k": k, "k1": k1, "k2": k2, "s1": s1, "s2": s2,
                                     "estimate": estimate, "r": r, "r0": r0, "M": M, "m": m},
                       seed, len(ratios), ratios, const, ok, det, time.perf_counter() - t0)


def trilinear_sweep(estimate="cunn2-S", ks=(2, 3, 4, 5), signs=None, n_samples=64, seed=0,
                    pool_size=4, r=R_DEFAULT, r0=R0_DEFAULT, grid=None, tol=0.1):
    """Max ratio over all shell triples and sign pairs, grouped by ``max(k)``.

    Passes when every ratio is finite, no anomaly occurred, the fast
    integral matches the direct oracle and the fitted slope of
    ``log2(max ratio)`` against ``max(k)`` is at most ``tol``.
    """
    t0 = time.perf_counter()
    signs = list(itertools.product((1, -1), repeat=2)) if signs is None else list(signs)
    pool = PiecePool(grid, pool_size, seed, r0=r0)
    ks = sorted(ks)
    per_max = {K: 0.0 for K in ks}
    table, anomalies = [], 0
    ok = True
    for k, k1, k2 in itertools.product(ks, repeat=3):
        for s1, s2 in signs:
            rep = trilinear_ratio_sample(k, k1, k2, s1, s2, estimate, n_samples, seed=seed,
                                         r=r, r0=r0, pool=pool, oracle=False)
            K = max(k, k1, k2)
            per_max[K] = max(per_max[K], rep.constant)
            anomalies += len(rep.details["anomalies"])
            ok &= rep.passed
            table.append({"k": [k, k1, k2], "s": [s1, s2], "max_ratio": rep.constant})
    gap, _, _ = oracle_check(seed)
    maxes = np.array([per_max[K] for K in ks])
    slope = loglog_slope(2.0 ** np.array(ks, float), maxes) if np.all(maxes > 0) else float("nan")
    ok &= bool(np.isfinite(slope) and slope <= tol and gap <= 1e-10)
    det = {"max_ratio_by_maxk": {str(K): per_max[K] for K in ks}, "slope": slope,
           "oracle_gap": gap, "anomalies": anomalies, "table": table,
           "sampling": "random pieces; lower bound on the constant only"}
    return LemmaReport("trilinear-sweep", {"estimate": estimate, "ks": ks, "signs": signs,
                                           "n_samples": n_samples, "pool_size": pool_size,
                                           "r": r, "r0": r0},
                       seed, len(table), maxes, float(maxes.max()), bool(ok), det,
                       time.perf_counter() - t0)
