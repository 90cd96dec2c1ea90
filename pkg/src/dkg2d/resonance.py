"""Resonance function, case split and vanishing of trilinear integrals.

For signs ``s1, s2`` the resonance function is

    mu(xi1, xi2) = <xi1 - xi2>_m + s1 <xi1>_M - s2 <xi2>_M.

A product ``phi u1 conj(u2)`` integrates to zero when the three space-time
supports cannot close up, and ``|mu|`` measures how far they are from closing.
The "much smaller" relation ``A << B`` is realized as ``A < 2^-10 B``; on
dyadic exponents ``a < b - 10``.
"""
from dataclasses import dataclass
import enum
import time

import numpy as np
from scipy import optimize

from .algebra import angle
from .decompositions import CapSystem, cap_distance, rho0, rho_tilde
from .fields import MassPair
from .grid import SpaceTimeGrid, SpatialGrid
from .report import LemmaReport

GAP = 10
_SMALL = 2.0 ** -GAP


def prec(a, b):
    """``2^a << 2^b`` for exponents."""
    return a < b - GAP


def succeq(a, b):
    """Complement of :func:`prec`."""
    return not prec(a, b)


def _w(xi, mass):
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(mass * mass + xi[..., 0] ** 2 + xi[..., 1] ** 2)


def resonance_mu(xi1, xi2, s1, s2, masses=MassPair()):
    """``<xi1 - xi2>_m + s1 <xi1>_M - s2 <xi2>_M``."""
    xi1, xi2 = np.asarray(xi1, float), np.asarray(xi2, float)
    return (_w(xi1 - xi2, masses.m) + s1 * _w(xi1, masses.M)
            - s2 * _w(xi2, masses.M))


class CaseTag(enum.Enum):
    CASE1A = "Case1a"
    CASE1B = "Case1b"
    CASE2A = "Case2a"
    CASE2B = "Case2b"

    @property
    def high_modulation(self):
        return self in (CaseTag.CASE1A, CaseTag.CASE1B)


def _case_codes(xi1, xi2, s1, s2, masses):
    """0: 1a, 1: 1b, 2: 2a, 3: 2b (vectorized over samples)."""
    xi1, xi2 = np.asarray(xi1, float), np.asarray(xi2, float)
    shape = np.broadcast_shapes(xi1.shape, xi2.shape)[:-1]
    if (s1, s2) == (1, -1):
        return np.zeros(shape, int)
    if s1 == s2:
        return np.full(shape, 2)
    small = _w(xi1 - xi2, masses.m) < _SMALL * np.minimum(_w(xi1, masses.M), _w(xi2, masses.M))
    return np.where(small, 1, 3)


def classify_case(xi1, xi2, s1, s2, masses=MassPair()):
    """Case tag of a configuration; exact ties in the ``(-,+)`` split go to Case 2b."""
    code = int(_case_codes(xi1, xi2, s1, s2, masses))
    return [CaseTag.CASE1A, CaseTag.CASE1B, CaseTag.CASE2A, CaseTag.CASE2B][code]


@dataclass
class ResonanceSample:
    xi1: np.ndarray
    xi2: np.ndarray
    s1: int
    s2: int
    masses: MassPair
    mu: float
    case: CaseTag

    @classmethod
    def at(cls, xi1, xi2, s1, s2, masses=MassPair()):
        xi1, xi2 = np.asarray(xi1, float), np.asarray(xi2, float)
        return cls(xi1, xi2, s1, s2, masses, float(resonance_mu(xi1, xi2, s1, s2, masses)),
                   classify_case(xi1, xi2, s1, s2, masses))


# lower bounds, with constant 1; weights <.> carry unit mass

BOUNDS = ("high-mod", "mod-angle", "gen-lb", "non-res")


def _rhs(which, xi1, xi2, s1, s2):
    a1, a2, a12 = _w(xi1, 1.0), _w(xi2, 1.0), _w(xi1 - xi2, 1.0)
    if which == "high-mod":
        return np.maximum(a12, np.maximum(a1, a2))
    if which == "non-res":
        return np.maximum(1 / a12, np.maximum(1 / a1, 1 / a2))
    ang = angle(s1 * xi1, s2 * xi2)
    if which == "mod-angle":
        return a1 * a2 / a12 * ang ** 2
    if which == "gen-lb":
        return np.minimum(a1, a2) * ang ** 2
    raise ValueError(f"unknown bound {which!r}")


def _admissible(which, xi1, xi2, s1, s2, masses, radius):
    ok = (np.hypot(*np.moveaxis(xi1, -1, 0)) <= radius) & (np.hypot(*np.moveaxis(xi2, -1, 0)) <= radius)
    codes = _case_codes(xi1, xi2, s1, s2, masses)
    if which == "high-mod":
        ok &= codes <= 1
    elif which == "mod-angle":
        ok &= codes >= 2
    if which in ("mod-angle", "gen-lb"):
        ok &= _rhs(which, xi1, xi2, s1, s2) > 0
    return ok


def _ratio(which, xi1, xi2, s1, s2, masses):
    return np.abs(resonance_mu(xi1, xi2, s1, s2, masses)) / _rhs(which, xi1, xi2, s1, s2)


def _draw(rng, n, radius):
    """Stratified draw: half independent, half with ``xi2`` near ``+-xi1``."""
    lo = 2.0 ** -6

    def vec(k):
        r = lo * (radius / lo) ** rng.random(k)
        r[: k // 16] = 0.0
        th = 2 * np.pi * rng.random(k)
        return np.stack([r * np.cos(th), r * np.sin(th)], -1)

    xi1, xi2 = vec(n), vec(n)
    h = n // 2
    pert = vec(h) * 2.0 ** rng.uniform(-20, 0, h)[:, None] / max(radius, 1.0)
    sgn = np.where(rng.random(h) < 0.5, 1.0, -1.0)[:, None]
    xi2[:h] = sgn * xi1[:h] + pert
    return xi1, xi2


def _refine(which, x, s1, s2, masses, radius, iters=20):
    """Coordinate descent from ``x = (xi1, xi2)`` flattened to 4 numbers."""
    def f(v):
        a, b = v[None, :2], v[None, 2:]
        if not _admissible(which, a, b, s1, s2, masses, radius)[0]:
            return np.inf
        return float(_ratio(which, a, b, s1, s2, masses)[0])

    x = np.array(x, float)
    best = f(x)
    step = 0.1 * max(1.0, np.abs(x).max())
    for _ in range(iters):
        improved = False
        for c in range(4):
            for d in (step, -step):
                y = x.copy()
                y[c] += d
                v = f(y)
                if v < best:
                    x, best, improved = y, v, True
        if not improved:
            step /= 2
    # root polish: if mu changes sign along a coordinate, bracket the zero
    for c in range(4):
        def g(t, c=c, x=x):
            z = x.copy()
            z[c] = t
            return float(resonance_mu(z[:2], z[2:], s1, s2, masses))
        g0 = g(x[c])
        for d in (step, -step, 10 * step, -10 * step):
            gd = g(x[c] + d)
            if g0 * gd < 0:
                t = optimize.brentq(g, x[c], x[c] + d, xtol=1e-15, rtol=1e-15)
                z = x.copy()
                z[c] = t
                v = f(z)
                if v < best:
                    x, best = z, v
                break
    return x, best


def bound_ratio_scan(which, masses=MassPair(), sample_count=1000000, seed=0,
                     radius=2.0 ** 10, negative_control=False, tol=0.1, chunk=250000):
    """Sampled minimum of ``|mu| / RHS`` for one of the resonance lower bounds.

    ``which`` selects the bound: ``'high-mod'`` (RHS the largest weight, Case 1
    configurations), ``'mod-angle'`` (``<xi1><xi2>/<xi1-xi2>`` times the squared
    angle, Case 2), ``'gen-lb'`` (smaller weight times squared angle) or
    ``'non-res'`` (largest inverse weight).  All four sign pairs are sampled.
    The best samples are refined by coordinate descent.  The scan is repeated
    with twice the samples; it passes when the minimum is positive and moves
    by less than ``tol``.

    Extra entries in ``details``: ``min_ratio_n``, ``argmin`` and, for
    ``'non-res'``, ``min_mu_times_max_weight`` (``|mu| max <.>``).
    """
    if which not in BOUNDS:
        raise ValueError(f"unknown bound {which!r}")
    if which == "non-res" and not masses.nonresonant and not negative_control:
        raise ValueError("non-res scan needs 0 < m < 2M (or negative_control=True)")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    signs = [(1, -1), (1, 1), (-1, -1), (-1, 1)]

    def one_pass(n):
        best = (np.inf, None)
        ratios = []
        alt = np.inf
        found = False
        for s1, s2 in signs:
            left = n
            while left > 0:
                k = min(chunk, left)
                left -= k
                a, b = _draw(rng, k, radius)
                ok = _admissible(which, a, b, s1, s2, masses, radius)
                if not ok.any():
                    continue
                a, b = a[ok], b[ok]
                r = _ratio(which, a, b, s1, s2, masses)
                ratios.append(r[rng.permutation(len(r))[:2000]])
                found = True
                order = np.argsort(r)[:3]
                for i in order:
                    x, v = _refine(which, np.r_[a[i], b[i]], s1, s2, masses, radius)
                    if v < best[0]:
                        best = (v, (s1, s2, x))
                if which == "non-res":
                    mu = np.abs(resonance_mu(a, b, s1, s2, masses))
                    mx = np.maximum(_w(a - b, 1.0), np.maximum(_w(a, 1.0), _w(b, 1.0)))
                    alt = min(alt, float((mu * mx).min()))
        if not found:
            raise ValueError(f"no samples satisfy the {which} hypotheses within radius {radius}")
        if best[1] is not None and which == "non-res":
            s1, s2, x = best[1]
            a, b = x[None, :2], x[None, 2:]
            mx = np.maximum(_w(a - b, 1.0), np.maximum(_w(a, 1.0), _w(b, 1.0)))
            alt = min(alt, float(np.abs(resonance_mu(a, b, s1, s2, masses))[0] * mx[0]))
        return best, np.concatenate(ratios), alt

    b1, r1, alt1 = one_pass(sample_count)
    b2, r2, alt2 = one_pass(sample_count)
    m1, m2 = b1[0], min(b1[0], b2[0])
    best = b1 if b1[0] <= b2[0] else b2
    alt = min(alt1, alt2)
    stable = m1 > 0 and abs(m2 - m1) <= tol * m1
    s1, s2, x = best[1]
    min_mu = float(abs(resonance_mu(x[:2], x[2:], s1, s2, masses)))
    details = {"min_ratio_n": m1, "min_ratio_2n": m2, "argmin": {"s1": s1, "s2": s2,
               "xi1": x[:2], "xi2": x[2:]}, "min_abs_mu_at_argmin": min_mu,
               "negative_control": negative_control}
    if which == "non-res":
        details["min_mu_times_max_weight"] = alt
        details["min_mu_times_max_weight_n"] = alt1
    passed = bool(stable and m2 > 1e-6)
    return LemmaReport(which, {"M": masses.M, "m": masses.m, "sample_count": sample_count,
                               "radius": radius}, seed, 2 * sample_count,
                       np.concatenate([r1, r2]), m2, passed, details,
                       time.perf_counter() - t0)


def resonance_ray_root(masses, s1=-1, s2=1):
    """Zero of ``mu`` along ``xi1 = xi2 = (r, 0)`` for resonant masses, or None."""
    f = lambda r: float(resonance_mu([r, 0.0], [r, 0.0], s1, s2, masses))
    rs = np.linspace(0, 1e3, 100001)
    vals = np.array([f(r) for r in rs[:2]])
    if np.sign(vals[0]) == 0:
        return 0.0
    prev = vals[0]
    for a, b in zip(rs[:-1], rs[1:]):
        fb = f(b)
        if np.sign(fb) != np.sign(prev):
            return optimize.brentq(f, a, b, xtol=1e-15)
        prev = fb
    return None


# ---------------------------------------------------------------- vanishing

@dataclass(frozen=True)
class DyadicTuple:
    """Frequency indices ``(k, k1, k2)``, modulations ``(j, j1, j2)`` and signs."""
    k: int
    k1: int
    k2: int
    j: int
    j1: int
    j2: int
    s1: int
    s2: int

    def __post_init__(self):
        if min(self.k, self.k1, self.k2) < 0:
            raise ValueError("frequency indices must be >= 0")
        if self.s1 not in (1, -1) or self.s2 not in (1, -1):
            raise ValueError("signs must be +1 or -1")

    @property
    def ks(self):
        return (self.k, self.k1, self.k2)

    @property
    def js(self):
        return (self.j, self.j1, self.j2)


def _case1(t):
    return (t.s1, t.s2) == (1, -1) or ((t.s1, t.s2) == (-1, 1) and prec(t.k, min(t.k1, t.k2)))


def vanishing_predicate(t, l=None, caps=None, part=None):
    """Do the hypotheses guarantee ``int phi u1 conj(u2) = 0``?

    Without caps the first two criteria are tried: all modulations far below
    the smallest frequency scale, or (Case 1 sign patterns) all modulations
    far below the largest one.  With ``caps = (i1, i2)`` at level ``l`` the
    cap criteria are tried: separated caps with modulations below
    ``k1 + k2 - k - 2l`` (Case 2 sign patterns), or ``k`` far below ``k1 ~ k2``
    with ``l = k1 - k`` and caps far apart.  Cap separation equal to
    ``2^-l`` is treated as failing.

    Parameters
    ----------
    t : DyadicTuple
    l : int, optional
    caps : (int, int), optional
    part : {'i', 'ii', 'iii'}, optional
        Restrict to one criterion.
    """
    if part not in (None, "i", "ii", "iii"):
        raise ValueError(f"unknown part {part!r}")
    has_caps = caps is not None
    if has_caps and l is None:
        raise ValueError("caps need a level l")
    if part == "i" and has_caps:
        raise ValueError("caps do not enter the low-modulation criterion")
    if part == "iii" and not has_caps:
        raise ValueError("the far-caps criterion needs caps")
    J = max(t.js)
    if not has_caps:
        crit_i = prec(J, -min(t.ks))
        crit_ii = _case1(t) and prec(J, max(t.ks))
        if part == "i":
            return crit_i
        if part == "ii":
            return crit_ii
        return crit_i or crit_ii
    i1, i2 = caps
    n = CapSystem(l).count
    if not (0 <= i1 < n and 0 <= i2 < n):
        raise ValueError("cap index out of range")
    crit_ii = (l >= 1 and not _case1(t)
               and cap_distance(l, i1, t.s1, i2, t.s2) > 2.0 ** -l
               and prec(J, t.k1 + t.k2 - t.k - 2 * l))
    d = cap_distance(l, i1, 1, i2, 1)
    crit_iii = (prec(t.k, min(t.k1, t.k2)) and abs(t.k1 - t.k2) <= 10
                and l == t.k1 - t.k and d > 0 and prec(-l, np.log2(d)))
    if part == "ii":
        return crit_ii
    if part == "iii":
        return crit_iii
    return crit_ii or crit_iii


def _radial_support(k):
    """Open radial support of ``P~_k``."""
    return (0.0, 2.0 ** (k + 1) * 2) if k <= 1 else (2.0 ** (k - 2), 2.0 ** (k + 2))


def _spatial_weight(k, xi, l=None, cap=None, sign=1):
    r = np.hypot(xi[..., 0], xi[..., 1])
    w = rho0(r * 2.0 ** -(k + 1)) if k <= 1 else rho_tilde(k, r)
    if cap is not None:
        caps = CapSystem(l)
        th = np.arctan2(xi[..., 1], xi[..., 0])
        wc = sum(caps.window((cap + d) % caps.count, th, r == 0) for d in (-1, 0, 1)) \
            if caps.count > 2 else np.ones_like(r)
        w = w * wc
    return w


def tuple_lattice(t, l=None, points_per_band=8):
    """A lattice suited to a tuple.

    ``d_xi = 2^(min k - 3)`` resolves the smallest shell and
    ``d_tau = 2^(min j - 2) / points_per_band`` resolves the narrowest band.
    The returned grid has Nyquist limits covering all supports; it is used
    as an unbounded lattice, so its arrays are never materialized.
    """
    dxi = 2.0 ** (min(t.ks) - 3)
    if l is not None:
        dxi = min(dxi, 2.0 ** (t.k1 - l - 3))
    dtau = 2.0 ** (min(t.js) - 2) / points_per_band
    kmax = max(t.ks)
    n = 2 * int(np.ceil(2.0 ** (kmax + 2) / dxi)) + 2
    taumax = 2.0 ** (kmax + 2) * 1.5 + 2.0 ** (max(t.js) + 2) + 2
    nt = 2 * int(np.ceil(taumax / dtau)) + 2
    return SpaceTimeGrid(SpatialGrid(n, 2 * np.pi / dxi), nt, 2 * np.pi / (nt * dtau))


def _check_lattice(t, grid):
    sp = grid.spatial
    if grid.dtau > 2.0 ** (min(t.js) - 2) / 2:
        raise ValueError("tau spacing does not resolve the narrowest modulation band")
    if sp.nyquist < 2.0 ** (max(t.ks) + 2):
        raise ValueError("spatial lattice does not cover the largest shell")
    taumax = 2.0 ** (max(t.ks) + 2) * 1.5 + 2.0 ** (max(t.js) + 2)
    if grid.tau_nyquist < taumax:
        raise ValueError("tau lattice does not cover the modulated supports")


def _shell_points(k, dxi, l=None, cap=None):
    lo, hi = _radial_support(k)
    R = int(np.ceil(hi / dxi))
    a = np.arange(-R, R + 1)
    A, B = np.meshgrid(a, a, indexing="ij")
    pts = np.stack([A.ravel(), B.ravel()], -1)
    w = _spatial_weight(k, pts * dxi, l, cap)
    keep = w > 0
    return pts[keep], w[keep]


def _patch_points(k, dxi, rng, radius, l=None, cap=None, tries=200, center=None):
    """Lattice points of the support within ``radius`` (sup norm) of a center.

    The center is random in the support unless given.  Returns the points,
    their weights and the center.
    """
    lo, hi = _radial_support(k)
    if cap is not None:
        caps = CapSystem(l)
        half = min(np.pi, 2 * caps.spacing) if caps.count > 2 else np.pi
        th0 = caps.centers[cap]
    else:
        half, th0 = np.pi, 0.0
    off = np.arange(-radius, radius + 1)
    A, B = np.meshgrid(off, off, indexing="ij")
    grid = np.stack([A.ravel(), B.ravel()], -1)
    if center is not None:
        pts = np.asarray(center, np.int64) + grid
        w = _spatial_weight(k, pts * dxi, l, cap)
        return pts[w > 0], w[w > 0], center
    for _ in range(tries):
        r = lo + (hi - lo) * rng.random()
        th = th0 + half * (2 * rng.random() - 1)
        c = np.rint(np.array([r * np.cos(th), r * np.sin(th)]) / dxi).astype(np.int64)
        pts = c + grid
        w = _spatial_weight(k, pts * dxi, l, cap)
        if np.any(w > 0):
            return pts[w > 0], w[w > 0], c
    raise ValueError(f"could not place a patch in the support of shell {k}")


def _support_count(k, dxi):
    return (2 * _radial_support(k)[1] / dxi) ** 2


def _window(xi, dxi, sign, mass, j, dtau):
    """Integer tau index range covering ``|tau + sign <xi>| < 2^(j+2)``."""
    c = -sign * _w(xi * dxi, mass)
    R = 2.0 ** (j + 2)
    lo = np.floor((c - R) / dtau).astype(np.int64) + 1
    hi = np.ceil((c + R) / dtau).astype(np.int64) - 1
    return lo, hi, c


def _coeffs(rng, xi, dxi, sign, mass, j, dtau, spatial_w, width):
    lo, hi, c = _window(xi, dxi, sign, mass, j, dtau)
    idx = lo[:, None] + np.arange(width)[None, :]
    y = idx * dtau - c[:, None]
    w = rho_tilde(j, y) * (idx <= hi[:, None])
    z = rng.standard_normal(idx.shape) + 1j * rng.standard_normal(idx.shape)
    return lo, z * w * spatial_w[:, None]


def _corr_sums(u1, u2, ph, off):
    """``sum_{a, b} u1[a] conj(u2[b]) ph[b - a - off]`` for each row."""
    W1, W2, Wp = u1.shape[1], u2.shape[1], ph.shape[1]
    P = 1 << int(np.ceil(np.log2(W1 + W2)))
    # r[d + W1 - 1] = sum_a u1[a] conj(u2[a + d])
    r = np.fft.ifft(np.fft.fft(u1[:, ::-1], P) * np.fft.fft(u2.conj(), P))
    q = off[:, None] + np.arange(Wp)[None, :] + W1 - 1
    ok = (q >= 0) & (q <= W1 + W2 - 2)
    vals = np.take_along_axis(r, np.clip(q, 0, P - 1), axis=1) * ok
    return np.sum(vals * ph, axis=1)


@dataclass
class VanishingResult:
    residual: float
    control: float
    survivors: int
    control_survivors: int
    flag: str = ""


def _triple_integral(t, grid, rng, l, caps, patches, patch_radius, masses,
                     phi_patch=None, max_full=40000):
    sp = grid.spatial
    dxi, dtau = sp.dxi, grid.dtau
    cap1, cap2 = caps if caps is not None else (None, None)
    W = lambda j: int(np.ceil(2.0 ** (j + 3) / dtau)) + 2
    full_phi = phi_patch is None and _support_count(t.k, dxi) <= max_full
    if full_phi:
        pts_phi, wphi = _shell_points(t.k, dxi)
        if len(pts_phi) == 0:
            raise ValueError("phi support is empty on this lattice")
        phi_lo, phi = _coeffs(rng, pts_phi, dxi, 1, masses.m, t.j, dtau, wphi, W(t.j))
    total = 0.0 + 0.0j
    nphi = n1 = n2 = 0.0
    survivors = 0
    rphi = patch_radius if phi_patch is None else phi_patch
    for _ in range(patches):
        # place u1 and u2 patches so that phi can connect them when possible
        for _ in range(200):
            p1, w1, c1 = _patch_points(t.k1, dxi, rng, patch_radius, l, cap1)
            _, _, cp = _patch_points(t.k, dxi, rng, 0)
            own, _, c2 = _patch_points(t.k2, dxi, rng, patch_radius, l, cap2, center=c1 + cp)
            if len(own):
                break
        if not len(own):
            own, _, c2 = _patch_points(t.k2, dxi, rng, patch_radius, l, cap2)
        if not full_phi:
            pts_phi, wphi, _ = _patch_points(t.k, dxi, rng, rphi, center=c2 - c1)
        if not full_phi:
            if not len(pts_phi):
                pts_phi, wphi, _ = _patch_points(t.k, dxi, rng, rphi)
            phi_lo, phi = _coeffs(rng, pts_phi, dxi, 1, masses.m, t.j, dtau, wphi, W(t.j))
            nphi += np.sum(np.abs(phi) ** 2)
        u1_lo, u1 = _coeffs(rng, p1, dxi, t.s1, masses.M, t.j1, dtau, w1, W(t.j1))
        n1 += np.sum(np.abs(u1) ** 2)
        # candidate xi2 = xi1 + xi_phi
        I1 = np.repeat(np.arange(len(p1)), len(pts_phi))
        IP = np.tile(np.arange(len(pts_phi)), len(p1))
        x2 = p1[I1] + pts_phi[IP]
        w2 = _spatial_weight(t.k2, x2 * dxi, l, cap2)
        keep = w2 > 0
        I1, IP, x2 = I1[keep], IP[keep], x2[keep]
        # u2 lives on everything reachable plus a patch of its own support
        u2pts, inv = np.unique(np.concatenate([x2, own]), axis=0, return_inverse=True)
        inv = inv.ravel()[:len(x2)]
        w2u = _spatial_weight(t.k2, u2pts * dxi, l, cap2)
        u2_lo, u2 = _coeffs(rng, u2pts, dxi, t.s2, masses.M, t.j2, dtau, w2u, W(t.j2))
        n2 += np.sum(np.abs(u2) ** 2)
        # exact interval test on tau indices: tau_phi = tau2 - tau1
        a1, b1 = u1_lo[I1], u1_lo[I1] + u1.shape[1] - 1
        a2, b2 = u2_lo[inv], u2_lo[inv] + u2.shape[1] - 1
        ap, bp = phi_lo[IP], phi_lo[IP] + phi.shape[1] - 1
        live = np.maximum(a2 - b1, ap) <= np.minimum(b2 - a1, bp)
        live &= (np.any(u1 != 0, axis=1)[I1] & np.any(u2 != 0, axis=1)[inv]
                 & np.any(phi != 0, axis=1)[IP])
        idx = np.nonzero(live)[0]
        survivors += len(idx)
        for s in range(0, len(idx), 4096):
            sel = idx[s:s + 4096]
            off = phi_lo[IP[sel]] - (u2_lo[inv[sel]] - u1_lo[I1[sel]])
            total += np.sum(_corr_sums(u1[I1[sel]], u2[inv[sel]], phi[IP[sel]], off))
    if full_phi:
        nphi = np.sum(np.abs(phi) ** 2)
    denom = np.sqrt(nphi * n1 * n2)
    if denom == 0:
        return 0.0, survivors, "zero-field"
    return float(abs(total) / denom), survivors, ""


def vanishing_integral_test(t, grid=None, seed=0, l=None, caps=None, masses=MassPair(),
                            control=None, patches=6, patch_radius=3):
    """Evaluate ``int phi u1 conj(u2)`` as a discrete triple-frequency sum.

    ``phi``, ``u1`` and ``u2`` are random coefficient arrays on the unbounded
    lattice of ``grid`` (see :func:`tuple_lattice`), each supported exactly in
    its enlarged shell, enlarged modulation band and (optionally) enlarged
    cap.  ``u1`` is localized to small random patches of its support and
    ``u2`` is generated on every point reachable from a patch, so each patch
    is a valid member of the function class.  Space-time frequencies must
    satisfy ``zeta_phi = zeta2 - zeta1``.

    Returns
    -------
    VanishingResult
        ``residual = |integral| / (|phi| |u1| |u2|)`` and the same quantity
        for the ``control`` tuple (default: all modulations raised above the
        largest frequency scale, so the supports meet).
    """
    rng = np.random.default_rng(seed)
    g = tuple_lattice(t, l) if grid is None else grid
    _check_lattice(t, g)
    res, surv, flag = _triple_integral(t, g, rng, l, caps, patches, patch_radius, masses)
    ccaps = caps
    if control is None:
        jc = max(t.ks) + 3
        control = DyadicTuple(t.k, t.k1, t.k2, jc, jc, jc, t.s1, t.s2)
        if caps is not None and vanishing_predicate(t, l, caps, part="iii"):
            ccaps = (caps[0], caps[0])
    cg = tuple_lattice(control, l, points_per_band=2)
    ctrl, csurv, _ = _triple_integral(control, cg, np.random.default_rng(seed + 1), l,
                                      ccaps, 1, 0, masses, phi_patch=2)
    return VanishingResult(res, ctrl, surv, csurv, flag)


def vanishing_regression_set(count=50, seed=0):
    """Random configurations for which :func:`vanishing_predicate` holds.

    Each criterion gets a quarter of the entries: low modulations
    (criterion i), Case 1 signs below the top frequency (ii without caps),
    separated caps with Case 2 signs (ii with caps) and a low-frequency
    ``phi`` against far-apart caps (iii).

    Returns
    -------
    list of (DyadicTuple, l, caps)
    """
    rng = np.random.default_rng(seed)
    out = []
    kinds = ["i", "ii", "ii-caps", "iii"]
    while len(out) < count:
        kind = kinds[len(out) % 4]
        l = caps = None
        if kind == "i":
            k = int(rng.integers(2, 5))
            ks = (k, k + int(rng.integers(0, 2)), k)
            j = -min(ks) - 11 - int(rng.integers(0, 3))
            s1, s2 = (int(v) for v in rng.choice([1, -1], 2))
            t = DyadicTuple(*ks, j, j - int(rng.integers(0, 2)), j, s1, s2)
        elif kind == "ii":
            k = int(rng.integers(3, 6))
            j = k - 11 - int(rng.integers(0, 3))
            t = DyadicTuple(k, k, k, j, j, j - int(rng.integers(0, 2)), 1, -1)
        elif kind == "ii-caps":
            k = int(rng.integers(4, 6))
            l = int(rng.integers(1, 4))
            s1, s2 = [(1, 1), (-1, -1), (-1, 1)][int(rng.integers(0, 3))]
            j = k - 2 * l - 11 - int(rng.integers(0, 2))
            t = DyadicTuple(k, k, k, j, j, j, s1, s2)
            n = CapSystem(l).count
            i1 = int(rng.integers(0, n))
            i2 = (i1 + n // 4 + int(rng.integers(0, n // 2))) % n
            caps = (i1, i2)
        else:
            k = int(rng.integers(0, 2))
            k1 = k + 11
            l = k1 - k
            n = CapSystem(l).count
            i1 = int(rng.integers(0, n))
            i2 = (i1 + n // 4 + int(rng.integers(0, n // 2))) % n
            j = int(rng.integers(-1, 4))
            s1, s2 = (int(v) for v in rng.choice([1, -1], 2))
            t = DyadicTuple(k, k1, k1, j, j, j, s1, s2)
            caps = (i1, i2)
        if vanishing_predicate(t, l, caps):
            out.append((t, l, caps))
    return out


def vanishing_suite(count=50, controls=10, seed=0, residual_tol=1e-10, control_floor=1e-3):
    """Run :func:`vanishing_integral_test` on :func:`vanishing_regression_set`.

    The first ``controls`` entries also supply their raised-modulation
    controls.  Passes when every residual is at most ``residual_tol`` and
    every control is at least ``control_floor``.
    """
    t0 = time.perf_counter()
    cases = vanishing_regression_set(count, seed)
    res, ctrl, rows = [], [], []
    for i, (t, l, caps) in enumerate(cases):
        r = vanishing_integral_test(t, None, seed, l, caps)
        res.append(r.residual)
        if i < controls:
            ctrl.append(r.control)
        rows.append({"tuple": [*t.ks, *t.js, t.s1, t.s2], "l": l,
                     "caps": list(caps) if caps else None,
                     "residual": r.residual, "control": r.control})
    res, ctrl = np.array(res), np.array(ctrl)
    ok = bool(np.all(res <= residual_tol) and np.all(ctrl >= control_floor))
    return LemmaReport("vanishing", {"count": count, "controls": controls}, seed, len(res),
                       res, float(res.max()), ok,
                       {"cases": rows, "control_min": float(ctrl.min()) if ctrl.size else None},
                       time.perf_counter() - t0)
