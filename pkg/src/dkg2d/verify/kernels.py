"""Kernels of the localized multipliers ``P_kappa Q_j P_k`` and their Duhamel inverses.

The symbol ``a(tau, xi) = rho_j(tau + s<xi>) eta_kappa(xi) rho_k(|xi|)`` (divided
by ``tau + s<xi>`` for the inverse variant) is sampled in coordinates rotated
towards the cap direction,

    tau~ = (tau + s xi_par) / sqrt(2),   xi~_1 = (xi_par - s tau) / sqrt(2),   xi_2 = xi_perp,

where its support is close to a box of size ``2^j x 2^k x 2^(k-l)``.  The
rotation is orthogonal, so the ``L^1`` norm of the kernel is unchanged, and on
a lattice with ``N`` points per axis the Riemann sum of ``|K|`` is exactly
``sum |ifftn(a)|``.
"""
import time
from math import comb

import numpy as np
import scipy.fft as sfft

from ..decompositions import CapSystem, lp_symbol, rho0, rho_k
from ..grid import SpaceTimeGrid, SpatialGrid
from ..report import LemmaReport

PLAIN = "plain"
INVERSE = "inverse"
_R2 = np.sqrt(2.0)


class ResolutionError(ValueError):
    """The sampling box does not resolve the symbol or its kernel."""


def _check_kj(k, j):
    if k < 1:
        raise ValueError("k must be >= 1")
    if j > k:
        raise ValueError(f"need j <= k, got j={j}, k={k}")
    if (k - j) % 2:
        raise ValueError("k - j must be even so that 2l = k - j")
    return (k - j) // 2


def scales(k, j):
    """Support scales ``(2^j, 2^k, 2^(k-l))`` along ``(tau~, xi~_1, xi_2)``."""
    l = _check_kj(k, j)
    return np.array([2.0 ** j, 2.0 ** k, 2.0 ** (k - l)])


def _original(tt, x1, x2, s):
    """Map rotated coordinates back to ``(tau, xi_par, xi_perp)``."""
    tau = (tt - s * x1) / _R2
    xpar = (s * tt + x1) / _R2
    return tau, xpar, x2


def symbol(tt, x1, x2, k, j, s=-1, variant=PLAIN, cap_index=0, mass=1.0):
    """The localized symbol at rotated coordinates (cap ``cap_index`` at level ``(k-j)/2``)."""
    l = _check_kj(k, j)
    caps = CapSystem(l)
    tau, xpar, xperp = _original(tt, x1, x2, s)
    r = np.hypot(xpar, xperp)
    theta = caps.centers[cap_index] + np.arctan2(xperp, xpar)
    y = tau + s * np.sqrt(mass * mass + r * r)
    a = rho_k(j, y) * caps.window(cap_index, theta, r == 0) * lp_symbol(k, r)
    if variant == INVERSE:
        a = np.where(a != 0, a / np.where(y != 0, y, 1.0), 0.0)
    elif variant != PLAIN:
        raise ValueError(f"variant must be {PLAIN!r} or {INVERSE!r}")
    return a


def _support_box(k, j, s, mass):
    """Bounding box of the symbol's support in rotated coordinates."""
    l = (k - j) // 2
    half = CapSystem(l).halfwidth
    r = np.linspace(2.0 ** (k - 1), 2.0 ** (k + 1), 65)
    th = np.linspace(-half, half, 65)
    y = np.concatenate([np.linspace(-2.0 ** (j + 1), -2.0 ** (j - 1), 17),
                        np.linspace(2.0 ** (j - 1), 2.0 ** (j + 1), 17)])
    R, TH, Y = np.meshgrid(r, th, y, indexing="ij")
    xpar, xperp = R * np.cos(TH), R * np.sin(TH)
    tau = Y - s * np.sqrt(mass * mass + R * R)
    tt = (tau + s * xpar) / _R2
    x1 = (xpar - s * tau) / _R2
    return np.array([[tt.min(), tt.max()], [x1.min(), x1.max()],
                     [xperp.min(), xperp.max()]])


def _lattice(k, j, s, mass, resolution, pad=1.25):
    sc = scales(k, j)
    d = sc / resolution
    box = _support_box(k, j, s, mass)
    axes = []
    for (lo, hi), dz in zip(box, d):
        width = (hi - lo) * pad + 4 * dz
        n = sfft.next_fast_len(int(np.ceil(width / dz)))
        c = 0.5 * (lo + hi)
        axes.append(c + dz * (np.arange(n) - n // 2))
    return axes, d


def kernel_l1(k, j, cap_index=0, variant=PLAIN, s=-1, resolution=32, mass=1.0,
              tail_limit=0.01, return_details=False):
    """``L^1`` norm of the kernel of ``P_kappa Q_j^s P_k`` or of its Duhamel inverse.

    Parameters
    ----------
    k, j : int
        Frequency and modulation indices, ``j <= k``, ``k - j`` even.
    cap_index : int
        Cap at level ``l = (k - j) / 2``.
    variant : {'plain', 'inverse'}
        ``'inverse'`` divides the symbol by ``tau + s <xi>``.
    resolution : int
        Lattice points per support scale along each rotated axis (>= 4).
    tail_limit : float
        Largest admissible share of ``|K|`` in the outer quarter of the
        periodic kernel box along any axis.

    Notes
    -----
    The transform runs in single precision to keep the largest boxes
    (about ``3e7`` points at ``resolution=48``) within memory.

    Raises
    ------
    ResolutionError
        If the resolution is too coarse, the support touches the box edge
        or the kernel tail exceeds ``tail_limit``.
    """
    if resolution < 4:
        raise ResolutionError("resolution must be at least 4 points per scale")
    (tt, x1, x2), d = _lattice(k, j, s, mass, resolution)
    a = np.empty((tt.size, x1.size, x2.size), np.complex64)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    for i0 in range(0, tt.size, 16):
        sl = slice(i0, min(i0 + 16, tt.size))
        a[sl] = symbol(tt[sl, None, None], X1[None], X2[None], k, j, s, variant, cap_index, mass)
    amax = np.abs(a).max()
    if amax == 0:
        raise ResolutionError("symbol vanishes on the lattice")
    edge = max(np.abs(a[[0, -1]]).max(), np.abs(a[:, [0, -1]]).max(), np.abs(a[:, :, [0, -1]]).max())
    if edge > 1e-12 * amax:
        raise ResolutionError("symbol support reaches the sampling box edge")
    K = np.abs(sfft.ifftn(a, overwrite_x=True))
    del a
    total = float(K.sum(dtype=np.float64))
    inner = np.ones(K.shape, bool)
    for ax, n in enumerate(K.shape):
        m = np.abs(np.fft.fftfreq(n, 1.0 / n)) < 3 * n / 8
        shape = [1, 1, 1]
        shape[ax] = n
        inner = inner & m.reshape(shape)
    tail = float(K[~inner].sum(dtype=np.float64) / total)
    if tail > tail_limit:
        raise ResolutionError(f"kernel tail share {tail:.3g} above {tail_limit}")
    if return_details:
        return total, {"shape": K.shape, "tail": tail, "spacing": d.tolist()}
    return total


def kernel_table(ks=(3, 4, 5, 6), variant=PLAIN, s=-1, resolution=32, mass=1.0, refine=True):
    """``L^1`` norms over ``k`` in ``ks`` and ``j = -k, -k+2, ..., k``.

    With ``refine`` each entry is recomputed at doubled resolution and the
    relative change is recorded.

    Returns
    -------
    list of dict
        Rows with ``k, j, value`` (``value * 2^j`` under ``scaled`` for the
        inverse variant) and ``change`` when refined.
    """
    rows = []
    for k in ks:
        for j in range(-k, k + 1, 2):
            v = kernel_l1(k, j, 0, variant, s, resolution, mass)
            row = {"k": k, "j": j, "value": v}
            if variant == INVERSE:
                row["scaled"] = v * 2.0 ** j
            if refine:
                v2 = kernel_l1(k, j, 0, variant, s, 2 * resolution, mass)
                row["refined"] = v2
                row["change"] = abs(v2 - v) / v2
            rows.append(row)
    return rows


def _fd_weights(order):
    """Central difference weights with offsets ``-order..order`` (second-order accurate)."""
    if order == 0:
        return np.array([0]), np.array([1.0])
    offs = np.arange(-order, order + 1, 2) / 2.0
    w = np.array([(-1) ** (order - i) * comb(order, i) for i in range(order + 1)], dtype=float)
    return offs, w


def symbol_derivative_scan(k, j, cap_index=0, order=1, axis="tau", s=-1, mass=1.0,
                           samples=4000, seed=0, step=0.02):
    """Scaled derivatives ``|d_z^alpha a| 2^j s(z)^alpha`` of the inverse symbol.

    ``axis`` is ``'tau'`` (for ``tau~``), ``'xi1'`` (for ``xi~_1``) or ``'xi2'``.
    Derivatives are central differences with step ``step * s(z)``, taken at
    random points of the support.

    Raises
    ------
    ValueError
        If ``order`` is outside ``0..4`` or ``j > k - 10``.
    FloatingPointError
        If the difference step is lost against the coordinate size.
    """
    if not 0 <= order <= 4:
        raise ValueError("order must be in 0..4")
    if j > k - 10:
        raise ValueError("the scan needs j <= k - 10")
    ax = {"tau": 0, "xi1": 1, "xi2": 2}[axis]
    t0 = time.perf_counter()
    sc = scales(k, j)
    box = _support_box(k, j, s, mass)
    rng = np.random.default_rng(seed)
    pts = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((samples, 3))
    a0 = symbol(pts[:, 0], pts[:, 1], pts[:, 2], k, j, s, INVERSE, cap_index, mass)
    pts = pts[a0 != 0]
    h = step * sc[ax]
    if h < 1e-9 * max(1.0, np.abs(pts[:, ax]).max(initial=0.0)):
        raise FloatingPointError("difference step underflows against the coordinates")
    offs, w = _fd_weights(order)
    acc = np.zeros(len(pts))
    for o, c in zip(offs, w):
        q = pts.copy()
        q[:, ax] += o * h
        acc += c * symbol(q[:, 0], q[:, 1], q[:, 2], k, j, s, INVERSE, cap_index, mass)
    der = acc / h ** order
    ratios = np.abs(der) * 2.0 ** j * sc[ax] ** order
    c = float(ratios.max()) if ratios.size else 0.0
    return LemmaReport("abound", {"k": k, "j": j, "cap": cap_index, "order": order, "axis": axis,
                                  "s": s, "step": step},
                       seed, ratios.size, ratios, c, bool(np.isfinite(c)),
                       {"scales": sc.tolist()}, time.perf_counter() - t0)


class DivisionGuardError(ValueError):
    """The localized band reaches the characteristic surface."""


def _duhamel_grid(k, j, n=32, nt_max=16384):
    """Lattice holding shell ``k`` with ``tau`` spacing at most ``2^(j-1)``."""
    L = np.pi * n / 2.0 ** (k + 2)
    tmax = 2.0 ** (k + 2) + 2.0 ** (j + 2) + 2.0
    dt = np.pi / tmax
    need = 2 * tmax / 2.0 ** (j - 1)
    nt = int(min(nt_max, 2 ** int(np.ceil(np.log2(need)))))
    return SpaceTimeGrid(SpatialGrid(n, L), nt, dt)


def duhamel_kernel_identity(k, j, cap_index=0, s=-1, seed=0, grid=None, mass=1.0,
                            cumulative=False, zero=False):
    """Check ``(-i d_t + s<D>) u = Q_j P_kappa P_k f`` for ``u = Q_j P_kappa P_k f / (tau + s<xi>)``.

    The division happens in space-time frequency; the check recomputes the
    time derivative along the time axis only and ``<D>`` on each spatial
    slice, in physical space.  Returns the relative residual.

    Parameters
    ----------
    cumulative : bool
        Use ``Q_{<=j}`` instead of ``Q_j``; the band then contains the
        characteristic surface and the division guard fires.
    zero : bool
        Use ``f = 0``.

    Raises
    ------
    DivisionGuardError
        If ``|tau + s <xi>| < 2^(j-2)`` somewhere on the support, i.e. the
        band reaches below the dyadic shell ``2^(j-1) < |y| < 2^(j+1)``.
    """
    l = _check_kj(k, j)
    g = grid or _duhamel_grid(k, j)
    sp = g.spatial
    caps = CapSystem(l)
    y = g.modulation(s, mass)
    band = rho0(y * 2.0 ** -j) if cumulative else rho_k(j, y)
    sym = band * (caps.window(cap_index, sp.angle, sp.abs_xi == 0) * lp_symbol(k, sp.abs_xi))[None]
    supp = sym != 0
    if not supp.any():
        raise ValueError("localized band is empty on this lattice")
    if np.abs(y[supp]).min() < 2.0 ** (j - 2):
        raise DivisionGuardError("band meets tau + s<xi> = 0")
    rng = np.random.default_rng(seed)
    fh = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
    if zero:
        fh[:] = 0
    rhs_h = sym * fh
    uh = np.where(supp, rhs_h / np.where(supp, y, 1.0), 0.0)
    u = sfft.ifftn(uh)
    # -i d_t along time, then s <D> on each slice
    dtu = sfft.ifft(sfft.fft(u, axis=0) * g.tau[:, None, None], axis=0)
    du = sfft.ifft2(sfft.fft2(u) * sp.weight(mass)[None])
    lhs = dtu + s * du
    rhs = sfft.ifftn(rhs_h)
    nr = np.linalg.norm(rhs)
    res = np.linalg.norm(lhs - rhs)
    return float(res / nr) if nr > 0 else float(res)


def kernel_report(ks=(3, 4, 5, 6), s=-1, resolution=32, mass=1.0, refine=True,
                  plain_limit=10.0, band=8.0, conv_tol=0.02):
    """Both kernel tables with the pass rules applied.

    Passes when every plain value is at most ``plain_limit``, the scaled
    inverse values ``2^j |K|`` span at most a factor ``band`` and (with
    ``refine``) no entry moves by more than ``conv_tol`` on doubling the
    resolution.
    """
    t0 = time.perf_counter()
    plain = kernel_table(ks, PLAIN, s, resolution, mass, refine)
    inv = kernel_table(ks, INVERSE, s, resolution, mass, refine)
    pv = np.array([r["value"] for r in plain])
    sv = np.array([r["scaled"] for r in inv])
    spread = float(sv.max() / sv.min())
    change = max((r.get("change", 0.0) for r in plain + inv), default=0.0)
    ok = bool(pv.max() <= plain_limit and spread <= band and (not refine or change <= conv_tol))
    det = {"plain": plain, "inverse": inv, "plain_max": float(pv.max()),
           "scaled_spread": spread, "max_change": float(change)}
    return LemmaReport("kernels", {"ks": list(ks), "s": s, "resolution": resolution,
                                   "mass": mass, "refine": refine},
                       None, len(pv) + len(sv), np.concatenate([pv, sv]), float(pv.max()),
                       ok, det, time.perf_counter() - t0)
