"""Dyadic frequency, angular and modulation decompositions.

Cutoffs are built from ``h(t) = exp(-1/t)``: ``rho0`` equals 1 on ``[-1, 1]``,
vanishes outside ``(-2, 2)`` and ``rho_k(y) = rho0(2^-k y) - rho0(2^(1-k) y)``
lives on ``2^(k-1) < |y| < 2^(k+1)``.

Angular caps at level ``l >= 1`` are ``N = 8 2^l`` smooth windows
``eta_i(theta) = S(1 - |theta - theta_i| / h)`` with ``h = 2 pi / N`` and
``S(u) = h(u) / (h(u) + h(1 - u))``.  Adjacent windows sum to one, so every
direction meets at most two caps.  Level 0 is the single cap ``P = I``.
"""
import numpy as np
import scipy.fft as sfft

from .fields import FREQUENCY, Trajectory, spacetime_forward, spacetime_inverse


def _h(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(over="ignore"):  # subnormal t: 1/t -> inf, exp -> 0
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(u):
    """``C^inf`` step: 0 for ``u <= 0``, 1 for ``u >= 1``, ``S(u) + S(1-u) = 1``."""
    u = np.asarray(u, dtype=float)
    a, b = _h(u), _h(1.0 - u)
    return a / (a + b)


def rho0(s):
    """Bump equal to 1 on ``|s| <= 1`` and 0 on ``|s| >= 2``."""
    a = np.abs(np.asarray(s, dtype=float))
    return smoothstep(2.0 - a)


def rho_k(k, y):
    """Dyadic band ``rho0(2^-k |y|) - rho0(2^(1-k) |y|)``."""
    a = np.abs(np.asarray(y, dtype=float))
    return rho0(a * 2.0 ** -k) - rho0(a * 2.0 ** (1 - k))


def rho_tilde(k, y):
    """``rho_{k-1} + rho_k + rho_{k+1}``, equal to 1 on the support of ``rho_k``."""
    a = np.abs(np.asarray(y, dtype=float))
    return rho0(a * 2.0 ** -(k + 1)) - rho0(a * 2.0 ** (2 - k))


def lp_symbol(k, absxi):
    """Symbol of ``P_k``: ``rho_k`` for ``k >= 1`` and ``rho0(|xi|)`` for ``k = 0``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return rho0(absxi) if k == 0 else rho_k(k, absxi)


def lp_le_symbol(k, absxi):
    return rho0(np.asarray(absxi) * 2.0 ** -k)


def lp_tilde_symbol(k, absxi):
    """Symbol of ``P~_k = P_(k-1) + P_k + P_(k+1)`` (``P_(-1) = 0``)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k <= 1:
        return rho0(np.asarray(absxi) * 2.0 ** -(k + 1))
    return rho_tilde(k, absxi)


def lp_max_index(grid):
    """Largest ``k`` whose shell meets the lattice."""
    rmax = grid.abs_xi.max()
    return max(0, int(np.floor(np.log2(rmax))) + 1)


def _check_k(grid, k):
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > lp_max_index(grid):
        raise ValueError(f"shell k={k} lies beyond the lattice Nyquist range")


def _apply(field, sym):
    f = field.frequency()
    out = f.replace(f.data * sym)
    return out if field.rep == FREQUENCY else out.physical()


def lp_project(field, k):
    """``P_k f``."""
    _check_k(field.grid, k)
    return _apply(field, lp_symbol(k, field.grid.abs_xi))


def lp_project_le(field, k):
    """``P_{<=k} f``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return _apply(field, lp_le_symbol(k, field.grid.abs_xi))


def lp_tilde(field, k):
    """``P~_k f``."""
    _check_k(field.grid, k)
    return _apply(field, lp_tilde_symbol(k, field.grid.abs_xi))


class CapSystem:
    """Angular partition of unity at level ``l``.

    Attributes
    ----------
    level : int
    count : int
        ``N_l = 8 2^l`` for ``l >= 1`` and 1 for ``l = 0``.
    spacing : float
        Angle between neighbouring centers.
    centers : ndarray
        Center angles ``2 pi i / N_l``.
    """

    def __init__(self, level):
        if level < 0:
            raise ValueError("cap level must be >= 0")
        self.level = int(level)
        self.count = 1 if level == 0 else 8 * 2 ** level
        self.spacing = 2 * np.pi / self.count
        self.centers = self.spacing * np.arange(self.count)

    @property
    def halfwidth(self):
        """Angular half-width of each window's support."""
        return np.pi if self.level == 0 else self.spacing

    @property
    def tilde_halfwidth(self):
        """Half-width of the enlarged cap ``eta_(i-1) + eta_i + eta_(i+1)``."""
        return np.pi if self.level == 0 else 2 * self.spacing

    def direction(self, i):
        return np.array([np.cos(self.centers[i]), np.sin(self.centers[i])])

    def weights(self, theta, origin=None):
        """Two-cap representation of the windows at angles ``theta``.

        Returns ``(i0, w0, i1, w1)``; the window of cap ``i`` at a point is
        ``w0 [i0 == i] + w1 [i1 == i]``.  Points flagged by ``origin`` go to cap 0.
        """
        theta = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
        if self.level == 0:
            z = np.zeros(theta.shape, dtype=int)
            return z, np.ones(theta.shape), z, np.zeros(theta.shape)
        u = theta / self.spacing
        i0 = np.floor(u).astype(int) % self.count
        frac = u - np.floor(u)
        w1 = smoothstep(frac)
        w0 = 1.0 - w1
        i1 = (i0 + 1) % self.count
        if origin is not None:
            i0 = np.where(origin, 0, i0)
            w0 = np.where(origin, 1.0, w0)
            w1 = np.where(origin, 0.0, w1)
        return i0, w0, i1, w1

    def window(self, i, theta, origin=None):
        if not 0 <= i < self.count:
            raise IndexError(f"cap index {i} out of range for level {self.level}")
        i0, w0, i1, w1 = self.weights(theta, origin)
        return np.where(i0 == i, w0, 0.0) + np.where(i1 == i, w1, 0.0)

    def grid_weights(self, grid):
        return self.weights(grid.angle, grid.abs_xi == 0)

    def active(self, grid, support=None):
        """Cap indices whose window meets ``support`` (a boolean lattice mask)."""
        i0, w0, i1, w1 = self.grid_weights(grid)
        sel = np.ones(grid.shape, bool) if support is None else support
        return np.union1d(i0[sel & (w0 > 0)], i1[sel & (w1 > 0)])


def cap_symbol(grid, l, i):
    caps = CapSystem(l)
    return caps.window(i, grid.angle, grid.abs_xi == 0)


def cap_project(field, l, cap_index):
    """``P_kappa f`` for cap ``cap_index`` at level ``l``."""
    return _apply(field, cap_symbol(field.grid, l, cap_index))


def cap_distance(l, i1, s1, i2, s2):
    """Angular distance between the supports of the enlarged caps ``s1 kappa1`` and ``s2 kappa2``.

    ``-kappa`` is the antipodal cap.  Returns 0 when the supports overlap.
    """
    caps = CapSystem(l)
    a = caps.centers[i1] + (0 if s1 > 0 else np.pi)
    b = caps.centers[i2] + (0 if s2 > 0 else np.pi)
    d = np.abs(np.mod(a - b + np.pi, 2 * np.pi) - np.pi)
    return float(max(0.0, d - 2 * caps.tilde_halfwidth))


def temporal_window(nt, edge=0.1):
    """Smooth taper rising over the first ``edge`` fraction and falling over the last."""
    u = (np.arange(nt) + 0.5) / nt
    return smoothstep(u / edge) * smoothstep((1.0 - u) / edge)


def spectrum(traj, window=False):
    """Space-time spectrum of a trajectory, optionally tapered in time."""
    if not window:
        return traj.spectrum
    w = temporal_window(traj.grid.nt)
    w = w.reshape((-1,) + (1,) * (traj.data.ndim - 1))
    return spacetime_forward(traj.grid, traj.data * w)


def modulation_symbol(grid, j, s, m):
    """``rho_j(tau + s <xi>_m)`` on the ``(nt, n, n)`` lattice."""
    return rho_k(j, grid.modulation(s, m))


def modulation_le_symbol(grid, j, s, m):
    """Symbol of ``Q_{<=j}``; the identity for ``j = +inf``."""
    if j == np.inf:
        return np.ones((grid.nt,) + grid.spatial.shape)
    return rho0(grid.modulation(s, m) * 2.0 ** -j)


def _bcast(sym, cube):
    return sym[:, None] if cube.ndim == 4 else sym


def _check_j(grid, j):
    lo, hi = grid.modulation_range()
    if not lo <= j <= hi:
        raise ValueError(f"modulation index j={j} outside the resolved range [{lo}, {hi}]")


def modulation_project(traj, j, s, m, window=False):
    """``Q_j^{s,m}`` applied to a trajectory."""
    _check_j(traj.grid, j)
    cube = spectrum(traj, window) * _bcast(modulation_symbol(traj.grid, j, s, m), traj.data)
    return Trajectory.from_spectrum(traj.grid, cube, traj.t0)


def modulation_project_le(traj, j, s, m, window=False):
    """``Q_{<=j}^{s,m}``; ``j = +inf`` returns the (possibly windowed) input."""
    if j == np.inf and not window:
        return traj
    if j != np.inf and j > traj.grid.modulation_range()[1]:
        raise ValueError(f"modulation index j={j} beyond the lattice range")
    cube = spectrum(traj, window) * _bcast(modulation_le_symbol(traj.grid, j, s, m), traj.data)
    return Trajectory.from_spectrum(traj.grid, cube, traj.t0)


def modulation_bands(grid, s, m):
    """Resolved bands and the unresolved low remainder.

    Returns
    -------
    js : list of int
        ``j_lo .. j_hi``.
    low : ndarray
        Symbol of ``Q_{<j_lo}``, the content the lattice cannot split further.
    """
    lo, hi = grid.modulation_range()
    y = grid.modulation(s, m)
    low = rho0(y * 2.0 ** -(lo - 1))
    return list(range(lo, hi + 1)), low


def mixed_norm(phys, p, q, dt, dx):
    """``L^p_t L^q_x`` norm of samples with time on axis 0.

    Spinor data (a component axis at position 1) uses the pointwise
    Euclidean modulus.  Leading batch axes are not supported here; see
    :func:`batched_mixed_norm`.
    """
    return batched_mixed_norm(phys[None], p, q, dt, dx)[0]


def _pow_half(a, q):
    """``a^(q/2)`` for ``a = |f|^2``, with cheap paths for the common exponents."""
    if q == 2:
        return a
    if q == 4:
        return a * a
    if q == 8:
        a2 = a * a
        return a2 * a2
    if q == 8 / 3:
        return a * np.cbrt(a)
    if q == 4 / 3:
        return np.cbrt(a) ** 2
    return a ** (q / 2)


def batched_mixed_norm(phys, p, q, dt, dx):
    """Vectorized :func:`mixed_norm` over a leading batch axis."""
    a = phys.real ** 2 + phys.imag ** 2
    if a.ndim == 5:
        a = a.sum(axis=2)
    return _norms_from_density(a, [(p, q)], dt, dx)[0]


def _norms_from_density(a, pq_list, dt, dx):
    """Mixed norms from ``a = |f|^2`` of shape ``(batch, nt, n, n)``."""
    out = []
    for p, q in pq_list:
        if q == np.inf:
            inner = np.sqrt(a.max(axis=(-2, -1)))
        else:
            inner = (np.sum(_pow_half(a, q), axis=(-2, -1)) * dx * dx) ** (1.0 / q)
        if p == np.inf:
            out.append(inner.max(axis=1))
        else:
            out.append((np.sum(inner ** p, axis=1) * dt) ** (1.0 / p))
    return out


def cap_pieces_norms(cube, grid, l, pq_list, chunk=16, support_tol=0.0):
    """Per-cap ``L^p L^q`` norms of ``P_kappa`` applied to a spectrum.

    Parameters
    ----------
    cube : ndarray
        Space-time spectrum, ``(nt, n, n)`` or ``(nt, 2, n, n)``.
    grid : SpaceTimeGrid
    l : int
        Cap level.
    pq_list : sequence of (p, q)

    Returns
    -------
    ndarray of shape ``(len(pq_list), n_active_caps)``
        Caps whose window misses the spectral support are skipped (their
        norm is zero).
    """
    sp = grid.spatial
    caps = CapSystem(l)
    mass = (cube.real ** 2 + cube.imag ** 2).reshape((-1,) + sp.shape).sum(axis=0)
    support = mass > support_tol
    if not support.any():
        return np.zeros((len(pq_list), 0))
    active = caps.active(sp, support)
    i0, w0, i1, w1 = caps.grid_weights(sp)
    # caps act on xi only, so the time transform is done once
    g = sfft.ifft(cube, axis=0)
    scale = 1.0 / (grid.dt * sp.dx ** 2)
    spin = cube.ndim == 4
    out = []
    for start in range(0, len(active), chunk):
        idx = active[start:start + chunk]
        win = np.zeros((len(idx),) + sp.shape)
        for r, i in enumerate(idx):
            win[r][i0 == i] += w0[i0 == i]
            win[r][i1 == i] += w1[i1 == i]
        win = win[:, None, None] if spin else win[:, None]
        phys = sfft.ifft2(g[None] * win, axes=(-2, -1))
        a = phys.real ** 2 + phys.imag ** 2
        if spin:
            a = a[:, :, 0] + a[:, :, 1]
        out.append([v * scale for v in _norms_from_density(a, pq_list, grid.dt, sp.dx)])
    return np.concatenate([np.array(o) for o in out], axis=1)


def cap_l2(cube, grid, l, p, q):
    """``(sum_kappa ||P_kappa f||_{L^p L^q}^2)^(1/2)`` from a spectrum."""
    v = cap_pieces_norms(cube, grid, l, [(p, q)])[0]
    return float(np.sqrt(np.sum(v ** 2)))


def cap_l2_profile(traj, j, k, l, p, q, s, m, window=False):
    """Cap-square-summed mixed norm of ``Q_j f`` at cap level ``l``.

    ``j = None`` skips the modulation filter and ``j = inf`` means ``Q_{<=inf} = I``.
    """
    if not 0 <= l <= k:
        raise ValueError(f"need 0 <= l <= k, got l={l}, k={k}")
    if p < 1 or q < 1:
        raise ValueError("need p, q >= 1")
    cube = spectrum(traj, window)
    if j is not None and j != np.inf:
        _check_j(traj.grid, j)
        cube = cube * _bcast(modulation_symbol(traj.grid, j, s, m), cube)
    return cap_l2(cube, traj.grid, l, p, q)


def random_cap_spectrum(grid, k, l, cap, rng, ncomp=None):
    """Gaussian spatial spectrum localized to shell ``k`` and one cap."""
    shape = grid.shape if ncomp is None else (ncomp,) + grid.shape
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return c * lp_symbol(k, grid.abs_xi) * cap_symbol(grid, l, cap)


def cap_projector_deviation(k, l, s, sample_count, rng, M=1.0, grid=None):
    """``||(Pi_s(D) - Pi_s(2^k omega_cap)) P_cap f|| / ||P_cap f|| * 2^l`` on random fields."""
    from .algebra import pi_symbol
    from .grid import make_grid
    if grid is None:
        n = 128
        grid = make_grid(n, np.pi * n / 2.0 ** (k + 2))
    caps = CapSystem(l)
    P = pi_symbol(grid.xi, M, s)
    out = np.empty(sample_count)
    for t in range(sample_count):
        i = int(rng.integers(caps.count))
        f = random_cap_spectrum(grid, k, l, i, rng, ncomp=2)
        P0 = pi_symbol(2.0 ** k * caps.direction(i), M, s)
        g = np.einsum("xyab,bxy->axy", P - P0, f)
        out[t] = np.linalg.norm(g) / np.linalg.norm(f) * 2.0 ** l
    return out
