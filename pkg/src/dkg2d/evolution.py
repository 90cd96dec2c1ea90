"""Time integration of the half-wave form of the Dirac-Klein-Gordon system.

Unknowns are the spinor halves ``psi_+-`` and the complex scalar ``phi_+``:

    d/dt psi_s = -s i <D>_M psi_s + i Pi_s(D) [Re(phi_+) beta psi],   psi = psi_+ + psi_-
    d/dt phi_+ = -i <D>_m phi_+ + i <D>_m^-1 <psi, beta psi>

with ``phi = Re phi_+`` and ``d/dt phi = <D>_m Im phi_+``.  Internally the
three spectra are packed into one ``(5, n, n)`` array (rows 0-1 ``psi_+``,
2-3 ``psi_-``, 4 ``phi_+``) so the linear flow is a single diagonal phase.
"""
import csv
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .algebra import pi_symbol
from .fields import (FREQUENCY, MassPair, ScalarField, SpinorField, Trajectory, fft2,
                     ifft2, random_sobolev_field)
from .grid import SpaceTimeGrid
from .report import loglog_slope

STEPPER = "stepper"
PICARD = "picard"
DIAG_COLUMNS = ("t", "charge", "psi_hsigma", "phi_hsigma", "boundary_fraction", "guard")


class StateError(ValueError):
    """Inconsistent solver state or initial data."""


class GuardError(RuntimeError):
    """A blow-up or conservation guard tripped; ``diagnostics`` holds the rows so far."""

    def __init__(self, msg, diagnostics=None, reason=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or []
        self.reason = reason


class PicardDivergence(RuntimeError):
    """Successive Picard iterates moved apart three times in a row."""

    def __init__(self, msg, distances=()):
        super().__init__(msg)
        self.distances = list(distances)


def _rel_residual(x, px):
    nx = np.linalg.norm(x)
    return float(np.linalg.norm(px - x) / nx) if nx > 0 else 0.0


@dataclass(frozen=True)
class DKGState:
    """Solution at one time; all fields in the frequency representation.

    Construction checks that the fields share a grid and that each spinor
    half lies in the range of its projector to ``1e-10`` relative.
    """
    t: float
    psi_plus: SpinorField
    psi_minus: SpinorField
    phi_plus: ScalarField
    masses: MassPair = field(default_factory=MassPair)

    def __post_init__(self):
        g = self.psi_plus.grid
        if self.psi_minus.grid != g or self.phi_plus.grid != g:
            raise StateError("fields live on different grids")
        for name in ("psi_plus", "psi_minus", "phi_plus"):
            f = getattr(self, name)
            if f.rep != FREQUENCY:
                object.__setattr__(self, name, f.frequency())
        res = self.projection_residual()
        if max(res) > 1e-10:
            raise StateError(f"spinor halves leave their projector ranges: {res}")

    @property
    def grid(self):
        return self.psi_plus.grid

    def projection_residual(self):
        M = self.masses.M
        out = []
        for s, f in ((1, self.psi_plus), (-1, self.psi_minus)):
            P = _Projector(self.grid, M)
            out.append(_rel_residual(f.data, P.apply(f.data, s)))
        return tuple(out)

    def pack(self):
        return np.concatenate([self.psi_plus.data, self.psi_minus.data,
                               self.phi_plus.data[None]])

    @classmethod
    def unpack(cls, grid, t, U, masses):
        return cls(float(t), SpinorField(grid, U[0:2], FREQUENCY),
                   SpinorField(grid, U[2:4], FREQUENCY),
                   ScalarField(grid, U[4], FREQUENCY), masses)


@dataclass
class SolverConfig:
    """Integration settings.

    ``nonlinear=False`` switches the coupling off (free flow), a test hook.
    ``blowup_factor`` and ``charge_tol`` set the guards; ``boundary_limit``
    is the boundary-strip energy fraction above which dispersive
    diagnostics are flagged invalid.
    """
    dt: float = 0.01
    t_end: float = 1.0
    stride: int = 1
    dealias: bool = True
    mode: str = STEPPER
    picard_iterations: int = 30
    picard_tol: float = 1e-10
    r: float = 0.6
    sigma: float = 1.1
    r0: float = 1.0
    seed: int = 0
    nonlinear: bool = True
    blowup_factor: float = 1e3
    charge_tol: float = 1e-6
    boundary_limit: float = 0.01
    boundary_width: float = 0.1

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError("dt must be positive")
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError("t_end must be >= 0")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValueError("stride must be a positive integer")
        if self.mode not in (STEPPER, PICARD):
            raise ValueError(f"mode must be {STEPPER!r} or {PICARD!r}")
        if self.picard_iterations < 1:
            raise ValueError("picard_iterations must be >= 1")

    @property
    def nsteps(self):
        return int(round(self.t_end / self.dt))

    def validate(self, grid):
        """Check ``dt <= dx / 2`` and that ``t_end`` is a whole number of steps."""
        if self.dt > 0.5 * grid.dx * (1 + 1e-12):
            raise ValueError(f"dt={self.dt} exceeds dx/2={grid.dx / 2}")
        if abs(self.nsteps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError("t_end must be a multiple of dt")


class _Projector:
    """Entries of ``Pi_+^M`` on the lattice, for fast elementwise application."""

    def __init__(self, grid, M):
        P = pi_symbol(grid.xi, M, 1)
        self.a, self.b, self.c, self.d = P[..., 0, 0], P[..., 0, 1], P[..., 1, 0], P[..., 1, 1]

    def plus(self, f):
        f0, f1 = f[..., 0, :, :], f[..., 1, :, :]
        return np.stack([self.a * f0 + self.b * f1, self.c * f0 + self.d * f1], axis=-3)

    def apply(self, f, s):
        p = self.plus(f)
        return p if s == 1 else f - p


class _System:
    """Precomputed symbols for one grid, mass pair and dealiasing choice."""

    def __init__(self, grid, masses, dealias=True, nonlinear=True):
        if masses.m <= 0:
            raise StateError("the scalar mass m must be positive")
        self.grid, self.masses = grid, masses
        self.nonlinear = nonlinear
        self.wM = grid.weight(masses.M)
        self.wm = grid.weight(masses.m)
        self.freq = np.stack([-self.wM, -self.wM, self.wM, self.wM, -self.wm])
        self.mask = grid.dealias_mask.astype(float) if dealias else None
        self.proj = _Projector(grid, masses.M)
        self.dx2 = grid.dx ** 2

    def phase(self, t):
        """``exp(t L)`` for scalar or 1-d array ``t`` (broadcast on a leading axis)."""
        t = np.asarray(t, dtype=float)
        return np.exp(1j * t.reshape(t.shape + (1, 1, 1)) * self.freq)

    def parts(self, U):
        """``(F_+, F_-, G)`` spectra of the nonlinearity, without the factor ``i``."""
        psi_h = U[..., 0:2, :, :] + U[..., 2:4, :, :]
        phi_h = U[..., 4, :, :]
        if self.mask is not None:
            psi_h = psi_h * self.mask
            phi_h = phi_h * self.mask
        psi = ifft2(psi_h) / self.dx2
        phi = (ifft2(phi_h) / self.dx2).real
        bpsi = np.stack([psi[..., 0, :, :], -psi[..., 1, :, :]], axis=-3)
        prod = fft2(phi[..., None, :, :] * bpsi) * self.dx2
        dens = np.abs(psi[..., 0, :, :]) ** 2 - np.abs(psi[..., 1, :, :]) ** 2
        src = fft2(dens) * self.dx2
        if self.mask is not None:
            prod = prod * self.mask
            src = src * self.mask
        fp = self.proj.plus(prod)
        return fp, prod - fp, src / self.wm

    def rhs(self, U):
        """Nonlinear part ``N(U)`` of ``dU/dt = L U + N(U)``."""
        if not self.nonlinear:
            return np.zeros_like(U)
        fp, fm, g = self.parts(U)
        return 1j * np.concatenate([fp, fm, g[..., None, :, :]], axis=-3)

    def lawson(self, U, h):
        E = self.phase(h)
        Eh = self.phase(h / 2)
        k1 = self.rhs(U)
        k2 = self.rhs(Eh * (U + 0.5 * h * k1))
        k3 = self.rhs(Eh * U + 0.5 * h * k2)
        k4 = self.rhs(E * U + h * Eh * k3)
        return E * U + (h / 6) * (E * k1 + 2 * Eh * (k2 + k3) + k4)


def prepare_initial(psi0, phi0, phi1, masses=MassPair()):
    """Half-wave data ``psi_s = Pi_s psi0`` and ``phi_+ = phi0 + i <D>_m^-1 phi1``.

    Raises
    ------
    StateError
        If ``phi0`` or ``phi1`` has an imaginary part above ``1e-12``.
    """
    g = psi0.grid
    if phi0.grid != g or phi1.grid != g:
        raise StateError("initial fields live on different grids")
    if masses.m <= 0:
        raise StateError("the scalar mass m must be positive")
    p0, p1 = phi0.physical().data, phi1.physical().data
    for name, v in (("phi0", p0), ("phi1", p1)):
        if np.max(np.abs(v.imag), initial=0.0) >= 1e-12:
            raise StateError(f"{name} must be real-valued")
    ps = psi0.frequency().data
    P = _Projector(g, masses.M)
    fp = P.plus(ps)
    phi_h = fft2(p0.real) * g.dx ** 2 + 1j * fft2(p1.real) * g.dx ** 2 / g.weight(masses.m)
    return DKGState(0.0, SpinorField(g, fp, FREQUENCY), SpinorField(g, ps - fp, FREQUENCY),
                    ScalarField(g, phi_h, FREQUENCY), masses)


def _reconstruct_packed(U, grid, m):
    dx2 = grid.dx ** 2
    psi = ifft2(U[..., 0:2, :, :] + U[..., 2:4, :, :]) / dx2
    php = ifft2(U[..., 4, :, :]) / dx2
    phi = php.real
    phi_t = ifft2(fft2(php.imag) * grid.weight(m)).real
    return psi, phi, phi_t


def reconstruct(state):
    """Physical ``(psi, phi, phi_t)`` from a :class:`DKGState`."""
    return _reconstruct_packed(state.pack(), state.grid, state.masses.m)


def nonlinearity(state, dealias=True):
    """``(F_+, F_-, G)`` with ``F_s = Pi_s [Re(phi_+) beta psi]`` and ``G = <D>_m^-1 <psi, beta psi>``."""
    sysm = _System(state.grid, state.masses, dealias)
    fp, fm, g = sysm.parts(state.pack())
    gr = state.grid
    return (SpinorField(gr, fp, FREQUENCY), SpinorField(gr, fm, FREQUENCY),
            ScalarField(gr, g, FREQUENCY))


def step(state, dt, dealias=True, nonlinear=True):
    """One Lawson RK4 step of size ``dt``."""
    sysm = _System(state.grid, state.masses, dealias, nonlinear)
    U = sysm.lawson(state.pack(), dt)
    if not np.all(np.isfinite(U)):
        raise GuardError(f"non-finite values after step at t={state.t + dt}", reason="nan")
    return DKGState.unpack(state.grid, state.t + dt, U, state.masses)


class DKGTrajectory:
    """Snapshots of a run: packed spectra of shape ``(nsnap, 5, n, n)``.

    Attributes
    ----------
    grid : SpatialGrid
    times : ndarray
    data : ndarray
    masses : MassPair
    diagnostics : list of dict
        One row per snapshot with the columns of ``DIAG_COLUMNS``.
    flags : dict
        ``dispersive_valid`` (boundary monitor), ``guard`` and solver details.
    """

    def __init__(self, grid, times, data, masses, diagnostics=None, flags=None):
        self.grid, self.masses = grid, masses
        self.times = np.asarray(times, dtype=float)
        self.data = np.asarray(data)
        self.diagnostics = diagnostics or []
        self.flags = dict(flags or {})

    def __len__(self):
        return len(self.times)

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    def state(self, i):
        return DKGState.unpack(self.grid, self.times[i], self.data[i], self.masses)

    def final(self):
        return self.state(-1)

    def reconstruct(self):
        """Physical ``(psi, phi, phi_t)`` at every snapshot."""
        return _reconstruct_packed(self.data, self.grid, self.masses.m)

    def field(self, name, nt=None):
        """A :class:`Trajectory` of ``psi``, ``phi``, ``psi_plus``, ``psi_minus`` or ``phi_plus``.

        The first ``nt`` snapshots are used (all by default).
        """
        nt = len(self) if nt is None else nt
        U = self.data[:nt]
        dx2 = self.grid.dx ** 2
        if name == "psi":
            d = ifft2(U[:, 0:2] + U[:, 2:4]) / dx2
        elif name == "phi":
            d = (ifft2(U[:, 4]) / dx2).real
        elif name in ("psi_plus", "psi_minus"):
            d = ifft2(U[:, 0:2] if name == "psi_plus" else U[:, 2:4]) / dx2
        elif name == "phi_plus":
            d = ifft2(U[:, 4]) / dx2
        else:
            raise ValueError(f"unknown field {name!r}")
        return Trajectory(SpaceTimeGrid(self.grid, nt, self.dt), d, self.times[0])


def _hs2(spec, grid, s, axes):
    w = (1.0 + grid.abs_xi ** 2) ** s
    return np.sum(w * np.abs(spec) ** 2, axis=axes) / grid.length ** 2


def combined_hs(U, grid, sigma):
    """``H^sigma`` norm of packed data (all five rows); leading axes are kept."""
    return np.sqrt(_hs2(U, grid, sigma, (-3, -2, -1)))


def charge(U, grid):
    """``||psi||_{L^2}^2`` for packed spectra."""
    return float(_hs2(U[0:2] + U[2:4], grid, 0.0, (-3, -2, -1)))


def boundary_fraction(U, grid, width=0.1):
    """Share of ``|psi|^2 + |phi_+|^2`` inside the strip of relative ``width`` along the cell edges."""
    x = grid.x / grid.length
    edge1 = (x < width) | (x >= 1 - width)
    strip = edge1[:, None] | edge1[None, :]
    dx2 = grid.dx ** 2
    psi = ifft2(U[0:2] + U[2:4]) / dx2
    php = ifft2(U[4]) / dx2
    dens = np.sum(np.abs(psi) ** 2, axis=0) + np.abs(php) ** 2
    tot = dens.sum()
    return float(dens[strip].sum() / tot) if tot > 0 else 0.0


def _diag_row(U, t, grid, config, guard=""):
    return {"t": float(t), "charge": charge(U, grid),
            "psi_hsigma": float(np.sqrt(_hs2(U[0:2] + U[2:4], grid, config.sigma, (-3, -2, -1)))),
            "phi_hsigma": float(np.sqrt(_hs2(U[4], grid, config.sigma, (-2, -1)))),
            "boundary_fraction": boundary_fraction(U, grid, config.boundary_width),
            "guard": guard}


def _check_guards(U, t, grid, config, q0, n0, rows):
    if not np.all(np.isfinite(U)):
        raise GuardError(f"non-finite values at t={t:.6g}", rows, "nan")
    n = float(combined_hs(U, grid, config.sigma))
    if n0 > 0 and n > config.blowup_factor * n0:
        raise GuardError(f"H^sigma norm grew by more than {config.blowup_factor:g} at t={t:.6g}",
                         rows, "blowup")
    q = charge(U, grid)
    if q0 > 0 and abs(q - q0) > config.charge_tol * q0:
        raise GuardError(f"charge drift {abs(q - q0) / q0:.3e} above {config.charge_tol:g} "
                         f"at t={t:.6g}", rows, "charge")


def evolve(initial, config):
    """Integrate from ``initial`` to ``config.t_end``.

    ``config.mode`` selects the Lawson RK4 stepper or :func:`picard_solve`.
    Snapshots are kept every ``config.stride`` steps.

    Returns
    -------
    DKGTrajectory

    Raises
    ------
    GuardError
        On non-finite values, norm growth beyond ``blowup_factor`` or charge
        drift beyond ``charge_tol``.  Boundary leakage only clears the
        ``dispersive_valid`` flag.
    """
    if config.mode == PICARD:
        return picard_solve(initial, config)
    grid = initial.grid
    config.validate(grid)
    sysm = _System(grid, initial.masses, config.dealias, config.nonlinear)
    U = initial.pack()
    q0 = charge(U, grid)
    n0 = float(combined_hs(U, grid, config.sigma))
    rows = [_diag_row(U, initial.t, grid, config)]
    snaps, times = [U], [initial.t]
    t0 = time.perf_counter()
    for i in range(1, config.nsteps + 1):
        U = sysm.lawson(U, config.dt)
        t = initial.t + i * config.dt
        if i % config.stride == 0 or not np.all(np.isfinite(U)):
            _check_guards(U, t, grid, config, q0, n0, rows)
            rows.append(_diag_row(U, t, grid, config))
            snaps.append(U)
            times.append(t)
    valid = max(r["boundary_fraction"] for r in rows) <= config.boundary_limit
    flags = {"mode": STEPPER, "dispersive_valid": bool(valid), "guard": None,
             "dealias": config.dealias, "nonlinear": config.nonlinear,
             "dt": config.dt, "runtime_s": time.perf_counter() - t0}
    return DKGTrajectory(grid, times, np.stack(snaps), initial.masses, rows, flags)


def picard_solve(initial, config):
    """Picard iteration of the Duhamel formula on ``[0, t_end]``.

    Each iterate is the free flow plus the trapezoid-rule Duhamel integral
    (in the interaction picture) of the previous iterate's nonlinearity on
    the step grid ``dt``.  Stops after ``picard_iterations`` or once the
    sup-in-time ``H^sigma`` distance of successive iterates drops below
    ``picard_tol``.  ``flags`` record the iteration count and distances.

    Raises
    ------
    PicardDivergence
        If the distance grows three iterations in a row or stops being finite.
    """
    grid = initial.grid
    config.validate(grid)
    sysm = _System(grid, initial.masses, config.dealias, config.nonlinear)
    t = initial.t + config.dt * np.arange(config.nsteps + 1)
    rel = t - initial.t
    E = sysm.phase(rel)
    Einv = E.conj()
    U0 = initial.pack()
    U = E * U0
    dists, grow = [], 0
    t0 = time.perf_counter()
    converged = False
    for it in range(1, config.picard_iterations + 1):
        g = Einv * sysm.rhs(U)
        W = U0 + cumulative_trapezoid(g, dx=config.dt, axis=0, initial=0)
        Un = E * W
        d = float(np.max(combined_hs(Un - U, grid, config.sigma)))
        U = Un
        if not np.isfinite(d):
            raise PicardDivergence("non-finite Picard iterate", dists)
        if dists and d > dists[-1]:
            grow += 1
            if grow >= 3:
                dists.append(d)
                raise PicardDivergence(
                    f"Picard distances grew three times in a row (last {d:.3e})", dists)
        else:
            grow = 0
        dists.append(d)
        if d < config.picard_tol:
            converged = True
            break
    keep = slice(None, None, config.stride)
    rows = [_diag_row(U[i], t[i], grid, config) for i in range(0, len(t), config.stride)]
    valid = max(r["boundary_fraction"] for r in rows) <= config.boundary_limit
    flags = {"mode": PICARD, "iterations": len(dists), "distances": dists,
             "converged": converged, "dispersive_valid": bool(valid), "guard": None,
             "dealias": config.dealias, "nonlinear": config.nonlinear, "dt": config.dt,
             "runtime_s": time.perf_counter() - t0}
    return DKGTrajectory(grid, t[keep], U[keep], initial.masses, rows, flags)


def write_diagnostics_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=DIAG_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def read_diagnostics_csv(path):
    with open(path, newline="") as fh:
        out = []
        for r in csv.DictReader(fh):
            out.append({k: (v if k == "guard" else float(v)) for k, v in r.items()})
        return out


def random_initial_data(grid, delta, masses=MassPair(), eps=0.1, seed=0, envelope=None,
                        dealias=True):
    """Random small data with ``||psi0||_{H^{1/2+eps}} = ||phi_+(0)||_{H^{1+eps}} = delta``.

    Parameters
    ----------
    envelope : float, optional
        Width of a Gaussian envelope centred in the cell, which keeps the data
        away from the periodic seam.
    dealias : bool
        Restrict the draw to the dealiased band.
    """
    rng = np.random.default_rng(seed)
    env = None
    if envelope is not None:
        c = grid.length / 2
        env = np.exp(-((grid.x1 - c) ** 2 + (grid.x2 - c) ** 2) / (2 * envelope ** 2))
    band = grid.dealias_mask if dealias else None
    psi0 = random_sobolev_field(grid, "spinor", 1.0, 0.5 + eps, rng, envelope=env, band_mask=band)
    phi0 = random_sobolev_field(grid, "scalar", 1.0, 1 + eps, rng, real=True, envelope=env,
                                band_mask=band)
    phi1 = random_sobolev_field(grid, "scalar", 1.0, eps, rng, real=True, envelope=env,
                                band_mask=band)
    phi0 = phi0.replace(phi0.data.real)
    phi1 = phi1.replace(phi1.data.real)
    st = prepare_initial(psi0, phi0, phi1, masses)
    U = st.pack()
    a = np.sqrt(_hs2(U[0:2] + U[2:4], grid, 0.5 + eps, (-3, -2, -1)))
    b = np.sqrt(_hs2(U[4], grid, 1 + eps, (-2, -1)))
    U[0:4] *= delta / a
    U[4] *= delta / b
    return DKGState.unpack(grid, 0.0, U, masses)


def residual_second_order(traj):
    """Window ``L^2`` residuals of both second-order equations.

    Time derivatives are centred differences of the snapshots, so the
    residuals are ``O(dt^2)`` plus spectral error.  With dealiasing on, the
    source ``psi^* beta psi`` is band-limited the same way as in the solver.

    Returns
    -------
    res_dirac, res_kg : float
    """
    if len(traj) < 5:
        raise ValueError("residual needs at least 5 snapshots")
    dts = np.diff(traj.times)
    if not np.allclose(dts, dts[0], rtol=1e-9):
        raise ValueError("snapshots must be uniformly spaced")
    h = dts[0]
    g = traj.grid
    M, m = traj.masses.M, traj.masses.m
    psi, phi, phi_t = traj.reconstruct()
    dx2 = g.dx ** 2
    inner = slice(1, -1)
    dpsi = (psi[2:] - psi[:-2]) / (2 * h)
    dphit = (phi_t[2:] - phi_t[:-2]) / (2 * h)
    p = psi[inner]
    ph = fft2(p) * dx2
    # H psi = (xi . alpha + M beta) psi in frequency space
    x1, x2 = g.xi1, g.xi2
    h0 = (x1 - 1j * x2) * ph[:, 1] + M * ph[:, 0]
    h1 = (x1 + 1j * x2) * ph[:, 0] - M * ph[:, 1]
    Hpsi = ifft2(np.stack([h0, h1], axis=1)) / dx2
    f = phi[inner]
    bpsi = np.stack([p[:, 0], -p[:, 1]], axis=1)
    # i d_t psi = H psi - phi beta psi
    r_d = 1j * dpsi - Hpsi + f[:, None] * bpsi
    dens = np.abs(p[:, 0]) ** 2 - np.abs(p[:, 1]) ** 2
    fh = fft2(f) * dx2
    lap = (ifft2(fh * (g.abs_xi ** 2 + m * m)) / dx2).real
    if traj.flags.get("dealias", False):
        dens = (ifft2(fft2(dens) * g.dealias_mask)).real
    r_k = dphit + lap - dens
    w = h * dx2
    return (float(np.sqrt(np.sum(np.abs(r_d) ** 2) * w)),
            float(np.sqrt(np.sum(r_k ** 2) * w)))


@dataclass
class ScatteringReport:
    """Profile diagnostics of a run or a sweep of runs.

    ``distances[i, j] = ||U(t_i) - U(t_j)||_{H^sigma}`` for the profiles
    ``u_s = exp(s i t <D>_M) psi_s`` and ``v = exp(i t <D>_m) phi_+``.
    ``deltas``, ``deviations`` and ``slope`` are filled by :func:`scattering_sweep`.
    """
    times: np.ndarray
    distances: np.ndarray
    sigma: float
    deltas: list = field(default_factory=list)
    deviations: list = field(default_factory=list)
    slope: float = float("nan")
    label: str = "desk-scale scattering diagnostic"

    def distance(self, t1, t2):
        i = int(np.argmin(np.abs(self.times - t1)))
        j = int(np.argmin(np.abs(self.times - t2)))
        return float(self.distances[i, j])

    def to_dict(self):
        return {"label": self.label, "sigma": self.sigma, "times": self.times.tolist(),
                "distances": self.distances.tolist(), "deltas": list(self.deltas),
                "deviations": list(self.deviations), "slope": self.slope}


def profiles(traj):
    """Interaction-picture profiles ``exp(-t L) U(t)`` with ``t`` measured from the first snapshot."""
    sysm = _System(traj.grid, traj.masses, False)
    return sysm.phase(traj.times - traj.times[0]).conj() * traj.data


def scattering_profiles(traj, sigma=1.1, require_valid=True):
    """Pairwise ``H^sigma`` distances of the profiles at the snapshot times.

    Raises
    ------
    ValueError
        If the run is flagged invalid (guard trip or boundary leakage).
    """
    if require_valid and (traj.flags.get("guard") or not traj.flags.get("dispersive_valid", True)):
        raise ValueError("run flagged invalid for dispersive diagnostics")
    P = profiles(traj)
    n = len(traj)
    D = np.zeros((n, n))
    for i in range(n):
        D[i, i + 1:] = combined_hs(P[i + 1:] - P[i], traj.grid, sigma)
    D = D + D.T
    return ScatteringReport(traj.times.copy(), D, sigma)


def scattering_sweep(grid, deltas, config, masses=MassPair(), seed=0, envelope=None):
    """Deviation ``||U(t_end) - U(0)||_{H^sigma}`` of the profile for each ``delta``.

    The same random shape is scaled to each ``delta``; the log-log slope of
    deviation against ``delta`` is about 2 for a quadratic nonlinearity.
    """
    deltas = [float(d) for d in deltas]
    if len(deltas) < 2 or any(d <= 0 for d in deltas):
        raise ValueError("need at least two positive deltas")
    if config.nsteps % config.stride:
        raise ValueError("stride must divide the step count so t_end is a snapshot")
    base = random_initial_data(grid, 1.0, masses, seed=seed, envelope=envelope,
                               dealias=config.dealias)
    devs = []
    last = None
    for d in deltas:
        st = DKGState.unpack(grid, 0.0, base.pack() * d, masses)
        tr = evolve(st, config)
        rep = scattering_profiles(tr, config.sigma, require_valid=False)
        devs.append(float(rep.distances[0, -1]))
        last = rep
    last.deltas = deltas
    last.deviations = devs
    last.slope = loglog_slope(deltas, devs)
    return last
