"""Periodic lattices in space and space-time.

The spatial torus is ``[0, L)^2`` sampled at ``n x n`` points.  Frequencies
follow the numpy DFT ordering, so the wavenumber index ``a`` covers
``[-n/2, n/2)`` and ``xi = 2 pi a / L``.  Arrays are indexed ``[x1, x2]``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GridError(ValueError):
    """Raised for invalid grid parameters or mismatched grids."""


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Uniform periodic grid on ``[0, L)^2``.

    Parameters
    ----------
    n : int
        Points per axis. Even, at least 8.
    length : float
        Period ``L`` of the torus.
    """
    n: int
    length: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 8 or self.n % 2:
            raise GridError(f"n must be an even integer >= 8, got {self.n!r}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise GridError(f"L must be positive and finite, got {self.length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    def __eq__(self, other):
        return (isinstance(other, SpatialGrid) and self.n == other.n
                and self.length == other.length)

    def __hash__(self):
        return hash((self.n, self.length))

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def dx(self):
        return self.length / self.n

    @property
    def dxi(self):
        return 2 * np.pi / self.length

    @property
    def nyquist(self):
        """Largest representable ``|xi_i|``, equal to ``pi n / L``."""
        return np.pi * self.n / self.length

    @cached_property
    def freqs(self):
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @cached_property
    def xi1(self):
        return np.broadcast_to(self.freqs[:, None], self.shape)

    @cached_property
    def xi2(self):
        return np.broadcast_to(self.freqs[None, :], self.shape)

    @cached_property
    def xi(self):
        """Wavevectors as an ``(n, n, 2)`` array."""
        return np.stack([self.xi1, self.xi2], axis=-1)

    @cached_property
    def abs_xi(self):
        return np.hypot(self.xi1, self.xi2)

    @cached_property
    def angle(self):
        """Polar angle of each wavevector in ``[0, 2 pi)``; 0 at the origin."""
        return np.mod(np.arctan2(self.xi2, self.xi1), 2 * np.pi)

    @cached_property
    def x(self):
        return np.arange(self.n) * self.dx

    @cached_property
    def x1(self):
        return np.broadcast_to(self.x[:, None], self.shape)

    @cached_property
    def x2(self):
        return np.broadcast_to(self.x[None, :], self.shape)

    @cached_property
    def dealias_mask(self):
        """Two-thirds rule: keep integer wavenumbers with ``|a_i| <= n/3``."""
        a = np.fft.fftfreq(self.n, d=1.0 / self.n)
        keep = np.abs(a) <= self.n // 3
        return keep[:, None] & keep[None, :]

    @property
    def max_shell(self):
        """Largest ``k`` whose shell ``2^(k-1) < |xi| < 2^(k+1)`` is fully resolved."""
        return int(np.floor(np.log2(self.nyquist))) - 1

    def weight(self, mass):
        """Japanese bracket ``<xi>_mass`` on the lattice."""
        return np.sqrt(mass * mass + self.abs_xi ** 2)


@dataclass(frozen=True, eq=False)
class SpaceTimeGrid:
    """Periodic space-time lattice with ``nt`` time samples of spacing ``dt``.

    The time axis is treated as periodic with period ``T = nt dt``, and the
    dual variable ``tau`` uses the DFT ordering like the spatial frequencies.
    """
    spatial: SpatialGrid
    nt: int
    dt: float

    def __post_init__(self):
        if not isinstance(self.spatial, SpatialGrid):
            raise GridError("spatial must be a SpatialGrid")
        if not isinstance(self.nt, (int, np.integer)) or self.nt < 2:
            raise GridError(f"nt must be an integer >= 2, got {self.nt!r}")
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise GridError(f"dt must be positive and finite, got {self.dt!r}")
        object.__setattr__(self, "nt", int(self.nt))
        object.__setattr__(self, "dt", float(self.dt))

    def __eq__(self, other):
        return (isinstance(other, SpaceTimeGrid) and self.spatial == other.spatial
                and self.nt == other.nt and self.dt == other.dt)

    def __hash__(self):
        return hash((self.spatial, self.nt, self.dt))

    @property
    def n(self):
        return self.spatial.n

    @property
    def period(self):
        return self.nt * self.dt

    @property
    def dtau(self):
        return 2 * np.pi / self.period

    @property
    def tau_nyquist(self):
        return np.pi / self.dt

    @cached_property
    def tau(self):
        return 2 * np.pi * np.fft.fftfreq(self.nt, d=self.dt)

    @cached_property
    def times(self):
        return np.arange(self.nt) * self.dt

    def modulation(self, sign, mass):
        """``tau + sign <xi>_mass`` on the full ``(nt, n, n)`` lattice."""
        return self.tau[:, None, None] + sign * self.spatial.weight(mass)[None]

    def modulation_range(self):
        """Dyadic modulation indices that the lattice resolves.

        Returns ``(j_lo, j_hi)``.  Band ``j`` lives on ``2^(j-1) < |y| < 2^(j+1)``;
        below ``j_lo`` the band is narrower than the ``tau`` spacing and above
        ``j_hi`` it lies beyond the largest modulation on the lattice.
        """
        j_lo = int(np.ceil(np.log2(self.dtau))) - 1
        ymax = self.tau_nyquist + self.spatial.weight(0.0).max() + 1.0
        j_hi = int(np.ceil(np.log2(ymax))) + 1
        return j_lo, j_hi


def make_grid(n, L):
    """Build a :class:`SpatialGrid`; ``n`` must be a power of two >= 8."""
    if not isinstance(n, (int, np.integer)) or not _is_pow2(int(n)) or n < 8:
        raise GridError(f"n must be a power of two >= 8, got {n!r}")
    return SpatialGrid(int(n), L)


def make_spacetime_grid(n, L, nt, dt):
    """Build an analysis :class:`SpaceTimeGrid`; ``nt`` must be a power of two >= 16."""
    if not isinstance(nt, (int, np.integer)) or not _is_pow2(int(nt)) or nt < 16:
        raise GridError(f"nt must be a power of two >= 16, got {nt!r}")
    return SpaceTimeGrid(make_grid(n, L), int(nt), dt)
