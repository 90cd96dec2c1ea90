"""Scalar and spinor fields on the periodic grid and their transforms.

Transform convention: ``fhat = dx^2 * fft2(f)`` and ``f = ifft2(fhat) / dx^2``,
so Parseval reads ``sum |f|^2 dx^2 = sum |fhat|^2 / L^2``.  On space-time
lattices the time axis picks up a factor ``dt`` the same way.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .grid import GridError, SpaceTimeGrid, SpatialGrid

PHYSICAL = "physical"
FREQUENCY = "frequency"

_AX2 = (-2, -1)


class FieldError(ValueError):
    """Raised for malformed field data or representation mismatches."""


def fft2(a):
    return sfft.fft2(a, axes=_AX2)


def ifft2(a):
    return sfft.ifft2(a, axes=_AX2)


@dataclass(frozen=True)
class MassPair:
    """Dirac mass ``M`` and Klein-Gordon mass ``m``."""
    M: float = 1.0
    m: float = 1.0

    def __post_init__(self):
        for name in ("M", "m"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    @property
    def nonresonant(self):
        """True when ``0 < m < 2M``, the regime with no exact resonance."""
        return 0 < self.m < 2 * self.M


class Field:
    """Base class for complex fields on a :class:`SpatialGrid`.

    Instances are immutable: ``data`` is a read-only copy.
    """
    ncomp = None

    def __init__(self, grid, data, rep=PHYSICAL):
        if not isinstance(grid, SpatialGrid):
            raise FieldError("grid must be a SpatialGrid")
        if rep not in (PHYSICAL, FREQUENCY):
            raise FieldError(f"unknown representation {rep!r}")
        data = np.array(data, dtype=np.complex128, copy=True)
        want = grid.shape if self.ncomp is None else (self.ncomp,) + grid.shape
        if data.shape != want:
            raise FieldError(f"expected data of shape {want}, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise FieldError("field data must be finite")
        data.setflags(write=False)
        self._grid = grid
        self._data = data
        self._rep = rep

    grid = property(lambda self: self._grid)
    data = property(lambda self: self._data)
    rep = property(lambda self: self._rep)

    @property
    def kind(self):
        return "scalar" if self.ncomp is None else "spinor"

    def replace(self, data, rep=None):
        return type(self)(self.grid, data, self.rep if rep is None else rep)

    def physical(self):
        return self if self.rep == PHYSICAL else inverse_transform(self)

    def frequency(self):
        return self if self.rep == FREQUENCY else forward_transform(self)

    def _check(self, other):
        if type(other) is not type(self):
            raise FieldError("field kinds differ")
        if other.grid != self.grid:
            raise GridError("grids differ")
        if other.rep != self.rep:
            raise FieldError("representations differ")

    def __add__(self, other):
        self._check(other)
        return self.replace(self.data + other.data)

    def __sub__(self, other):
        self._check(other)
        return self.replace(self.data - other.data)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return self.replace(self.data * c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"{type(self).__name__}(n={self.grid.n}, L={self.grid.length}, rep={self.rep!r})"


class ScalarField(Field):
    """Complex scalar field with data of shape ``(n, n)``."""
    ncomp = None


class SpinorField(Field):
    """Two-component spinor field with data of shape ``(2, n, n)``."""
    ncomp = 2


def forward_transform(field):
    """Physical to frequency representation."""
    if field.rep != PHYSICAL:
        raise FieldError("forward_transform expects a physical-space field")
    return field.replace(fft2(field.data) * field.grid.dx ** 2, FREQUENCY)


def inverse_transform(field):
    """Frequency to physical representation."""
    if field.rep != FREQUENCY:
        raise FieldError("inverse_transform expects a frequency-space field")
    return field.replace(ifft2(field.data) / field.grid.dx ** 2, PHYSICAL)


def _symbol_on_grid(grid, symbol, trailing=()):
    vals = symbol(grid.xi1, grid.xi2) if callable(symbol) else symbol
    vals = np.asarray(vals)
    want = grid.shape + trailing
    if vals.shape != want:
        try:
            vals = np.broadcast_to(vals, want)
        except ValueError:
            raise FieldError(f"symbol has shape {vals.shape}, expected {want}") from None
    if not np.all(np.isfinite(vals)):
        raise FieldError("symbol is not finite on the lattice")
    return vals


def apply_scalar_multiplier(field, symbol):
    """Apply a Fourier multiplier ``m(xi)`` to a scalar or spinor field.

    Parameters
    ----------
    field : Field
    symbol : callable or ndarray
        ``symbol(xi1, xi2)`` evaluated on the lattice, or its ``(n, n)`` values.

    Returns
    -------
    Field
        Same kind and representation as the input.
    """
    m = _symbol_on_grid(field.grid, symbol)
    f = field.frequency()
    out = f.replace(f.data * m)
    return out if field.rep == FREQUENCY else inverse_transform(out)


def apply_matrix_multiplier(field, symbol):
    """Apply a ``2x2`` matrix symbol to a spinor field.

    ``symbol(xi1, xi2)`` must return an array of shape ``(n, n, 2, 2)``.
    """
    if not isinstance(field, SpinorField):
        raise FieldError("matrix multipliers act on spinor fields")
    m = _symbol_on_grid(field.grid, symbol, (2, 2))
    f = field.frequency()
    out = f.replace(np.einsum("xyab,bxy->axy", m, f.data))
    return out if field.rep == FREQUENCY else inverse_transform(out)


def sobolev_weights(grid, s):
    return (1.0 + grid.abs_xi ** 2) ** (s / 2)


def sobolev_norm(field, s):
    """``H^s`` norm ``(sum <xi>^(2s) |fhat|^2 / L^2)^(1/2)``."""
    fh = field.frequency().data
    w = sobolev_weights(field.grid, s) ** 2
    tot = np.sum(w * np.abs(fh) ** 2, axis=_AX2)
    return float(np.sqrt(np.sum(tot)) / field.grid.length)


def l2_norm(field):
    return sobolev_norm(field, 0.0)


def random_sobolev_field(grid, kind="spinor", norm=1.0, s=0.5, seed=0,
                         decay=None, real=False, band_mask=None, envelope=None):
    """Random field with prescribed ``H^s`` norm.

    Fourier coefficients are complex Gaussians damped by ``<xi>^(-decay)``
    (default ``s + 1.5``, so the draw is smoother than ``H^s`` requires)
    and then rescaled to hit ``norm`` exactly.

    Parameters
    ----------
    grid : SpatialGrid
    kind : {'scalar', 'spinor'}
    norm : float
        Target ``H^s`` norm.
    s : float
    seed : int or numpy.random.Generator
    decay : float, optional
    real : bool
        Take the real part in physical space (scalar fields).
    band_mask : ndarray of bool, optional
        Lattice frequencies allowed to be nonzero, e.g. the dealiasing mask.
    envelope : ndarray, optional
        Physical-space factor applied before band limiting.

    Returns
    -------
    ScalarField or SpinorField
        Physical-space field.
    """
    if kind not in ("scalar", "spinor"):
        raise FieldError(f"kind must be 'scalar' or 'spinor', got {kind!r}")
    rng = np.random.default_rng(seed)
    decay = s + 1.5 if decay is None else decay
    shape = grid.shape if kind == "scalar" else (2,) + grid.shape
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    c = c * (1.0 + grid.abs_xi ** 2) ** (-decay / 2)
    f = ifft2(c)
    if real:
        f = f.real.astype(np.complex128)
    if envelope is not None:
        f = f * envelope
    if band_mask is not None:
        f = ifft2(fft2(f) * band_mask)
        if real:
            f = f.real.astype(np.complex128)
    cls = ScalarField if kind == "scalar" else SpinorField
    out = cls(grid, f)
    cur = sobolev_norm(out, s)
    if cur == 0:
        raise FieldError("random draw vanished; check band_mask")
    return out.replace(out.data * (norm / cur))


class Trajectory:
    """Time series of a scalar or spinor field on a :class:`SpaceTimeGrid`.

    Parameters
    ----------
    grid : SpaceTimeGrid
    data : ndarray
        Physical samples, shape ``(nt, n, n)`` or ``(nt, 2, n, n)``.
    t0 : float
        Time of the first sample.
    """

    def __init__(self, grid, data, t0=0.0):
        if not isinstance(grid, SpaceTimeGrid):
            raise FieldError("grid must be a SpaceTimeGrid")
        data = np.array(data, dtype=np.complex128, copy=True)
        sp = grid.spatial.shape
        if data.shape == (grid.nt,) + sp:
            kind = "scalar"
        elif data.shape == (grid.nt, 2) + sp:
            kind = "spinor"
        else:
            raise FieldError(f"trajectory data shape {data.shape} does not match grid")
        if not np.all(np.isfinite(data)):
            raise FieldError("trajectory data must be finite")
        data.setflags(write=False)
        self.grid = grid
        self.data = data
        self.kind = kind
        self.t0 = float(t0)

    @classmethod
    def from_spectrum(cls, grid, cube, t0=0.0):
        """Build from a space-time spectrum ``fhat(tau, xi)``."""
        return cls(grid, spacetime_inverse(grid, cube), t0)

    @property
    def times(self):
        return self.t0 + self.grid.times

    @cached_property
    def spectrum(self):
        """Unwindowed space-time spectrum, same layout as ``data``."""
        return spacetime_forward(self.grid, self.data)

    def snapshot(self, i):
        cls = ScalarField if self.kind == "scalar" else SpinorField
        return cls(self.grid.spatial, self.data[i])

    def replace(self, data):
        return Trajectory(self.grid, data, self.t0)

    def __repr__(self):
        g = self.grid
        return f"Trajectory({self.kind}, n={g.n}, nt={g.nt}, dt={g.dt})"


def _st_axes(a):
    return (0,) + tuple(range(a.ndim - 2, a.ndim))


def spacetime_forward(grid, data):
    """``dt dx^2 fftn`` over the time and spatial axes."""
    data = np.asarray(data)
    return sfft.fftn(data, axes=_st_axes(data)) * (grid.dt * grid.spatial.dx ** 2)


def spacetime_inverse(grid, cube):
    cube = np.asarray(cube)
    return sfft.ifftn(cube, axes=_st_axes(cube)) / (grid.dt * grid.spatial.dx ** 2)


def spacetime_l2(grid, cube):
    """``L^2_{t,x}`` norm computed from a spectrum via Parseval."""
    return float(np.sqrt(np.sum(np.abs(cube) ** 2)) / np.sqrt(grid.period * grid.spatial.length ** 2))


def free_wave(grid, amplitude, sign, mass, t0=0.0):
    """Trajectory ``exp(-i sign t <D>_mass) f`` sampled on ``grid``.

    ``amplitude`` is the spatial spectrum at ``t = t0`` (scalar or spinor layout).
    """
    amplitude = np.asarray(amplitude, dtype=np.complex128)
    w = grid.spatial.weight(mass)
    ph = np.exp(-1j * sign * grid.times[:, None, None] * w[None])
    if amplitude.ndim == 3:
        ph = ph[:, None]
    return Trajectory(grid, ifft2(ph * amplitude[None]) / grid.spatial.dx ** 2, t0)
