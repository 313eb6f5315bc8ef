"""Uniform 1-D spatial grids with quadrature, differentiation and the Helmholtz inverse.

Two boundary flavors are supported:

* ``periodic`` -- nodes x_j = -L + j*h, j = 0..N-1 (right endpoint omitted);
  derivatives and (1 - d_xx)^{-1} are computed spectrally via the FFT.
* ``dirichlet_truncated`` -- nodes x_j = -L + j*h, j = 0..N (both endpoints
  kept); derivatives use 4th-order central differences with one-sided stencils
  at the ends. Used for eigenproblems where exponential decay justifies the
  truncation.

Quadrature is the composite trapezoid rule, which is spectrally accurate for
the smooth, exponentially decaying integrands this package deals in.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

PERIODIC = "periodic"
DIRICHLET = "dirichlet_truncated"


class GridError(ValueError):
    """Invalid grid construction or incompatible grid usage."""


@dataclass(frozen=True)
class Grid:
    half_width: float
    points: int
    boundary: str = PERIODIC

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.points

    @cached_property
    def nodes(self) -> np.ndarray:
        # integer offsets times h: x_{-j} = -x_j bitwise, so sampled even/odd
        # functions carry exact parity
        N = self.points
        if self.boundary == PERIODIC:
            return (np.arange(N) - N // 2) * self.h
        return (np.arange(N + 1) - N // 2) * self.h

    @property
    def node_count(self) -> int:
        return self.points if self.boundary == PERIODIC else self.points + 1

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        # rfft bins; k_m = pi*m/L
        if self.boundary != PERIODIC:
            raise GridError("wavenumbers are defined on periodic grids only")
        return 2.0 * np.pi * np.fft.rfftfreq(self.points, d=self.h)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        # 2/3-rule mask on rfft bins
        cut = int(np.floor(self.points / 2 * (2.0 / 3.0)))
        mask = np.ones(self.points // 2 + 1)
        mask[cut:] = 0.0
        return mask

    def ensure_resolves(self, decay_rate: float, tol: float = 1e-6) -> None:
        """Refuse grids too narrow for a profile with tail ~ exp(-decay_rate*|x|)."""
        tail = np.exp(-decay_rate * self.half_width)
        if tail > tol:
            raise GridError(
                f"half_width {self.half_width:g} leaves tail {tail:.2e} > {tol:.1e} "
                f"for decay rate {decay_rate:g}"
            )


def make_grid(L: float, N: int, boundary: str = PERIODIC) -> Grid:
    if L <= 0:
        raise GridError(f"half_width must be positive, got {L!r}")
    if N < 16 or N % 2 != 0:
        raise GridError(f"points must be even and >= 16, got {N!r}")
    if boundary not in (PERIODIC, DIRICHLET):
        raise GridError(f"unknown boundary flavor {boundary!r}")
    return Grid(float(L), int(N), boundary)


@dataclass(frozen=True)
class Field:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.node_count,):
            raise GridError(
                f"field length {v.shape} does not match grid node count "
                f"{self.grid.node_count}"
            )
        if not np.all(np.isfinite(v)):
            raise GridError("field values must be finite")
        object.__setattr__(self, "values", v)

    def _check_same_grid(self, other: "Field") -> None:
        if other.grid is not self.grid and other.grid != self.grid:
            raise GridError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check_same_grid(other)
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check_same_grid(other)
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - other)

    def __mul__(self, other):
        if isinstance(other, Field):
            self._check_same_grid(other)
            return Field(self.grid, self.values * other.values)
        return Field(self.grid, self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)


def field_from_function(grid: Grid, fn) -> Field:
    return Field(grid, fn(grid.nodes))


def quadrature(f: Field) -> float:
    """Composite trapezoid of f over [-L, L]."""
    v, h = f.values, f.grid.h
    if f.grid.boundary == PERIODIC:
        return float(h * np.sum(v))
    return float(h * (np.sum(v) - 0.5 * (v[0] + v[-1])))


def inner(f: Field, g: Field) -> float:
    """L2 pairing <f, g> = integral of f*g."""
    f._check_same_grid(g)
    return quadrature(Field(f.grid, f.values * g.values))


def norm_l2(f: Field) -> float:
    return float(np.sqrt(inner(f, f)))


def norm_h1(f: Field) -> float:
    df = derivative(f, 1)
    return float(np.sqrt(inner(f, f) + inner(df, df)))


def _fd_derivative(v: np.ndarray, h: float, order: int) -> np.ndarray:
    """4th-order central differences, 2nd-order one-sided at the ends."""
    out = np.empty_like(v)
    if order == 1:
        out[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
        out[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
        out[1] = (v[2] - v[0]) / (2 * h)
        out[-2] = (v[-1] - v[-3]) / (2 * h)
        out[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    elif order == 2:
        out[2:-2] = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * h * h)
        out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / (h * h)
        out[1] = (v[0] - 2 * v[1] + v[2]) / (h * h)
        out[-2] = (v[-3] - 2 * v[-2] + v[-1]) / (h * h)
        out[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / (h * h)
    elif order == 3:
        out[3:-3] = (v[:-6] - 8 * v[1:-5] + 13 * v[2:-4]
                     - 13 * v[4:-2] + 8 * v[5:-1] - v[6:]) / (8 * h ** 3)
        # 1st-order one-sided stencils at the six edge points
        for i in (0, 1, 2):
            out[i] = (-v[i] + 3 * v[i + 1] - 3 * v[i + 2] + v[i + 3]) / h ** 3
        for i in (-3, -2, -1):
            out[i] = (v[i] - 3 * v[i - 1] + 3 * v[i - 2] - v[i - 3]) / h ** 3
    else:
        raise GridError(f"derivative order must be 1, 2 or 3, got {order!r}")
    return out


def derivative(f: Field, order: int = 1) -> Field:
    if order not in (1, 2, 3):
        raise GridError(f"derivative order must be 1, 2 or 3, got {order!r}")
    g = f.grid
    if g.boundary == PERIODIC:
        k = g.wavenumbers
        sym = (1j * k) ** order
        if order % 2 == 1:
            sym[-1] = 0.0  # the Nyquist sine is not representable
        out = np.fft.irfft(sym * np.fft.rfft(f.values), n=g.points)
        return Field(g, out)
    return Field(g, _fd_derivative(f.values, g.h, order))


def helmholtz_inverse(f: Field) -> Field:
    """g with g - g'' = f, via division by (1 + k^2) in transform space."""
    g = f.grid
    if g.boundary != PERIODIC:
        raise GridError("helmholtz_inverse requires a periodic grid")
    k = g.wavenumbers
    out = np.fft.irfft(np.fft.rfft(f.values) / (1.0 + k * k), n=g.points)
    return Field(g, out)


def translate(f: Field, y: float) -> Field:
    """f(. + y) on a periodic grid (FFT phase shift; y need not be a grid multiple)."""
    g = f.grid
    if g.boundary != PERIODIC:
        raise GridError("translate requires a periodic grid")
    k = g.wavenumbers
    shift = np.exp(1j * k * y)
    shift[-1] = np.cos(k[-1] * y)  # Nyquist carries only its cosine part
    out = np.fft.irfft(np.fft.rfft(f.values) * shift, n=g.points)
    return Field(g, out)
