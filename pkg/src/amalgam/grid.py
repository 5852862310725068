"""Uniform periodic grids and sampled functions.

Everything lives on the torus [-L/2, L/2)^d, d in {1, 2}, sampled on N
equispaced nodes per dimension (N a power of two).  The Fourier transform
uses the continuous normalization

    FT(f)(w) = integral f(x) exp(-2 pi i x w) dx,

approximated by the Riemann sum on the grid, so that closed-form transform
identities (Gaussian self-duality, chirp transforms) hold verbatim up to
truncation and rounding.  Frequencies are centered: w = k/L for
k = -N/2, ..., N/2 - 1 per dimension.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.fft as _fft


class AliasingError(ValueError):
    """Grid resolution cannot represent the requested oscillation."""


class TruncationError(ValueError):
    """Too much mass falls outside the computational torus."""


def fft_workers() -> int:
    """Worker count for batched FFTs; AMALGAM_THREADS overrides cpu count."""
    env = os.environ.get("AMALGAM_THREADS")
    if env is not None:
        n = int(env)
        if n < 1:
            raise ValueError(f"AMALGAM_THREADS must be >= 1, got {env}")
        return n
    return os.cpu_count() or 1


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-extent/2, extent/2)^dim.

    Attributes:
        dim: spatial dimension, 1 or 2.
        extent: side length L of the torus.
        points_per_dim: N, a power of two >= 8.
    """

    dim: int
    extent: float
    points_per_dim: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not self.extent > 0:
            raise ValueError(f"extent must be positive, got {self.extent}")
        n = self.points_per_dim
        if not (isinstance(n, (int, np.integer)) and n >= 8 and _is_power_of_two(int(n))):
            raise ValueError(f"points_per_dim must be a power of two >= 8, got {n}")
        object.__setattr__(self, "points_per_dim", int(n))
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def spacing(self) -> float:
        return self.extent / self.points_per_dim

    @property
    def freq_spacing(self) -> float:
        return 1.0 / self.extent

    @property
    def shape(self) -> tuple:
        return (self.points_per_dim,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    def axis(self, offset: bool = False) -> np.ndarray:
        """Node coordinates along one dimension.

        With ``offset=True`` nodes sit at cell midpoints, so 0 is never a
        sample point (needed for functions singular at the origin).
        """
        n = self.points_per_dim
        j = np.arange(n, dtype=float)
        if offset:
            j = j + 0.5
        return j * self.spacing - self.extent / 2.0

    def coords(self, offset: bool = False) -> tuple:
        """Coordinate arrays broadcastable to ``shape``, one per dimension."""
        ax = self.axis(offset=offset)
        if self.dim == 1:
            return (ax,)
        return (ax[:, None], ax[None, :])

    def freq_axis(self) -> np.ndarray:
        """Centered frequency nodes k/L, k = -N/2 .. N/2-1."""
        n = self.points_per_dim
        return (np.arange(n, dtype=float) - n // 2) * self.freq_spacing

    def dual(self) -> "Grid":
        """The frequency-side grid: extent N/L, same point count."""
        return Grid(self.dim, self.points_per_dim / self.extent, self.points_per_dim)


def make_grid(dim: int, extent: float, points_per_dim: int) -> Grid:
    """Construct a grid, validating dimension, extent, and power-of-two N."""
    return Grid(dim, extent, points_per_dim)


@dataclass(frozen=True)
class GridFunction:
    """Complex samples of a function on a grid.

    Values are stored in row-major node order, shape ``grid.shape``, and are
    immutable after construction.  All entries must be finite.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            if v.size == self.grid.points_per_dim ** self.grid.dim:
                v = v.reshape(self.grid.shape)
            else:
                raise ValueError(
                    f"values shape {v.shape} incompatible with grid shape {self.grid.shape}"
                )
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ValueError("grid function contains non-finite samples")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


# ---------------------------------------------------------------------------
# Analytic reference functions
# ---------------------------------------------------------------------------

def _sqrt_positive_real(c: complex) -> complex:
    """Square root with positive real part (valid for Re c >= 0, c != 0)."""
    r = complex(np.sqrt(complex(c)))
    if r.real < 0:
        r = -r
    return r


@dataclass(frozen=True)
class Gaussian:
    """x -> exp(-pi |x|^2 / c) with Re c >= 0, c != 0."""

    c: complex

    def __post_init__(self):
        c = complex(self.c)
        if c == 0 or c.real < 0:
            raise ValueError(f"Gaussian width must have Re c >= 0 and c != 0, got {c}")
        object.__setattr__(self, "c", c)

    def __call__(self, r2: np.ndarray, dim: int) -> np.ndarray:
        return np.exp(-np.pi * r2 / self.c)


@dataclass(frozen=True)
class QuadraticChirp:
    """x -> (a i)^(-d/2) exp(-pi |x|^2 / (a i)), a real nonzero.

    Constant modulus (a^2)^(-d/4); the root of (a i) is taken with positive
    real part.
    """

    a: float

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("chirp parameter must be nonzero")
        object.__setattr__(self, "a", float(self.a))

    def __call__(self, r2: np.ndarray, dim: int) -> np.ndarray:
        ai = 1j * self.a
        amp = _sqrt_positive_real(ai) ** (-dim)
        return amp * np.exp(-np.pi * r2 / ai)


@dataclass(frozen=True)
class PowerTail:
    """t -> |t|^(-alpha) + |t|^(-2 alpha), alpha in (0, 1/2); singular at 0.

    Only sampled on grids whose nodes stay away from the origin (offset
    sampling).
    """

    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 1/2), got {self.alpha}")

    def __call__(self, r2: np.ndarray, dim: int) -> np.ndarray:
        r = np.sqrt(r2)
        return r ** (-self.alpha) + r ** (-2.0 * self.alpha)


@dataclass(frozen=True)
class BoxIndicator:
    """Indicator of an axis-aligned box given by (lo, hi) per dimension."""

    bounds: tuple

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        for lo, hi in b:
            if not lo < hi:
                raise ValueError(f"degenerate box side ({lo}, {hi})")
        object.__setattr__(self, "bounds", b)

    def evaluate_on(self, coords: tuple) -> np.ndarray:
        if len(coords) != len(self.bounds):
            raise ValueError("box dimension does not match grid dimension")
        inside = None
        for x, (lo, hi) in zip(coords, self.bounds):
            cond = (x >= lo) & (x < hi)
            inside = cond if inside is None else (inside & cond)
        return inside.astype(np.complex128)


@dataclass(frozen=True)
class EvolvedGaussian:
    """Closed-form free evolution of Gaussian(c) at time t.

    x -> (c / (c + 4 pi i t))^(d/2) exp(-pi |x|^2 / (c + 4 pi i t)),
    with each square root taken with positive real part.  Requires Re c > 0.
    """

    c: complex
    t: float

    def __post_init__(self):
        c = complex(self.c)
        if not c.real > 0:
            raise ValueError(f"evolved Gaussian requires Re c > 0, got {c}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "t", float(self.t))

    def __call__(self, r2: np.ndarray, dim: int) -> np.ndarray:
        ct = self.c + 4j * np.pi * self.t
        amp = (_sqrt_positive_real(self.c) / _sqrt_positive_real(ct)) ** dim
        return amp * np.exp(-np.pi * r2 / ct)


AnalyticFunction = Union[Gaussian, QuadraticChirp, PowerTail, BoxIndicator, EvolvedGaussian]


def sample(
    f: AnalyticFunction,
    grid: Grid,
    offset: bool = False,
    origin: Union[float, Sequence[float]] = 0.0,
) -> GridFunction:
    """Evaluate an analytic function at the grid nodes.

    ``origin`` shifts the evaluation points: the node with grid coordinate x
    is evaluated at origin + x.  Singular kinds (PowerTail) reject grids
    whose evaluation points come within half a cell of their singularity.
    """
    coords = grid.coords(offset=offset)
    if np.isscalar(origin):
        origin = (float(origin),) * grid.dim
    if len(origin) != grid.dim:
        raise ValueError("origin dimension does not match grid dimension")
    shifted = tuple(x + o for x, o in zip(coords, origin))

    if isinstance(f, BoxIndicator):
        vals = np.broadcast_to(f.evaluate_on(shifted), grid.shape).copy()
        return GridFunction(grid, vals)

    r2 = sum(x * x for x in shifted)
    if isinstance(f, PowerTail):
        if np.min(r2) < (grid.spacing / 2.0) ** 2:
            raise ValueError(
                "power-tail samples come within half a cell of the singularity; "
                "use an offset grid or shift the origin"
            )
    vals = np.broadcast_to(f(r2, grid.dim), grid.shape).copy()
    if not np.all(np.isfinite(vals.view(np.float64))):
        raise ValueError("sampling produced non-finite values")
    return GridFunction(grid, vals)


# ---------------------------------------------------------------------------
# Fourier transform with continuous normalization
# ---------------------------------------------------------------------------

def fourier_transform(f: GridFunction) -> GridFunction:
    """Samples of FT(f)(w) = integral f(x) exp(-2 pi i x w) dx on the dual grid.

    Exact as a map between the grid and its dual up to rounding:
    ``inverse_fourier_transform`` undoes it.
    """
    g = f.grid
    v = _fft.fftshift(
        _fft.fftn(_fft.ifftshift(f.values), workers=fft_workers())
    ) * g.cell_volume
    return GridFunction(g.dual(), v)


def inverse_fourier_transform(f: GridFunction) -> GridFunction:
    """Inverse of :func:`fourier_transform`; input lives on a frequency grid."""
    g = f.grid
    v = _fft.fftshift(
        _fft.ifftn(_fft.ifftshift(f.values), workers=fft_workers())
    ) * (g.extent ** g.dim)
    return GridFunction(g.dual(), v)


# ---------------------------------------------------------------------------
# Elementary norms and operators
# ---------------------------------------------------------------------------

def lp_norm_values(values: np.ndarray, cell_volume: float, p: float) -> float:
    """Riemann-sum L^p norm of a sample array with the given cell volume."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p == 1:
        return float(a.sum() * cell_volume)
    if p == 2:
        return float(math.sqrt((a * a).sum() * cell_volume))
    return float(((a ** p).sum() * cell_volume) ** (1.0 / p))


def lp_norm(f: GridFunction, p: float) -> float:
    """L^p norm of a grid function (max of |samples| for p = inf)."""
    return lp_norm_values(f.values, f.grid.cell_volume, p)


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    """Discrete pairing sum f conj(g) * cell volume; requires a common grid."""
    if f.grid != g.grid:
        raise ValueError("inner product requires functions on the same grid")
    return complex(np.vdot(g.values, f.values) * f.grid.cell_volume)


def translate(f: GridFunction, shift) -> GridFunction:
    """Periodic shift by whole grid cells: result(x) = f(x - shift*spacing)."""
    if np.isscalar(shift):
        shift = (int(shift),) * f.grid.dim
    shift = tuple(int(s) for s in shift)
    if len(shift) != f.grid.dim:
        raise ValueError("shift dimension does not match grid dimension")
    return GridFunction(f.grid, np.roll(f.values, shift, axis=tuple(range(f.grid.dim))))


def modulate(f: GridFunction, freq_index) -> GridFunction:
    """Multiply by exp(2 pi i w x) with w = freq_index / extent per dimension."""
    if np.isscalar(freq_index):
        freq_index = (int(freq_index),) * f.grid.dim
    freq_index = tuple(int(k) for k in freq_index)
    if len(freq_index) != f.grid.dim:
        raise ValueError("frequency index dimension does not match grid")
    coords = f.grid.coords()
    phase = sum(
        k * f.grid.freq_spacing * x for k, x in zip(freq_index, coords)
    )
    vals = f.values * np.exp(2j * np.pi * phase)
    return GridFunction(f.grid, np.broadcast_to(vals, f.grid.shape).copy())


def scalar_multiply(f: GridFunction, c: complex) -> GridFunction:
    return GridFunction(f.grid, f.values * c)


def add(f: GridFunction, g: GridFunction) -> GridFunction:
    if f.grid != g.grid:
        raise ValueError("cannot add functions on different grids")
    return GridFunction(f.grid, f.values + g.values)


def pointwise_multiply(f: GridFunction, g: GridFunction) -> GridFunction:
    if f.grid != g.grid:
        raise ValueError("cannot multiply functions on different grids")
    return GridFunction(f.grid, f.values * g.values)


# ---------------------------------------------------------------------------
# Sampling adequacy checks
# ---------------------------------------------------------------------------

def check_chirp_resolution(grid: Grid, a: float) -> None:
    """Reject chirp sampling that aliases at the domain edge.

    The instantaneous frequency of exp(i pi |x|^2 / a) at |x| = L/2 is
    L/(2|a|) cycles per unit, so Nyquist demands N/L >= L/|a|, i.e.
    N >= L^2/|a|.
    """
    need = grid.extent ** 2 / abs(a)
    if grid.points_per_dim < need:
        raise AliasingError(
            f"chirp with a={a} needs at least {math.ceil(need)} points per "
            f"dimension on extent {grid.extent}, got {grid.points_per_dim}"
        )


def central_mass_fraction(f: GridFunction) -> float:
    """Fraction of squared mass outside the central half of the torus."""
    coords = f.grid.coords()
    outside = None
    for x in coords:
        cond = np.abs(x) > f.grid.extent / 4.0
        outside = cond if outside is None else (outside | cond)
    m2 = np.abs(f.values) ** 2
    total = float(m2.sum())
    if total == 0.0:
        return 0.0
    return float(m2[np.broadcast_to(outside, f.grid.shape)].sum() / total)
