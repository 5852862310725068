"""Wiener amalgam norms W(B, C) of grid functions.

The local component B is one of L^p, FL^p, L^(p,q), FL^(p,q): multiply the
function by a translated window, optionally Fourier-transform, and take the
L^p or Lorentz norm.  The global component C (L^q or weak L^(q,inf)) acts on
the lattice of local norms with cell weight lattice_step**dim; the lattice
maximum stands in for the supremum when q = inf.

Window convention: the default window is the plain Gaussian g(x) =
exp(-pi |x|^2) with g(0) = 1 and WITHOUT L^2 normalization, because the
closed-form chirp norm is exact for that window.  Duality-style checks that
need the unit-L^2 convention set ``l2_normalize=True``, a pure rescale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.fft as _fft

from .grid import (
    Grid,
    GridFunction,
    TruncationError,
    fft_workers,
    lp_norm_values,
)
from .lorentz import batch_quasinorm, quasinorm_of

GAUSSIAN_EFFECTIVE_WIDTH = 4.0  # |exp(-pi x^2)| < 4e-6 outside [-2, 2]

_PRUNE_MASS_FRACTION = 1e-24  # squared-mass threshold for skipping a center


def smooth_step(t):
    """C-infinity monotone step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


def bump_profile(u):
    """Smooth even bump: 1 on [-1, 1], 0 outside (-2, 2)."""
    return smooth_step(2.0 - np.abs(np.asarray(u, dtype=float)))


@dataclass(frozen=True)
class WindowSpec:
    """Sliding window for local norms.

    kind "gaussian_unit" is exp(-pi |x|^2); kind "bump" is a tensor product
    of smooth compactly supported bumps equal to 1 on
    [-support_halfwidth/2, support_halfwidth/2] per dimension and vanishing
    beyond support_halfwidth.  ``truncation_tol`` bounds the window mass
    allowed outside the torus.
    """

    kind: str = "gaussian_unit"
    support_halfwidth: Optional[float] = None
    truncation_tol: float = 1e-8
    l2_normalize: bool = False

    def __post_init__(self):
        if self.kind not in ("gaussian_unit", "bump"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.kind == "bump":
            if self.support_halfwidth is None or self.support_halfwidth <= 0:
                raise ValueError("bump window needs a positive support_halfwidth")
            if self.l2_normalize:
                raise ValueError("l2_normalize is only supported for the Gaussian window")

    @property
    def effective_width(self) -> float:
        if self.kind == "gaussian_unit":
            return GAUSSIAN_EFFECTIVE_WIDTH
        return 2.0 * self.support_halfwidth

    def evaluate(self, coords: Sequence[np.ndarray], dim: int) -> np.ndarray:
        if self.kind == "gaussian_unit":
            r2 = sum(x * x for x in coords)
            vals = np.exp(-np.pi * r2)
            if self.l2_normalize:
                vals = vals * 2.0 ** (dim / 4.0)
            return vals
        w = self.support_halfwidth
        vals = None
        for x in coords:
            part = bump_profile(2.0 * x / w)
            vals = part if vals is None else vals * part
        return vals

    def check_truncation(self, grid: Grid) -> None:
        if self.kind == "bump":
            if self.support_halfwidth > grid.extent / 2.0:
                raise TruncationError(
                    "bump window support exceeds half the torus extent"
                )
            return
        frac = grid.dim * math.erfc(math.sqrt(math.pi) * grid.extent / 2.0)
        if frac > self.truncation_tol:
            raise TruncationError(
                f"Gaussian window mass outside the torus ({frac:.3e}) exceeds "
                f"tolerance {self.truncation_tol:.3e}"
            )


@dataclass(frozen=True)
class LocalNormSpec:
    """Local component B: L^p, FL^p, or their Lorentz refinements.

    transform "fourier" measures the windowed Fourier transform; setting
    ``lorentz_q`` switches the sample norm from L^p to the Lorentz
    quasinorm L^(p, lorentz_q).
    """

    transform: str = "fourier"
    p: float = 1.0
    lorentz_q: Optional[float] = None

    def __post_init__(self):
        if self.transform not in ("none", "fourier"):
            raise ValueError(f"unknown transform {self.transform!r}")
        if self.p < 1:
            raise ValueError(f"local exponent p must be >= 1, got {self.p}")
        if self.lorentz_q is not None:
            if not 1.0 < self.p < math.inf:
                raise ValueError("Lorentz local component needs p in (1, inf)")
            if self.lorentz_q < 1:
                raise ValueError("Lorentz exponent q must be >= 1")


@dataclass(frozen=True)
class GlobalNormSpec:
    """Global component C: L^p over the lattice, or weak L^(p,inf)."""

    p: float = math.inf
    weak: bool = False

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"global exponent must be >= 1, got {self.p}")
        if self.weak and not 1.0 < self.p < math.inf:
            raise ValueError("weak global component needs p in (1, inf)")


@dataclass(frozen=True)
class AmalgamSpec:
    """Window + lattice step + local and global components: a computable W(B, C)."""

    window: WindowSpec
    lattice_step: float
    local: LocalNormSpec
    global_: GlobalNormSpec

    def validate_on(self, grid: Grid) -> int:
        """Check lattice/grid/window compatibility; return the step in cells."""
        s = self.lattice_step
        if s <= 0:
            raise ValueError("lattice_step must be positive")
        cells = round(s / grid.spacing)
        if cells < 1 or abs(cells * grid.spacing - s) > 1e-9 * s:
            raise ValueError(
                f"lattice_step {s} is not an integer multiple of grid spacing "
                f"{grid.spacing}"
            )
        if grid.points_per_dim % cells != 0:
            raise ValueError("lattice must tile the torus: step must divide extent")
        if s > self.window.effective_width / 4.0 + 1e-12:
            raise ValueError(
                f"lattice_step {s} exceeds a quarter of the window width "
                f"{self.window.effective_width}"
            )
        self.window.check_truncation(grid)
        return cells


def default_lattice_step(window: WindowSpec, grid: Grid) -> float:
    """min(window width / 4, 8 * grid spacing), snapped to a power-of-two cell count."""
    h = grid.spacing
    target = min(window.effective_width / 4.0, 8.0 * h)
    cells = 1
    while cells * 2 * h <= target and cells * 2 <= grid.points_per_dim:
        cells *= 2
    return cells * h


def make_spec(
    grid: Grid,
    local: LocalNormSpec,
    global_: GlobalNormSpec,
    window: Optional[WindowSpec] = None,
    lattice_step: Optional[float] = None,
) -> AmalgamSpec:
    """AmalgamSpec with the default window and lattice step filled in."""
    window = window or WindowSpec()
    if lattice_step is None:
        lattice_step = default_lattice_step(window, grid)
    return AmalgamSpec(window, lattice_step, local, global_)


def chirp_norm_closed_form(a: float, dim: int) -> float:
    """Exact W(FL^1, L^inf) norm of the unit quadratic chirp: ((1+a^2)/a^4)^(d/4)."""
    return float(((1.0 + a * a) / a ** 4) ** (dim / 4.0))


# ---------------------------------------------------------------------------
# Lattice centers
# ---------------------------------------------------------------------------

def _lattice_cells(grid: Grid, step_cells: int, region: str) -> np.ndarray:
    """Cell indices (n, dim) of lattice centers; region 'full' or 'central_half'."""
    n = grid.points_per_dim
    idx1 = np.arange(0, n, step_cells)
    if region == "central_half":
        x = idx1 * grid.spacing - grid.extent / 2.0
        idx1 = idx1[np.abs(x) <= grid.extent / 4.0 + 1e-12]
    elif region != "full":
        raise ValueError(f"unknown center region {region!r}")
    if grid.dim == 1:
        return idx1[:, None]
    a, b = np.meshgrid(idx1, idx1, indexing="ij")
    return np.stack([a.ravel(), b.ravel()], axis=1)


def _cells_of_positions(grid: Grid, positions: np.ndarray) -> np.ndarray:
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    if pos.shape[1] != grid.dim:
        raise ValueError("center positions must have one coordinate per dimension")
    cells = np.rint((pos + grid.extent / 2.0) / grid.spacing).astype(int)
    back = cells * grid.spacing - grid.extent / 2.0
    if np.max(np.abs(back - pos)) > 1e-9 * max(grid.spacing, 1.0):
        raise ValueError("centers must sit on grid cells")
    return cells % grid.points_per_dim


# ---------------------------------------------------------------------------
# Local norm evaluation (batched over centers)
# ---------------------------------------------------------------------------

def _window_at_origin(window: WindowSpec, grid: Grid) -> np.ndarray:
    return np.broadcast_to(
        window.evaluate(grid.coords(), grid.dim), grid.shape
    ).astype(float)


def _gather_windows(w0: np.ndarray, cells: np.ndarray, grid: Grid) -> np.ndarray:
    """Windows translated to each center cell, stacked along axis 0."""
    n = grid.points_per_dim
    origin = n // 2  # cell index of x = 0, where w0 is centered
    shifts = cells - origin
    if grid.dim == 1:
        idx = (np.arange(n)[None, :] - shifts[:, 0:1]) % n
        return w0[idx]
    i1 = (np.arange(n)[None, :] - shifts[:, 0:1]) % n
    i2 = (np.arange(n)[None, :] - shifts[:, 1:2]) % n
    return w0[i1[:, :, None], i2[:, None, :]]


def _batch_local_norms(
    windowed: np.ndarray, grid: Grid, local: LocalNormSpec
) -> np.ndarray:
    """Local norms of a stack of windowed functions (batch axis first)."""
    axes = tuple(range(1, grid.dim + 1))
    if local.transform == "fourier":
        y = _fft.fftshift(
            _fft.fftn(
                _fft.ifftshift(windowed, axes=axes), axes=axes, workers=fft_workers()
            ),
            axes=axes,
        ) * grid.cell_volume
        cell = grid.dual().cell_volume
    else:
        y = windowed
        cell = grid.cell_volume
    mags = np.abs(y).reshape(y.shape[0], -1)
    if local.lorentz_q is not None:
        return batch_quasinorm(mags, cell, local.p, local.lorentz_q)
    if math.isinf(local.p):
        return mags.max(axis=1)
    if local.p == 2:
        return np.sqrt((mags * mags).sum(axis=1) * cell)
    return ((mags ** local.p).sum(axis=1) * cell) ** (1.0 / local.p)


def _chunk_size(grid: Grid) -> int:
    # keep each windowed batch under ~128 MB of complex samples
    points = grid.points_per_dim ** grid.dim
    return max(1, min(1 << 14, (1 << 23) // points))


def local_norm_profile(
    f: GridFunction, spec: AmalgamSpec, cells: np.ndarray
) -> np.ndarray:
    """Local norms ||f T_x g||_B at the given center cells."""
    grid = f.grid
    w0 = _window_at_origin(spec.window, grid)
    out = np.empty(len(cells), dtype=float)
    step = _chunk_size(grid)
    for lo in range(0, len(cells), step):
        chunk = cells[lo : lo + step]
        windows = _gather_windows(w0, chunk, grid)
        out[lo : lo + step] = _batch_local_norms(windows * f.values[None], grid, spec.local)
    return out


def _active_center_mask(
    f: GridFunction, cells: np.ndarray, halo: float
) -> np.ndarray:
    """Centers whose windowed squared mass could matter.

    Sums |f|^2 over a periodic box of halfwidth ``halo`` around each center
    via prefix sums; centers below a tiny fraction of the total are dropped
    (their local norm is bounded by the square root of that fraction).
    """
    grid = f.grid
    n = grid.points_per_dim
    m2 = np.abs(f.values) ** 2
    total = float(m2.sum())
    if total == 0.0:
        return np.zeros(len(cells), dtype=bool)
    r = min(n // 2, int(math.ceil(halo / grid.spacing)))

    def box_sum_1d(arr, axis):
        tiled = np.concatenate([arr, np.take(arr, range(2 * r + 1), axis=axis)], axis=axis)
        c = np.cumsum(tiled, axis=axis)
        pad = np.zeros_like(np.take(c, range(1), axis=axis))
        c = np.concatenate([pad, c], axis=axis)
        hi = np.take(c, np.arange(2 * r + 1, 2 * r + 1 + n), axis=axis)
        lo = np.take(c, np.arange(n), axis=axis)
        return hi - lo  # windowed sum over [j - r, j + r] centered at j + r... shifted

    # centered periodic box sums: entry j of box_sum_1d covers [j, j + 2r],
    # i.e. the box centered at j + r, so roll forward by r to recenter
    s = m2
    for axis in range(grid.dim):
        s = box_sum_1d(s, axis)
        s = np.roll(s, r, axis=axis)
    if grid.dim == 1:
        mass = s[cells[:, 0]]
    else:
        mass = s[cells[:, 0], cells[:, 1]]
    return mass > _PRUNE_MASS_FRACTION * total


def local_norm(f: GridFunction, center, spec: AmalgamSpec) -> float:
    """||f T_center g||_B for a single window position on the lattice."""
    spec.validate_on(f.grid)
    if np.isscalar(center):
        center = (float(center),) * f.grid.dim
    cells = _cells_of_positions(f.grid, np.asarray(center, dtype=float)[None, :])
    return float(local_norm_profile(f, spec, cells)[0])


def amalgam_norm(
    f: GridFunction,
    spec: AmalgamSpec,
    centers: Union[str, np.ndarray] = "full",
    prune: bool = True,
) -> float:
    """The W(B, C) norm: global norm of the lattice of local norms.

    ``centers`` may be "full" (the whole lattice), "central_half" (positions
    with every coordinate in [-L/4, L/4], for functions whose phase wraps at
    the seam), or an explicit array of center positions.
    """
    grid = f.grid
    step_cells = spec.validate_on(grid)
    if isinstance(centers, str):
        cells = _lattice_cells(grid, step_cells, centers)
    else:
        cells = _cells_of_positions(grid, centers)
    profile = np.zeros(len(cells), dtype=float)
    if prune:
        mask = _active_center_mask(f, cells, spec.window.effective_width)
    else:
        mask = np.ones(len(cells), dtype=bool)
    if mask.any():
        profile[mask] = local_norm_profile(f, spec, cells[mask])
    lattice_cell = spec.lattice_step ** grid.dim
    if spec.global_.weak:
        return quasinorm_of(profile, lattice_cell, spec.global_.p, math.inf)
    return lp_norm_values(profile, lattice_cell, spec.global_.p)


# ---------------------------------------------------------------------------
# Time-direction amalgam norms of scalar trajectories
# ---------------------------------------------------------------------------

def _window_lq_norm(window: WindowSpec, q: float) -> float:
    """Continuum L^q norm of the 1-d window profile."""
    if math.isinf(q):
        return 1.0
    if window.kind == "gaussian_unit":
        base = q ** (-1.0 / (2.0 * q))
        if window.l2_normalize:
            base *= 2.0 ** 0.25
        return base
    w = window.support_halfwidth
    u = np.linspace(0.0, 2.0, 4097)
    return float((2.0 * (w / 2.0) * np.trapezoid(bump_profile(u) ** q, u)) ** (1.0 / q))


def mixed_time_norm(
    times: np.ndarray,
    values: np.ndarray,
    q1: float,
    q2: float,
    time_window: Optional[WindowSpec] = None,
    time_step: Optional[float] = None,
) -> float:
    """W(L^q1, L^q2) norm in time of a sampled nonnegative trajectory.

    The trajectory lives on a uniform grid over a truncation interval and is
    extended by zero outside it.  The window is calibrated to unit L^q1
    norm, so the degenerate case q1 = q2 = q reproduces the plain L^q norm
    of slowly varying trajectories; q1 = q2 = inf returns the exact maximum.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size == 0 or values.size == 0:
        raise ValueError("empty trajectory")
    if times.shape != values.shape:
        raise ValueError("times and values must have equal length")
    if math.isinf(q1) and math.isinf(q2):
        return float(np.abs(values).max())
    if times.size < 2:
        raise ValueError("need at least two samples for an averaged time norm")
    dt = np.diff(times)
    h = float(dt[0])
    if not np.allclose(dt, h, rtol=1e-9, atol=0.0):
        raise ValueError("trajectory times must be uniformly spaced")
    window = time_window or WindowSpec()
    if time_step is None:
        cells = max(1, min(int(round(window.effective_width / 4.0 / h)), 8))
        time_step = cells * h
    else:
        cells = round(time_step / h)
        if cells < 1 or abs(cells * h - time_step) > 1e-9 * time_step:
            raise ValueError("time_step must be an integer multiple of the sampling step")
        if time_step > window.effective_width / 4.0 + 1e-12:
            raise ValueError("time_step exceeds a quarter of the window width")
    centers = times[::cells]
    offsets = times[None, :] - centers[:, None]
    w = window.evaluate((offsets,), 1) / _window_lq_norm(window, q1)
    local_samples = w * np.abs(values)[None, :]
    if math.isinf(q1):
        locals_ = local_samples.max(axis=1)
    else:
        locals_ = ((local_samples ** q1).sum(axis=1) * h) ** (1.0 / q1)
    if math.isinf(q2):
        return float(locals_.max())
    return float(((locals_ ** q2).sum() * time_step) ** (1.0 / q2))


def trajectory_truncation_fraction(times: np.ndarray, values: np.ndarray) -> float:
    """Fraction of trajectory mass (L^1) outside the middle half of the range."""
    times = np.asarray(times, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    total = values.sum()
    if total == 0.0:
        return 0.0
    lo, hi = times.min(), times.max()
    mid, half = (lo + hi) / 2.0, (hi - lo) / 4.0
    outside = (times < mid - half) | (times > mid + half)
    return float(values[outside].sum() / total)


# ---------------------------------------------------------------------------
# Mixed space-time norms
# ---------------------------------------------------------------------------

def mixed_space_time_norm(
    times: np.ndarray,
    states: Sequence[GridFunction],
    time_q1: float,
    time_q2: float,
    space_spec: AmalgamSpec,
    time_window: Optional[WindowSpec] = None,
    time_step: Optional[float] = None,
    order: str = "space_first",
    centers: Union[str, np.ndarray] = "full",
) -> float:
    """W(L^q1, L^q2)_t of the W(B, C)_x norms of a trajectory of states.

    ``order`` selects the reading of the iterated norm: "space_first"
    computes the space norm at each time and then the time amalgam of the
    resulting scalar trajectory; "time_first" windows the trajectory in time
    before measuring space, recomputing every space norm of the weighted
    states.  The two agree (up to rounding): scaling a state scales its
    space norm.
    """
    times = np.asarray(times, dtype=float)
    if order == "space_first":
        traj = np.array([amalgam_norm(u, space_spec, centers=centers) for u in states])
        return mixed_time_norm(times, traj, time_q1, time_q2, time_window, time_step)
    if order != "time_first":
        raise ValueError(f"unknown order {order!r}")
    if times.size < 2:
        raise ValueError("need at least two samples")
    h = float(times[1] - times[0])
    window = time_window or WindowSpec()
    if time_step is None:
        cells = max(1, min(int(round(window.effective_width / 4.0 / h)), 8))
        time_step = cells * h
    else:
        cells = round(time_step / h)
    centers_t = times[::cells]
    locals_ = np.empty(len(centers_t))
    cal = _window_lq_norm(window, time_q1)
    for j, u0 in enumerate(centers_t):
        w = window.evaluate((times - u0,), 1) / cal
        norms = np.array(
            [
                amalgam_norm(
                    GridFunction(s.grid, s.values * w[i]), space_spec, centers=centers
                )
                for i, s in enumerate(states)
            ]
        )
        if math.isinf(time_q1):
            locals_[j] = norms.max()
        else:
            locals_[j] = ((norms ** time_q1).sum() * h) ** (1.0 / time_q1)
    if math.isinf(time_q2):
        return float(locals_.max())
    return float(((locals_ ** time_q2).sum() * time_step) ** (1.0 / time_q2))


def space_time_inner_product(
    times: np.ndarray, F: Sequence[GridFunction], G: Sequence[GridFunction]
) -> complex:
    """L^2_t L^2_x pairing of two trajectories on a common grid and time grid."""
    times = np.asarray(times, dtype=float)
    if len(F) != len(G) or len(F) != times.size:
        raise ValueError("trajectories must share the time grid")
    h = float(times[1] - times[0])
    acc = 0.0 + 0.0j
    for f, g in zip(F, G):
        if f.grid != g.grid:
            raise ValueError("states must share a grid")
        acc += np.vdot(g.values, f.values) * f.grid.cell_volume
    return complex(acc * h)


# ---------------------------------------------------------------------------
# Patch-based local norms for radial data on large 2-d tori
# ---------------------------------------------------------------------------

def radial_local_norms(
    f: GridFunction,
    spec: AmalgamSpec,
    radii: np.ndarray,
    patch_halfwidth: float = 8.0,
) -> np.ndarray:
    """Local norms at centers (rho, 0) using window-sized FFT patches.

    Valid when the window is negligible beyond ``patch_halfwidth``: the
    windowed function is then supported in the patch, and its transform is
    evaluated on the patch's coarser dual grid.  Intended for radial
    band-limited data on tori too large for full-grid transforms.
    """
    grid = f.grid
    if grid.dim != 2:
        raise ValueError("patch-based radial norms are for 2-d grids")
    spec.validate_on(grid)
    h = grid.spacing
    n = grid.points_per_dim
    p_cells = 1
    while p_cells * h < 2.0 * patch_halfwidth:
        p_cells *= 2
    if p_cells > n:
        raise ValueError("patch larger than the grid")
    if p_cells < 8:
        raise ValueError("patch under 8 cells; refine the grid")
    patch_grid = Grid(2, p_cells * h, p_cells)
    offs = (np.arange(p_cells) - p_cells // 2) * h
    wpatch = spec.window.evaluate((offs[:, None], offs[None, :]), 2)

    cells = _cells_of_positions(
        grid, np.stack([np.asarray(radii, dtype=float), np.zeros(len(radii))], axis=1)
    )
    rel = np.arange(p_cells) - p_cells // 2
    out = np.empty(len(cells))
    step = max(1, (1 << 23) // (p_cells * p_cells))
    for lo in range(0, len(cells), step):
        chunk = cells[lo : lo + step]
        i1 = (chunk[:, 0:1] + rel[None, :]) % n
        i2 = (chunk[:, 1:2] + rel[None, :]) % n
        patches = f.values[i1[:, :, None], i2[:, None, :]] * wpatch[None]
        out[lo : lo + step] = _batch_local_norms(patches, patch_grid, spec.local)
    return out


def radial_global_lp(
    profile: np.ndarray, radii: np.ndarray, p: float
) -> float:
    """Global L^p over the plane of a radial profile sampled along a ray.

    Uses annulus weights 2 pi rho drho (a disk of radius drho/2 at the
    origin); for p = inf returns the profile maximum.
    """
    profile = np.asarray(profile, dtype=float)
    radii = np.asarray(radii, dtype=float)
    if math.isinf(p):
        return float(profile.max())
    s = float(radii[1] - radii[0])
    weights = 2.0 * np.pi * radii * s
    if radii[0] == 0.0:
        weights[0] = np.pi * (s / 2.0) ** 2
    return float(((profile ** p) * weights).sum() ** (1.0 / p))
