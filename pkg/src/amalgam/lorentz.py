"""Distribution functions, decreasing rearrangements, and Lorentz quasinorms.

The rearrangement of a sampled function is an exact step function: each
sample carries measure ``spacing**dim``.  Lorentz integrals are evaluated in
closed form over the steps, so the only error in a quasinorm is rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction


@dataclass(frozen=True)
class StepRearrangement:
    """Decreasing rearrangement as a right-continuous step function.

    ``levels[i]`` is the value taken on the measure interval
    [breakpoints[i], breakpoints[i+1]); levels are strictly decreasing and
    positive (equal samples are merged, zeros dropped), breakpoints start
    at 0 and end at the total measure of the support.
    """

    breakpoints: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.levels, dtype=float)
        if b.ndim != 1 or v.ndim != 1 or b.size != v.size + 1:
            raise ValueError("need one more breakpoint than levels")
        if b.size and (b[0] != 0.0 or np.any(np.diff(b) <= 0)):
            raise ValueError("breakpoints must start at 0 and increase strictly")
        if np.any(v < 0) or np.any(np.diff(v) >= 0):
            raise ValueError("levels must be positive and strictly decreasing")
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "levels", v)

    @property
    def total_measure(self) -> float:
        return float(self.breakpoints[-1]) if self.levels.size else 0.0

    def lp_norm(self, p: float) -> float:
        """L^p norm of the step function; equals the sample L^p norm exactly."""
        if self.levels.size == 0:
            return 0.0
        if math.isinf(p):
            return float(self.levels[0])
        widths = np.diff(self.breakpoints)
        return float(((self.levels ** p) * widths).sum() ** (1.0 / p))

    def quasinorm(self, p: float, q: float) -> float:
        """Lorentz quasinorm ((q/p) int [t^(1/p) f*(t)]^q dt/t)^(1/q).

        The power integral over each step is evaluated in closed form; for
        q = inf this is sup t^(1/p) f*(t).
        """
        if self.levels.size == 0:
            return 0.0
        t = self.breakpoints
        if math.isinf(q):
            return float((self.levels * t[1:] ** (1.0 / p)).max())
        w = t ** (q / p)
        return float(((self.levels ** q) * np.diff(w)).sum() ** (1.0 / q))


def _support_values(values: np.ndarray) -> np.ndarray:
    a = np.abs(np.asarray(values)).ravel()
    return a[a > 0.0]


def distribution_function(f: GridFunction, s: float) -> float:
    """Measure of the level set {|f| > s}: cell volume times sample count."""
    if s < 0:
        raise ValueError(f"level must be nonnegative, got {s}")
    return float(np.count_nonzero(np.abs(f.values) > s) * f.grid.cell_volume)


def decreasing_rearrangement(f: GridFunction) -> StepRearrangement:
    """Sorted |samples| as a step function; ties merged into one step."""
    return rearrangement_of(f.values, f.grid.cell_volume)


def rearrangement_of(values: np.ndarray, cell_volume: float) -> StepRearrangement:
    a = _support_values(values)
    if a.size == 0:
        return StepRearrangement(np.zeros(1), np.zeros(0))
    a = np.sort(a)[::-1]
    levels, counts = np.unique(a, return_counts=True)
    levels = levels[::-1]
    counts = counts[::-1]
    breaks = np.concatenate([[0.0], np.cumsum(counts) * cell_volume])
    return StepRearrangement(breaks, levels)


def lorentz_quasinorm(f: GridFunction, p: float, q: float) -> float:
    """Quasinorm of L^(p,q), p in (1, inf), q in [1, inf]."""
    return quasinorm_of(f.values, f.grid.cell_volume, p, q)


def quasinorm_of(values: np.ndarray, cell_volume: float, p: float, q: float) -> float:
    if not 1.0 < p < math.inf:
        raise ValueError(f"Lorentz exponent p must lie in (1, inf), got {p}")
    if q < 1:
        raise ValueError(f"Lorentz exponent q must be >= 1, got {q}")
    a = _support_values(values)
    if a.size == 0:
        return 0.0
    a = np.sort(a)[::-1]
    t = np.arange(1, a.size + 1, dtype=float) * cell_volume
    if math.isinf(q):
        return float((a * t ** (1.0 / p)).max())
    w = np.concatenate([[0.0], t ** (q / p)])
    return float(((a ** q) * np.diff(w)).sum() ** (1.0 / q))


def weak_quasinorm_via_distribution(f: GridFunction, p: float) -> float:
    """Weak quasinorm sup_s s lambda(s)^(1/p) evaluated from level counts.

    On a finite sample set the supremum is attained in the limit s -> v-
    for a sample level v, where lambda(s-) is the measure of {|f| >= v}.
    """
    if not 1.0 < p < math.inf:
        raise ValueError(f"Lorentz exponent p must lie in (1, inf), got {p}")
    a = _support_values(f.values)
    if a.size == 0:
        return 0.0
    a = np.sort(a)[::-1]
    measure_at_least = np.arange(1, a.size + 1, dtype=float) * f.grid.cell_volume
    return float((a * measure_at_least ** (1.0 / p)).max())


def batch_quasinorm(rows: np.ndarray, cell_volume: float, p: float, q: float) -> np.ndarray:
    """Lorentz quasinorm of each row of a 2-d magnitude array.

    Rows are |samples| with common cell volume.  Zeros participate as steps
    of level 0, which contribute nothing, so no masking is needed.
    """
    if not 1.0 < p < math.inf:
        raise ValueError(f"Lorentz exponent p must lie in (1, inf), got {p}")
    if q < 1:
        raise ValueError(f"Lorentz exponent q must be >= 1, got {q}")
    a = np.sort(np.abs(rows), axis=1)[:, ::-1]
    t = np.arange(1, a.shape[1] + 1, dtype=float) * cell_volume
    if math.isinf(q):
        return (a * t ** (1.0 / p)).max(axis=1)
    w = np.concatenate([[0.0], t ** (q / p)])
    return ((a ** q) * np.diff(w)).sum(axis=1) ** (1.0 / q)
