"""Bounded uniform partitions of unity and the lattice-sum amalgam norm.

The family is built from a smooth bump chi that equals 1 on
[-spacing/2, spacing/2]^d and vanishes outside (-spacing, spacing)^d,
translated over the lattice spacing * Z^d and divided by the periodized sum,
so the translates sum to 1 exactly at every node.  Each phi comes with a
companion psi equal to 1 on its support (supported inside twice the bump
box), giving split/recombine operators with recombine(split(f)) = f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .grid import Grid, GridFunction
from .lorentz import quasinorm_of
from .wiener import LocalNormSpec, _batch_local_norms, bump_profile


@dataclass(frozen=True)
class Bupu:
    """Partition family {phi_a} with companions {psi_a} on a grid.

    Invariants: sum of phis is 1 at every node; each psi equals 1 on the
    support of its phi; supports overlap only between nearby lattice
    neighbours (at most 5 per dimension).
    """

    grid: Grid
    spacing: float
    phis: List[GridFunction]
    psis: List[GridFunction]


def build_bupu(grid: Grid, spacing: float) -> Bupu:
    """Construct the partition with translates stepping by ``spacing``."""
    h = grid.spacing
    cells = round(spacing / h)
    if cells < 1 or abs(cells * h - spacing) > 1e-9 * spacing:
        raise ValueError("bupu spacing must be an integer multiple of grid spacing")
    if grid.points_per_dim % cells != 0:
        raise ValueError("bupu spacing must divide the extent")
    if cells < 4:
        raise ValueError(
            "bupu spacing too small: bump support would cover fewer than 8 grid cells"
        )
    n = grid.points_per_dim
    m = n // cells  # translates per dimension

    coords = grid.coords()
    chi = np.ones(grid.shape, dtype=float)
    psi0 = np.ones(grid.shape, dtype=float)
    for x in coords:
        chi = chi * np.broadcast_to(bump_profile(2.0 * x / spacing), grid.shape)
        psi0 = psi0 * np.broadcast_to(bump_profile(x / spacing), grid.shape)

    shifts = _lattice_shifts(grid, cells)
    big = np.zeros(grid.shape, dtype=float)
    for sh in shifts:
        big += np.roll(chi, sh, axis=tuple(range(grid.dim)))
    if big.min() < 1.0 - 1e-9:
        raise AssertionError("periodized bump sum fell below 1")

    phis, psis = [], []
    base = chi / big
    for sh in shifts:
        phis.append(GridFunction(grid, np.roll(base, sh, axis=tuple(range(grid.dim)))))
        psis.append(GridFunction(grid, np.roll(psi0, sh, axis=tuple(range(grid.dim)))))
    return Bupu(grid, cells * h, phis, psis)


def _lattice_shifts(grid: Grid, cells: int) -> list:
    """Roll offsets (in cells) placing the bump at each lattice node."""
    n = grid.points_per_dim
    origin = n // 2  # the bump is centered at x = 0
    steps = [(k * cells - origin) % n for k in range(n // cells)]
    if grid.dim == 1:
        return [(s,) for s in steps]
    return [(s1, s2) for s1 in steps for s2 in steps]


def analyze(f: GridFunction, b: Bupu) -> List[GridFunction]:
    """Split f into the family {f * phi_a}."""
    if f.grid != b.grid:
        raise ValueError("function and partition live on different grids")
    return [GridFunction(f.grid, f.values * phi.values) for phi in b.phis]


def synthesize(pieces: Sequence[GridFunction], b: Bupu) -> GridFunction:
    """Recombine a family: sum of u_a * psi_a.

    Since each psi equals 1 where its phi is nonzero, this inverts
    :func:`analyze` exactly.
    """
    if len(pieces) != len(b.psis):
        raise ValueError(
            f"family has {len(pieces)} members, partition has {len(b.psis)}"
        )
    acc = np.zeros(b.grid.shape, dtype=np.complex128)
    for u, psi in zip(pieces, b.psis):
        if u.grid != b.grid:
            raise ValueError("family member lives on a different grid")
        acc += u.values * psi.values
    return GridFunction(b.grid, acc)


def bupu_amalgam_norm(
    f: GridFunction, local: LocalNormSpec, p: float, b: Bupu
) -> float:
    """Lattice-sum amalgam norm (sum_a ||f phi_a||_B^p)^(1/p).

    Equivalent (with window-dependent constants) to the sliding-window norm
    with matching local component and global L^p.
    """
    if f.grid != b.grid:
        raise ValueError("function and partition live on different grids")
    pieces = np.stack([f.values * phi.values for phi in b.phis])
    norms = np.empty(len(b.phis))
    step = max(1, (1 << 23) // (f.grid.points_per_dim ** f.grid.dim))
    for lo in range(0, len(b.phis), step):
        norms[lo : lo + step] = _batch_local_norms(pieces[lo : lo + step], f.grid, local)
    if math.isinf(p):
        return float(norms.max())
    return float((norms ** p).sum() ** (1.0 / p))


def max_support_overlap(b: Bupu) -> int:
    """Largest number of psi supports meeting a single phi support."""
    phi_masks = np.stack([np.abs(phi.values) > 0 for phi in b.phis])
    psi_masks = np.stack([np.abs(psi.values) > 0 for psi in b.psis])
    flat_phi = phi_masks.reshape(len(b.phis), -1)
    flat_psi = psi_masks.reshape(len(b.psis), -1)
    overlap = flat_phi @ flat_psi.T  # counts of common nodes
    return int((overlap > 0).sum(axis=1).max())


def max_node_multiplicity(b: Bupu) -> int:
    """Largest number of psi supports containing a single grid node."""
    acc = np.zeros(b.grid.shape, dtype=int)
    for psi in b.psis:
        acc += (np.abs(psi.values) > 0).astype(int)
    return int(acc.max())
