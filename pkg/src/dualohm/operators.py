"""Central-difference vector calculus on periodic uniform grids.

Order-2 and order-4 stencils with wraparound indexing.  Because all the
difference operators are shift-invariant and commute, the discrete
identities div∘curl = 0 and curl∘grad = 0 hold to rounding, not just to
truncation order.  Collocated layout: every component lives at the node.
"""

from __future__ import annotations

import numpy as np

from .model import Array, GridSpec

VALID_ORDERS = (2, 4)


def _check_order(order: int) -> None:
    if order not in VALID_ORDERS:
        raise ValueError(f"stencil order must be one of {VALID_ORDERS}, got {order}")


def _check_extent(grid: GridSpec, order: int) -> None:
    # order-2 needs 3 points, order-4 needs 5; GridSpec already enforces >= 4
    if order == 4 and min(grid.shape) < 5:
        raise ValueError(f"order-4 stencil needs >= 5 cells per axis, got {grid.shape}")


def diff_periodic(f: Array, axis: int, h: float, order: int = 2) -> Array:
    """Central difference of f along an array axis with periodic wrap."""
    _check_order(order)
    if order == 2:
        return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2.0 * h)
    return (
        8.0 * (np.roll(f, -1, axis) - np.roll(f, 1, axis))
        - (np.roll(f, -2, axis) - np.roll(f, 2, axis))
    ) / (12.0 * h)


def _spatial_axis(f: Array, direction: int) -> int:
    # scalar grids differentiate along axes 0..2, triples along 1..3
    return direction + (f.ndim - 3)


def _d(f: Array, direction: int, grid: GridSpec, order: int) -> Array:
    h = (grid.dx, grid.dy, grid.dz)[direction]
    return diff_periodic(f, _spatial_axis(f, direction), h, order)


def curl(F: Array, grid: GridSpec, order: int = 2) -> Array:
    """Discrete curl of a grid triple."""
    _check_extent(grid, order)
    grid.check_triple(F, "curl input")
    dFdx = _d(F, 0, grid, order)
    dFdy = _d(F, 1, grid, order)
    dFdz = _d(F, 2, grid, order)
    return np.stack(
        (
            dFdy[2] - dFdz[1],
            dFdz[0] - dFdx[2],
            dFdx[1] - dFdy[0],
        )
    )


def divergence(F: Array, grid: GridSpec, order: int = 2) -> Array:
    """Discrete divergence of a grid triple."""
    _check_extent(grid, order)
    grid.check_triple(F, "divergence input")
    return (
        _d(F[0], 0, grid, order)
        + _d(F[1], 1, grid, order)
        + _d(F[2], 2, grid, order)
    )


def gradient(f: Array, grid: GridSpec, order: int = 2) -> Array:
    """Discrete gradient of a scalar grid."""
    _check_extent(grid, order)
    grid.check_scalar(f, "gradient input")
    return np.stack(
        (
            _d(f, 0, grid, order),
            _d(f, 1, grid, order),
            _d(f, 2, grid, order),
        )
    )


def ddt_centered(snapshots, dt: float, index: int) -> Array:
    """Centered time derivative (f_{k+1} − f_{k−1}) / 2dt at an interior index.

    Exact on polynomials in t of degree ≤ 2, truncation O(dt²) otherwise.
    """
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    n = len(snapshots)
    if not 1 <= index <= n - 2:
        raise ValueError(
            f"centered time derivative needs both neighbors: index {index} of {n}"
        )
    return (np.asarray(snapshots[index + 1]) - np.asarray(snapshots[index - 1])) / (
        2.0 * dt
    )


def dot(A: Array, B: Array) -> Array:
    """Pointwise scalar product of two grid triples."""
    return A[0] * B[0] + A[1] * B[1] + A[2] * B[2]


def cross(A: Array, B: Array) -> Array:
    """Pointwise cross product of two grid triples."""
    return np.stack(
        (
            A[1] * B[2] - A[2] * B[1],
            A[2] * B[0] - A[0] * B[2],
            A[0] * B[1] - A[1] * B[0],
        )
    )
