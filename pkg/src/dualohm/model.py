"""Domain types, grid geometry, and the unit map.

Everything downstream works in dimensionless variables: time is measured
in light-travel units, the magnetic field is rescaled by the light speed,
and the two conductivities absorb the vacuum permeability.  SI quantities
appear only at the :func:`nondimensionalize` / :func:`dimensionalize`
boundary.

Field layout convention: a "grid triple" is a float64 array of shape
``(3, nx, ny, nz)`` (component first), a scalar grid is ``(nx, ny, nz)``.
All grids are uniform and periodic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray

_SIGMA_EQUAL_RTOL = 1e-14


def _as_grid(a, name: str) -> Array:
    arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid: cells per axis and dimensionless spacings."""

    nx: int
    ny: int
    nz: int
    dx: float
    dy: float
    dz: float

    def __post_init__(self):
        for n in (self.nx, self.ny, self.nz):
            if not isinstance(n, (int, np.integer)) or n < 4:
                raise ValueError(f"grid needs at least 4 cells per axis, got {n}")
        for d in (self.dx, self.dy, self.dz):
            if not (np.isfinite(d) and d > 0):
                raise ValueError(f"grid spacing must be positive and finite, got {d}")

    @classmethod
    def cube(cls, n: int, length: float = 2.0 * np.pi) -> "GridSpec":
        """n³ cells on a periodic box of the given edge length."""
        return cls(n, n, n, length / n, length / n, length / n)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def lengths(self) -> tuple[float, float, float]:
        return (self.nx * self.dx, self.ny * self.dy, self.nz * self.dz)

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.dz

    @property
    def min_spacing(self) -> float:
        return min(self.dx, self.dy, self.dz)

    def coordinates(self) -> tuple[Array, Array, Array]:
        """Node coordinates as broadcastable arrays (x varies on axis 0)."""
        x = (self.dx * np.arange(self.nx)).reshape(self.nx, 1, 1)
        y = (self.dy * np.arange(self.ny)).reshape(1, self.ny, 1)
        z = (self.dz * np.arange(self.nz)).reshape(1, 1, self.nz)
        return x, y, z

    def check_scalar(self, f: Array, name: str = "field") -> None:
        if f.shape != self.shape:
            raise ValueError(f"{name} has shape {f.shape}, expected {self.shape}")

    def check_triple(self, F: Array, name: str = "field") -> None:
        if F.shape != (3,) + self.shape:
            raise ValueError(
                f"{name} has shape {F.shape}, expected {(3,) + self.shape}"
            )


@dataclass(frozen=True)
class MediumParams:
    """Dimensionless electric and magnetic conductivities."""

    sigma_e: float
    sigma_m: float

    def __post_init__(self):
        for s in (self.sigma_e, self.sigma_m):
            if not (np.isfinite(s) and s >= 0):
                raise ValueError(f"conductivities must be finite and >= 0, got {s}")

    @property
    def sigma_equal(self) -> bool:
        """Whether the two conductivities coincide (drives law applicability)."""
        scale = max(abs(self.sigma_e), abs(self.sigma_m), 1.0)
        return abs(self.sigma_e - self.sigma_m) <= _SIGMA_EQUAL_RTOL * scale


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants entering the unit map: light speed and vacuum permeability."""

    c: float = 299792458.0
    mu0: float = 1.25663706212e-06

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c > 0):
            raise ValueError(f"c must be positive and finite, got {self.c}")
        if not (np.isfinite(self.mu0) and self.mu0 > 0):
            raise ValueError(f"mu0 must be positive and finite, got {self.mu0}")


@dataclass(frozen=True)
class FieldState:
    """Electric and magnetic grid triples at one dimensionless time."""

    t: float
    E: Array
    B: Array

    def __post_init__(self):
        object.__setattr__(self, "E", _as_grid(self.E, "E"))
        object.__setattr__(self, "B", _as_grid(self.B, "B"))
        if not np.isfinite(self.t):
            raise ValueError("state time must be finite")
        if self.E.shape != self.B.shape or self.E.ndim != 4 or self.E.shape[0] != 3:
            raise ValueError(
                f"E and B must both be (3, nx, ny, nz), got {self.E.shape} / {self.B.shape}"
            )


@dataclass(frozen=True)
class ChargeDensities:
    """Electric and magnetic charge densities (the latter is a pseudoscalar)."""

    rho_e: Array
    rho_m: Array


@dataclass(frozen=True)
class AdjointState:
    """Adjoint variables: pseudovector V, vector W, multipliers R_e, R_m.

    On an exact adjoint solution R_e and R_m vanish identically; numerically
    they stay at solver tolerance because they are built as the difference
    between a discrete divergence and the charge it defines.
    """

    t: float
    V: Array
    W: Array
    R_e: Array
    R_m: Array

    def __post_init__(self):
        object.__setattr__(self, "V", _as_grid(self.V, "V"))
        object.__setattr__(self, "W", _as_grid(self.W, "W"))
        object.__setattr__(self, "R_e", _as_grid(self.R_e, "R_e"))
        object.__setattr__(self, "R_m", _as_grid(self.R_m, "R_m"))
        if not np.isfinite(self.t):
            raise ValueError("state time must be finite")
        if self.V.shape != self.W.shape or self.V.ndim != 4 or self.V.shape[0] != 3:
            raise ValueError(
                f"V and W must both be (3, nx, ny, nz), got {self.V.shape} / {self.W.shape}"
            )
        if self.R_e.shape != self.V.shape[1:] or self.R_m.shape != self.V.shape[1:]:
            raise ValueError("R_e and R_m must be scalar grids matching V")


@dataclass(frozen=True)
class ScaledQuantities:
    """Bundle crossing the unit boundary in either direction."""

    t: float
    sigma_e: float
    sigma_m: float
    B: Array
    rho_e: Array
    rho_m: Array


def _check_finite_scalar(value: float, name: str) -> float:
    v = float(value)
    if not np.isfinite(v):
        raise ValueError(f"{name} must be finite, got {value}")
    return v


def nondimensionalize(
    consts: PhysicalConstants,
    sigma_e_SI: float,
    sigma_m_SI: float,
    t_SI: float,
    B_SI,
    rho_e_SI,
    rho_m_SI,
) -> ScaledQuantities:
    """Map SI inputs to the dimensionless variables used internally.

    t -> c·t, B -> c·B, σ_e -> c·μ0·σ_e, σ_m -> (μ0/c)·σ_m,
    ρ_e -> c²·μ0·ρ_e, ρ_m -> c·μ0·ρ_m.  E is left untouched.
    """
    c, mu0 = consts.c, consts.mu0
    return ScaledQuantities(
        t=c * _check_finite_scalar(t_SI, "t_SI"),
        sigma_e=c * mu0 * _check_finite_scalar(sigma_e_SI, "sigma_e_SI"),
        sigma_m=(mu0 / c) * _check_finite_scalar(sigma_m_SI, "sigma_m_SI"),
        B=c * _as_grid(B_SI, "B_SI"),
        rho_e=c * c * mu0 * _as_grid(rho_e_SI, "rho_e_SI"),
        rho_m=c * mu0 * _as_grid(rho_m_SI, "rho_m_SI"),
    )


def dimensionalize(consts: PhysicalConstants, scaled: ScaledQuantities) -> ScaledQuantities:
    """Inverse of :func:`nondimensionalize`; round-trips to rounding error."""
    c, mu0 = consts.c, consts.mu0
    return ScaledQuantities(
        t=_check_finite_scalar(scaled.t, "t") / c,
        sigma_e=_check_finite_scalar(scaled.sigma_e, "sigma_e") / (c * mu0),
        sigma_m=_check_finite_scalar(scaled.sigma_m, "sigma_m") * c / mu0,
        B=_as_grid(scaled.B, "B") / c,
        rho_e=_as_grid(scaled.rho_e, "rho_e") / (c * c * mu0),
        rho_m=_as_grid(scaled.rho_m, "rho_m") / (c * mu0),
    )


def gauss_charges(state: FieldState, grid: GridSpec, order: int = 2) -> ChargeDensities:
    """Charge densities defined by the discrete Gauss laws.

    rho_e = div_h E and rho_m = div_h B, so the Gauss constraints hold by
    construction with the same divergence operator; charges are diagnostic,
    never integrated in time.
    """
    from . import operators  # local import to keep module load order simple

    grid.check_triple(state.E, "E")
    grid.check_triple(state.B, "B")
    return ChargeDensities(
        rho_e=operators.divergence(state.E, grid, order),
        rho_m=operators.divergence(state.B, grid, order),
    )
