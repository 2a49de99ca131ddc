"""Formal Lagrangian machinery and the symmetry-generator catalog.

The multiplier Lagrangian

    L = V·(curl E + B_t + σ_m B) + R_e (div E − ρ_e)
      + W·(curl B − E_t − σ_e E) + R_m (div B − ρ_m)

is linear in every first derivative, so its derivative-slot gradients form
a closed 32-entry coefficient table (8 dependent variables × 4 axes; all
charge-density entries vanish).  A symmetry generator

    X = ξ^i ∂_i + η^α ∂_α

then yields the conserved vector

    C^i = L ξ^i + (η^α − ξ^j u^α_j) ∂L/∂u^α_i

with density τ = C^t and flux χ = (C^x, C^y, C^z).  The L ξ^i term is kept
here (it vanishes only on solutions); the hand-coded catalog drops it the
way the printed conservation laws do.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import operators
from .dynamics import Trajectory
from .model import (
    AdjointState,
    Array,
    ChargeDensities,
    FieldState,
    GridSpec,
    MediumParams,
    gauss_charges,
)


@dataclass(frozen=True)
class SymmetryGenerator:
    """Closed-form infinitesimal symmetry.

    ``xi(x, y, z, t, E, B, rho_e, rho_m)`` returns the four components
    (ξ^x, ξ^y, ξ^z, ξ^t); ``eta(...)`` returns the eight components for
    (E¹, E², E³, B¹, B², B³, ρ_e, ρ_m).  Entries may be scalars or grids.
    """

    name: str
    xi: Callable
    eta: Callable


def _zero8(*_args):
    return (0.0,) * 8


def time_translation() -> SymmetryGenerator:
    return SymmetryGenerator(
        "time_translation", lambda *a: (0.0, 0.0, 0.0, 1.0), _zero8
    )


def space_translation(axis: str) -> SymmetryGenerator:
    try:
        i = "xyz".index(axis)
    except ValueError:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}") from None
    xi4 = tuple(1.0 if j == i else 0.0 for j in range(3)) + (0.0,)
    return SymmetryGenerator(f"space_translation_{axis}", lambda *a: xi4, _zero8)


_ROTATION_INDEX = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}


def rotation(plane: str) -> SymmetryGenerator:
    """Simultaneous rotation of the position vector and both fields.

    Orientation follows the convention second-coordinate → first-coordinate:
    the xy generator is y ∂_x − x ∂_y + E² ∂_{E¹} − E¹ ∂_{E²} + (same for B).
    """
    if plane not in _ROTATION_INDEX:
        raise ValueError(f"plane must be one of xy, xz, yz, got {plane!r}")
    i, j = _ROTATION_INDEX[plane]

    def xi(x, y, z, t, E, B, rho_e, rho_m):
        coords = (x, y, z)
        out = [0.0, 0.0, 0.0, 0.0]
        out[i] = coords[j]
        out[j] = -coords[i]
        return tuple(out)

    def eta(x, y, z, t, E, B, rho_e, rho_m):
        eE = [0.0, 0.0, 0.0]
        eB = [0.0, 0.0, 0.0]
        eE[i], eE[j] = E[j], -E[i]
        eB[i], eB[j] = B[j], -B[i]
        return (*eE, *eB, 0.0, 0.0)

    return SymmetryGenerator(f"rotation_{plane}", xi, eta)


def dilation() -> SymmetryGenerator:
    """Simultaneous scaling of all dependent variables."""
    return SymmetryGenerator(
        "dilation",
        lambda *a: (0.0, 0.0, 0.0, 0.0),
        lambda x, y, z, t, E, B, rho_e, rho_m: (
            E[0], E[1], E[2], B[0], B[1], B[2], rho_e, rho_m
        ),
    )


def duality() -> SymmetryGenerator:
    """Infinitesimal rotation of E into B and of ρ_e into ρ_m."""
    return SymmetryGenerator(
        "duality",
        lambda *a: (0.0, 0.0, 0.0, 0.0),
        lambda x, y, z, t, E, B, rho_e, rho_m: (
            -B[0], -B[1], -B[2], E[0], E[1], E[2], -rho_m, rho_e
        ),
    )


def builtin_generators() -> tuple[SymmetryGenerator, ...]:
    """The nine built-in generators: four translations, three rotations,
    the dilation, and the duality rotation."""
    return (
        time_translation(),
        space_translation("x"),
        space_translation("y"),
        space_translation("z"),
        rotation("xy"),
        rotation("xz"),
        rotation("yz"),
        dilation(),
        duality(),
    )


@dataclass(frozen=True)
class DerivativeBundle:
    """First derivatives of the fields (and optionally the adjoints) on one
    time slice.  Spatial entries are indexed component-first: ``E_x[i]`` is
    ∂E^{i+1}/∂x.  Built by discrete operators, so truncation-order accurate.
    """

    E_t: Array
    B_t: Array
    E_x: Array
    E_y: Array
    E_z: Array
    B_x: Array
    B_y: Array
    B_z: Array
    V_t: Array | None = None
    W_t: Array | None = None

    @property
    def curl_E(self) -> Array:
        return np.stack(
            (
                self.E_y[2] - self.E_z[1],
                self.E_z[0] - self.E_x[2],
                self.E_x[1] - self.E_y[0],
            )
        )

    @property
    def curl_B(self) -> Array:
        return np.stack(
            (
                self.B_y[2] - self.B_z[1],
                self.B_z[0] - self.B_x[2],
                self.B_x[1] - self.B_y[0],
            )
        )

    @property
    def div_E(self) -> Array:
        return self.E_x[0] + self.E_y[1] + self.E_z[2]

    @property
    def div_B(self) -> Array:
        return self.B_x[0] + self.B_y[1] + self.B_z[2]


def derivative_bundle(
    forward: Trajectory,
    index: int,
    order: int = 2,
    adjoint: Trajectory | None = None,
) -> DerivativeBundle:
    """Bundle at an interior snapshot; time derivatives are centered."""
    if forward.is_adjoint:
        raise ValueError("derivative_bundle expects a forward trajectory")
    grid = forward.grid
    s = forward.states[index]
    E_t = operators.ddt_centered([st.E for st in forward.states], forward.dt, index)
    B_t = operators.ddt_centered([st.B for st in forward.states], forward.dt, index)
    V_t = W_t = None
    if adjoint is not None:
        if len(adjoint) != len(forward) or abs(adjoint.dt - forward.dt) > 1e-12:
            raise ValueError("adjoint trajectory is not aligned with the forward one")
        V_t = operators.ddt_centered(
            [st.V for st in adjoint.states], adjoint.dt, index
        )
        W_t = operators.ddt_centered(
            [st.W for st in adjoint.states], adjoint.dt, index
        )

    def d(F, direction):
        h = (grid.dx, grid.dy, grid.dz)[direction]
        return operators.diff_periodic(F, direction + 1, h, order)

    return DerivativeBundle(
        E_t=E_t,
        B_t=B_t,
        E_x=d(s.E, 0),
        E_y=d(s.E, 1),
        E_z=d(s.E, 2),
        B_x=d(s.B, 0),
        B_y=d(s.B, 1),
        B_z=d(s.B, 2),
        V_t=V_t,
        W_t=W_t,
    )


def lagrangian_density(
    state: FieldState,
    adj: AdjointState,
    derivs: DerivativeBundle,
    charges: ChargeDensities,
    params: MediumParams,
) -> Array:
    """Pointwise value of the multiplier Lagrangian.

    Vanishes identically when the adjoint variables are zero, and to
    truncation order when the fields solve the forward system.
    """
    faraday = derivs.curl_E + derivs.B_t + params.sigma_m * state.B
    ampere = derivs.curl_B - derivs.E_t - params.sigma_e * state.E
    return (
        operators.dot(adj.V, faraday)
        + adj.R_e * (derivs.div_E - charges.rho_e)
        + operators.dot(adj.W, ampere)
        + adj.R_m * (derivs.div_B - charges.rho_m)
    )


@dataclass(frozen=True)
class DerivativeCoefficients:
    """The 32-entry table ∂L/∂u^α_i, transcribed from the coordinate form of
    the Lagrangian.  Attribute ``E_x`` holds (∂L/∂E¹_x, ∂L/∂E²_x, ∂L/∂E³_x)
    and so on; all ρ_e/ρ_m entries are zero and therefore omitted.
    """

    E_t: Array
    E_x: Array
    E_y: Array
    E_z: Array
    B_t: Array
    B_x: Array
    B_y: Array
    B_z: Array


def dL_dderivative(adj: AdjointState) -> DerivativeCoefficients:
    """Coefficient of each derivative slot in the Lagrangian (exact algebra)."""
    V, W = adj.V, adj.W
    R_e, R_m = adj.R_e, adj.R_m
    return DerivativeCoefficients(
        E_t=np.stack((-W[0], -W[1], -W[2])),
        E_x=np.stack((R_e, V[2], -V[1])),
        E_y=np.stack((-V[2], R_e, V[0])),
        E_z=np.stack((V[1], -V[0], R_e)),
        B_t=np.stack((V[0], V[1], V[2])),
        B_x=np.stack((R_m, W[2], -W[1])),
        B_y=np.stack((-W[2], R_m, W[0])),
        B_z=np.stack((W[1], -W[0], R_m)),
    )


@dataclass(frozen=True)
class EulerLagrangeResiduals:
    """The sixteen variational derivatives of the Lagrangian.

    The first eight (w.r.t. V, W, R_e, R_m) reproduce the forward system;
    the last eight (w.r.t. E, B, ρ_e, ρ_m) are the adjoint system plus the
    multiplier constraints −R_e, −R_m.
    """

    dL_dV: Array
    dL_dW: Array
    dL_dR_e: Array
    dL_dR_m: Array
    dL_dE: Array
    dL_dB: Array
    dL_drho_e: Array
    dL_drho_m: Array


def euler_lagrange_residuals(
    state: FieldState,
    adj: AdjointState,
    derivs: DerivativeBundle,
    charges: ChargeDensities,
    params: MediumParams,
    grid: GridSpec,
    order: int = 2,
) -> EulerLagrangeResiduals:
    """Evaluate all sixteen variational derivatives on one time slice.

    Requires adjoint time derivatives in the bundle (V_t, W_t) for the
    E- and B-variations.
    """
    if derivs.V_t is None or derivs.W_t is None:
        raise ValueError("bundle lacks adjoint time derivatives (V_t, W_t)")
    return EulerLagrangeResiduals(
        dL_dV=derivs.curl_E + derivs.B_t + params.sigma_m * state.B,
        dL_dW=derivs.curl_B - derivs.E_t - params.sigma_e * state.E,
        dL_dR_e=derivs.div_E - charges.rho_e,
        dL_dR_m=derivs.div_B - charges.rho_m,
        dL_dE=operators.curl(adj.V, grid, order)
        + derivs.W_t
        - params.sigma_e * adj.W
        - operators.gradient(adj.R_e, grid, order),
        dL_dB=operators.curl(adj.W, grid, order)
        - derivs.V_t
        + params.sigma_m * adj.V
        - operators.gradient(adj.R_m, grid, order),
        dL_drho_e=-adj.R_e,
        dL_drho_m=-adj.R_m,
    )


def conserved_vector_generic(
    gen: SymmetryGenerator,
    state: FieldState,
    adj: AdjointState,
    derivs: DerivativeBundle,
    charges: ChargeDensities,
    params: MediumParams,
    grid: GridSpec,
) -> tuple[Array, Array]:
    """(τ, χ) from the generic formula C^i = Lξ^i + (η^α − ξ^j u^α_j) ∂L/∂u^α_i.

    The L ξ^i term is retained; the charge densities contribute only through
    L because their derivative coefficients vanish.
    """
    x, y, z = grid.coordinates()
    args = (x, y, z, state.t, state.E, state.B, charges.rho_e, charges.rho_m)
    xi_x, xi_y, xi_z, xi_t = gen.xi(*args)
    etas = gen.eta(*args)
    coef = dL_dderivative(adj)
    L = lagrangian_density(state, adj, derivs, charges, params)

    drift_E = [
        etas[b] - (xi_x * derivs.E_x[b] + xi_y * derivs.E_y[b]
                   + xi_z * derivs.E_z[b] + xi_t * derivs.E_t[b])
        for b in range(3)
    ]
    drift_B = [
        etas[3 + b] - (xi_x * derivs.B_x[b] + xi_y * derivs.B_y[b]
                       + xi_z * derivs.B_z[b] + xi_t * derivs.B_t[b])
        for b in range(3)
    ]

    def component(xi_i, coef_E, coef_B):
        out = np.zeros(grid.shape)
        out += L * xi_i
        for b in range(3):
            out += drift_E[b] * coef_E[b] + drift_B[b] * coef_B[b]
        return out

    tau = component(xi_t, coef.E_t, coef.B_t)
    chi = np.stack(
        (
            component(xi_x, coef.E_x, coef.B_x),
            component(xi_y, coef.E_y, coef.B_y),
            component(xi_z, coef.E_z, coef.B_z),
        )
    )
    return tau, chi


@dataclass(frozen=True)
class AdmittanceResiduals:
    """Deviation of each equation's duality image from the system itself.

    The first two entries are grid triples, the Gauss entries scalar grids.
    Expanding the algebra, faraday = (σ_m − σ_e)·E and ampere = (σ_e − σ_m)·B
    while both Gauss entries cancel identically, so all four vanish exactly
    when the conductivities coincide and only then.
    """

    faraday: Array
    ampere: Array
    gauss_electric: Array
    gauss_magnetic: Array

    def all_grids(self) -> tuple[Array, ...]:
        return (self.faraday, self.ampere, self.gauss_electric, self.gauss_magnetic)


def duality_admittance_check(
    state: FieldState,
    derivs: DerivativeBundle,
    params: MediumParams,
    grid: GridSpec,
    order: int = 2,
) -> AdmittanceResiduals:
    """Act with the prolonged duality generator on each equation and subtract
    its image under the same rotation of the system's own residuals."""
    charges = gauss_charges(state, grid, order)
    E, B = state.E, state.B
    faraday = derivs.curl_E + derivs.B_t + params.sigma_m * B
    ampere = derivs.curl_B - derivs.E_t - params.sigma_e * E
    gauss_e = derivs.div_E - charges.rho_e
    gauss_m = derivs.div_B - charges.rho_m

    # prolonged action: E -> −B, B -> E (values and every first derivative),
    # ρ_e -> −ρ_m, ρ_m -> ρ_e
    x_faraday = -derivs.curl_B + derivs.E_t + params.sigma_m * E
    x_ampere = derivs.curl_E + derivs.B_t + params.sigma_e * B
    x_gauss_e = -(derivs.div_B - charges.rho_m)
    x_gauss_m = derivs.div_E - charges.rho_e

    return AdmittanceResiduals(
        faraday=x_faraday + ampere,
        ampere=x_ampere - faraday,
        gauss_electric=x_gauss_e + gauss_m,
        gauss_magnetic=x_gauss_m - gauss_e,
    )


def duality_group_action(
    state: FieldState, charges: ChargeDensities, alpha: float
) -> tuple[FieldState, ChargeDensities]:
    """Finite duality rotation of the fields and charge densities by the
    pseudoscalar angle alpha."""
    c, s = np.cos(alpha), np.sin(alpha)
    rotated = FieldState(
        state.t, c * state.E - s * state.B, s * state.E + c * state.B
    )
    rotated_charges = ChargeDensities(
        rho_e=c * charges.rho_e - s * charges.rho_m,
        rho_m=s * charges.rho_e + c * charges.rho_m,
    )
    return rotated, rotated_charges
