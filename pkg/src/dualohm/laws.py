"""Hand-coded conservation-law catalog and residual evaluation.

Each law is a (τ, χ) pair meant to satisfy D_t τ + div χ = 0 on paired
solutions of the forward and adjoint systems.  Densities and fluxes are
pointwise-local: they depend on the fields, the adjoints, first
derivatives, the conductivities, and (for the rotation laws) the point
coordinates.  Evaluators share the signature
``(state, adj, derivs, grid, params)``; laws that need no derivatives
accept ``derivs=None``.

The translation and rotation fluxes omit the term L·ξ that the generic
builder keeps, because L vanishes on solutions; :func:`off_shell_correction`
reconstructs that term for off-shell comparisons.  The duality law is the
only conditional one (it needs σ_m = σ_e); evaluating it with unequal
conductivities instead produces the defect (σ_m − σ_e)(E·V − B·W), which
:func:`conservation_residual` measures on request.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import operators
from .dynamics import Trajectory
from .model import Array, ChargeDensities, FieldState, GridSpec, MediumParams
from .noether import SymmetryGenerator
from .operators import cross, dot

ANY_SIGMA = "any_sigma"
SIGMA_EQUAL = "sigma_equal"

_TINY = 1e-300


@dataclass(frozen=True)
class ConservationLaw:
    """Named (τ, χ) evaluator pair with an applicability condition."""

    name: str
    condition: str
    tau: Callable
    chi: Callable
    provenance: str
    uses_derivatives: bool = False


def law_duality() -> ConservationLaw:
    """τ = E·V + B·W, χ = E×W − B×V; requires equal conductivities."""
    return ConservationLaw(
        name="duality",
        condition=SIGMA_EQUAL,
        tau=lambda s, a, d, g, p: dot(s.E, a.V) + dot(s.B, a.W),
        chi=lambda s, a, d, g, p: cross(s.E, a.W) - cross(s.B, a.V),
        provenance="duality rotation of the fields and charge densities",
    )


def law_dilation() -> ConservationLaw:
    """τ = B·V − E·W, χ = E×V + B×W; holds for any conductivities."""
    return ConservationLaw(
        name="dilation",
        condition=ANY_SIGMA,
        tau=lambda s, a, d, g, p: dot(s.B, a.V) - dot(s.E, a.W),
        chi=lambda s, a, d, g, p: cross(s.E, a.V) + cross(s.B, a.W),
        provenance="simultaneous scaling of all dependent variables",
    )


def law_time_translation(form: str = "compact") -> ConservationLaw:
    """Time-shift law: compact density τ = E_t·W − B_t·V, or the expanded
    density τ = W·(curl B − σ_e E) + V·(curl E + σ_m B); both share the flux
    χ = V×E_t + W×B_t and agree on solutions of the forward system."""
    if form == "compact":
        name = "time_translation"
        tau = lambda s, a, d, g, p: dot(d.E_t, a.W) - dot(d.B_t, a.V)
        note = "rate form"
    elif form == "expanded":
        name = "time_translation_expanded"
        tau = lambda s, a, d, g, p: (
            dot(a.W, d.curl_B - p.sigma_e * s.E)
            + dot(a.V, d.curl_E + p.sigma_m * s.B)
        )
        note = "curl form"
    else:
        raise ValueError(f"form must be compact or expanded, got {form!r}")
    return ConservationLaw(
        name=name,
        condition=ANY_SIGMA,
        tau=tau,
        chi=lambda s, a, d, g, p: cross(a.V, d.E_t) + cross(a.W, d.B_t),
        provenance=f"invariance under time shifts (density in {note})",
        uses_derivatives=True,
    )


def law_space_translation(axis: str) -> ConservationLaw:
    """Space-shift law along one axis: τ = E_a·W − B_a·V and
    χ = V×E_a + W×B_a, with the on-shell-vanishing L term dropped from the
    flux component along the shift axis."""
    try:
        i = "xyz".index(axis)
    except ValueError:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}") from None

    def d_axis(d):
        return ((d.E_x, d.B_x), (d.E_y, d.B_y), (d.E_z, d.B_z))[i]

    def tau(s, a, d, g, p):
        E_a, B_a = d_axis(d)
        return dot(E_a, a.W) - dot(B_a, a.V)

    def chi(s, a, d, g, p):
        E_a, B_a = d_axis(d)
        return cross(a.V, E_a) + cross(a.W, B_a)

    return ConservationLaw(
        name=f"space_translation_{axis}",
        condition=ANY_SIGMA,
        tau=tau,
        chi=chi,
        provenance=f"invariance under shifts along {axis}",
        uses_derivatives=True,
    )


def _pair(F_d: Array, G: Array, i: int, j: int) -> Array:
    # bilinear block F^i_d G^j − F^j_d G^i common to all rotation fluxes
    return F_d[i] * G[j] - F_d[j] * G[i]


def law_rotation(plane: str) -> ConservationLaw:
    """Rotation law for one coordinate plane, transcribed component by
    component; moment terms use the node coordinates of the grid."""
    if plane == "xy":

        def tau(s, a, d, g, p):
            x, y, _ = g.coordinates()
            E, B, V, W = s.E, s.B, a.V, a.W
            return (
                W[1] * E[0] - W[0] * E[1]
                + y * dot(d.E_x, W) - x * dot(d.E_y, W)
                - (V[1] * B[0] - V[0] * B[1])
                - (y * dot(d.B_x, V) - x * dot(d.B_y, V))
            )

        def chi(s, a, d, g, p):
            x, y, _ = g.coordinates()
            E, B, V, W = s.E, s.B, a.V, a.W
            c1 = (
                -V[2] * E[0] - y * _pair(d.E_x, V, 1, 2) + x * _pair(d.E_y, V, 1, 2)
                - W[2] * B[0] - y * _pair(d.B_x, W, 1, 2) + x * _pair(d.B_y, W, 1, 2)
            )
            c2 = (
                -V[2] * E[1] + y * _pair(d.E_x, V, 0, 2) - x * _pair(d.E_y, V, 0, 2)
                - W[2] * B[1] + y * _pair(d.B_x, W, 0, 2) - x * _pair(d.B_y, W, 0, 2)
            )
            c3 = (
                V[0] * E[0] + V[1] * E[1]
                - y * _pair(d.E_x, V, 0, 1) + x * _pair(d.E_y, V, 0, 1)
                + W[0] * B[0] + W[1] * B[1]
                - y * _pair(d.B_x, W, 0, 1) + x * _pair(d.B_y, W, 0, 1)
            )
            return np.stack((np.broadcast_to(c1, g.shape), np.broadcast_to(c2, g.shape), np.broadcast_to(c3, g.shape)))

    elif plane == "xz":

        def tau(s, a, d, g, p):
            x, _, z = g.coordinates()
            E, B, V, W = s.E, s.B, a.V, a.W
            return (
                W[2] * E[0] - W[0] * E[2]
                + z * dot(d.E_x, W) - x * dot(d.E_z, W)
                - (V[2] * B[0] - V[0] * B[2])
                - (z * dot(d.B_x, V) - x * dot(d.B_z, V))
            )

        def chi(s, a, d, g, p):
            x, _, z = g.coordinates()
            E, B, V, W = s.E, s.B, a.V, a.W
            c1 = (
                V[1] * E[0] - z * _pair(d.E_x, V, 1, 2) + x * _pair(d.E_z, V, 1, 2)
                + W[1] * B[0] - z * _pair(d.B_x, W, 1, 2) + x * _pair(d.B_z, W, 1, 2)
            )
            c2 = (
                -V[0] * E[0] - V[2] * E[2]
                + z * _pair(d.E_x, V, 0, 2) - x * _pair(d.E_z, V, 0, 2)
                - W[0] * B[0] - W[2] * B[2]
                + z * _pair(d.B_x, W, 0, 2) - x * _pair(d.B_z, W, 0, 2)
            )
            c3 = (
                V[1] * E[2] - z * _pair(d.E_x, V, 0, 1) + x * _pair(d.E_z, V, 0, 1)
                + W[1] * B[2] - z * _pair(d.B_x, W, 0, 1) + x * _pair(d.B_z, W, 0, 1)
            )
            return np.stack((np.broadcast_to(c1, g.shape), np.broadcast_to(c2, g.shape), np.broadcast_to(c3, g.shape)))

    elif plane == "yz":

        def tau(s, a, d, g, p):
            _, y, z = g.coordinates()
            E, B, V, W = s.E, s.B, a.V, a.W
            return (
                W[2] * E[1] - W[1] * E[2]
                + z * dot(d.E_y, W) - y * dot(d.E_z, W)
                - (V[2] * B[1] - V[1] * B[2])
                - (z * dot(d.B_y, V) - y * dot(d.B_z, V))
            )

        def chi(s, a, d, g, p):
            _, y, z = g.coordinates()
            E, B, V, W = s.E, s.B, a.V, a.W
            c1 = (
                V[1] * E[1] + V[2] * E[2]
                - z * _pair(d.E_y, V, 1, 2) + y * _pair(d.E_z, V, 1, 2)
                + W[1] * B[1] + W[2] * B[2]
                - z * _pair(d.B_y, W, 1, 2) + y * _pair(d.B_z, W, 1, 2)
            )
            c2 = (
                -V[0] * E[1] + z * _pair(d.E_y, V, 0, 2) - y * _pair(d.E_z, V, 0, 2)
                - W[0] * B[1] + z * _pair(d.B_y, W, 0, 2) - y * _pair(d.B_z, W, 0, 2)
            )
            c3 = (
                -V[0] * E[2] - z * _pair(d.E_y, V, 0, 1) + y * _pair(d.E_z, V, 0, 1)
                - W[0] * B[2] - z * _pair(d.B_y, W, 0, 1) + y * _pair(d.B_z, W, 0, 1)
            )
            return np.stack((np.broadcast_to(c1, g.shape), np.broadcast_to(c2, g.shape), np.broadcast_to(c3, g.shape)))

    else:
        raise ValueError(f"plane must be one of xy, xz, yz, got {plane!r}")

    return ConservationLaw(
        name=f"rotation_{plane}",
        condition=ANY_SIGMA,
        tau=tau,
        chi=chi,
        provenance=f"simultaneous rotation of position and both fields in the {plane} plane",
        uses_derivatives=True,
    )


def rotation_density_vector(state, adj, derivs, grid) -> Array:
    """Vector form of the three rotation densities:

        τ⃗ = W×E + W·(x×∇)E − V×B − V·(x×∇)B

    where (x×∇) acts component-wise on each field component.  Relation to
    the per-plane catalog densities (the plane generators are oriented
    opposite to (x×∇) in xy and yz): yz ↔ −τ⃗¹, xz ↔ +τ⃗², xy ↔ −τ⃗³.
    """
    x, y, z = grid.coordinates()
    E, B, V, W = state.E, state.B, adj.V, adj.W
    d = derivs

    def moment(F_x, F_y, F_z, G):
        # k-th entry: Σ_j G^j (x×∇)_k F^j
        m1 = dot(y * F_z - z * F_y, G)
        m2 = dot(z * F_x - x * F_z, G)
        m3 = dot(x * F_y - y * F_x, G)
        return np.stack((m1, m2, m3))

    return (
        cross(W, E)
        + moment(d.E_x, d.E_y, d.E_z, W)
        - cross(V, B)
        - moment(d.B_x, d.B_y, d.B_z, V)
    )


ROTATION_VECTOR_COMPONENT = {"yz": (0, -1.0), "xz": (1, 1.0), "xy": (2, -1.0)}


def law_two_solution(kind: str) -> ConservationLaw:
    """Law expressed through two forward solutions: the adjoint slot is
    filled by a second solution sampled at negated times (V = B', W = E'),
    so the duality kind reads τ = E(t)·B'(−t) + B(t)·E'(−t) and the
    time-translation kind τ = E_t(t)·E'(−t) − B_t(t)·B'(−t)."""
    if kind == "duality":
        base = law_duality()
        condition = SIGMA_EQUAL
    elif kind == "time_translation":
        base = law_time_translation("compact")
        condition = ANY_SIGMA
    else:
        raise ValueError(f"kind must be duality or time_translation, got {kind!r}")
    return ConservationLaw(
        name=f"two_solution_{kind}",
        condition=condition,
        tau=base.tau,
        chi=base.chi,
        provenance=base.provenance + "; adjoint built from a time-reversed solution",
        uses_derivatives=base.uses_derivatives,
    )


def two_solution_pair(
    unprimed: Trajectory, primed: Trajectory, order: int = 2
) -> tuple[Trajectory, Trajectory]:
    """Prepare (forward, adjoint) trajectories for a two-solution law.

    ``unprimed`` runs over [0, T]; ``primed`` covers [−T, 0] and is turned
    into the adjoint by time reversal.  Identical solutions reproduce the
    one-solution representation.
    """
    if abs(unprimed.times[0]) > 1e-9 * max(unprimed.dt, 1.0):
        raise ValueError("unprimed trajectory must start at t = 0")
    adjoint = adjoint_from_time_reversal(primed, order)
    if len(adjoint) != len(unprimed) or abs(adjoint.dt - unprimed.dt) > 1e-12:
        raise ValueError("primed trajectory is not alignable with the unprimed one")
    return unprimed, adjoint


def catalog() -> dict[str, ConservationLaw]:
    """All named catalog laws keyed by name."""
    laws = [
        law_duality(),
        law_dilation(),
        law_time_translation("compact"),
        law_time_translation("expanded"),
        law_space_translation("x"),
        law_space_translation("y"),
        law_space_translation("z"),
        law_rotation("xy"),
        law_rotation("xz"),
        law_rotation("yz"),
        law_two_solution("duality"),
        law_two_solution("time_translation"),
    ]
    return {law.name: law for law in laws}


def generator_for_law(name: str) -> SymmetryGenerator | None:
    """Generator whose generic conserved vector matches a catalog law."""
    from . import noether

    table = {
        "duality": noether.duality,
        "dilation": noether.dilation,
        "time_translation": noether.time_translation,
        "time_translation_expanded": noether.time_translation,
        "space_translation_x": lambda: noether.space_translation("x"),
        "space_translation_y": lambda: noether.space_translation("y"),
        "space_translation_z": lambda: noether.space_translation("z"),
        "rotation_xy": lambda: noether.rotation("xy"),
        "rotation_xz": lambda: noether.rotation("xz"),
        "rotation_yz": lambda: noether.rotation("yz"),
    }
    maker = table.get(name)
    return maker() if maker else None


def off_shell_correction(
    gen: SymmetryGenerator,
    L: Array,
    state: FieldState,
    charges: ChargeDensities,
    grid: GridSpec,
) -> tuple[Array, Array]:
    """The L·ξ^i term the catalog drops: returns (τ add-on, χ add-on)."""
    x, y, z = grid.coordinates()
    args = (x, y, z, state.t, state.E, state.B, charges.rho_e, charges.rho_m)
    xi_x, xi_y, xi_z, xi_t = gen.xi(*args)
    zero = np.zeros(grid.shape)
    return (
        L * xi_t + zero,
        np.stack((L * xi_x + zero, L * xi_y + zero, L * xi_z + zero)),
    )


@dataclass(frozen=True)
class GlobalInvariantSeries:
    """Box integral of a law's density over time."""

    times: Array
    values: Array

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if not (np.all(np.isfinite(self.times)) and np.all(np.isfinite(self.values))):
            raise ValueError("invariant series contains non-finite entries")

    @property
    def relative_drift(self) -> float:
        """max |value − value₀| relative to |value₀| (zero series drifts 0)."""
        v0 = self.values[0]
        return float(np.max(np.abs(self.values - v0)) / max(abs(v0), _TINY))


@dataclass(frozen=True)
class ResidualSeries:
    """Discrete conservation residuals r = D_t τ + div χ at interior times.

    ``l2`` is the RMS over all interior points and slices, ``linf`` the max
    magnitude.  ``normalized_l2`` divides by the larger of the two terms
    being cancelled, so it measures cancellation quality independent of the
    field scale.  For the duality law under unequal conductivities the
    predicted defect field and its match quality are reported as well.
    """

    times: Array
    residuals: Array
    l2: float
    linf: float
    ddt_l2: float
    flux_l2: float
    normalized_l2: float
    comparison_l2: float | None = None
    comparison_rel_diff: float | None = None


def _rms(a: Array) -> float:
    return float(np.sqrt(np.mean(np.square(a))))


def _check_aligned(forward: Trajectory, adjoint: Trajectory) -> None:
    if forward.is_adjoint or not adjoint.is_adjoint:
        raise ValueError("expected (forward, adjoint) trajectory pair")
    if len(forward) != len(adjoint) or abs(forward.dt - adjoint.dt) > 1e-12:
        raise ValueError("trajectories are not time-aligned")
    if np.max(np.abs(forward.times - adjoint.times)) > 1e-9 * max(forward.dt, 1.0):
        raise ValueError("trajectories are not time-aligned")
    if forward.params != adjoint.params:
        raise ValueError("trajectories carry different medium parameters")


def conservation_residual(
    law: ConservationLaw,
    forward: Trajectory,
    adjoint: Trajectory,
    grid: GridSpec,
    order: int = 2,
    allow_condition_violation: bool = False,
) -> ResidualSeries:
    """Measure D_t τ + div χ with centered differences on stored snapshots."""
    from .noether import derivative_bundle

    _check_aligned(forward, adjoint)
    params = forward.params
    if law.condition == SIGMA_EQUAL and not params.sigma_equal:
        if not allow_condition_violation:
            raise ValueError(
                f"law {law.name!r} requires sigma_e == sigma_m "
                f"(got {params.sigma_e} / {params.sigma_m}); "
                "pass allow_condition_violation=True to measure the defect"
            )

    n = len(forward)
    if law.uses_derivatives:
        tau_lo, tau_hi = 1, n - 2  # inclusive
    else:
        tau_lo, tau_hi = 0, n - 1
    if tau_hi - tau_lo < 2:
        raise ValueError("trajectory too short for an interior residual")

    def bundle(k):
        return derivative_bundle(forward, k, order) if law.uses_derivatives else None

    taus = {}
    for k in range(tau_lo, tau_hi + 1):
        taus[k] = law.tau(forward.states[k], adjoint.states[k], bundle(k), grid, params)

    times, residuals, dtaus, fluxes, comparisons = [], [], [], [], []
    measure_defect = law.condition == SIGMA_EQUAL and not params.sigma_equal
    for k in range(tau_lo + 1, tau_hi):
        dtau = (taus[k + 1] - taus[k - 1]) / (2.0 * forward.dt)
        chi = law.chi(forward.states[k], adjoint.states[k], bundle(k), grid, params)
        flux = operators.divergence(chi, grid, order)
        times.append(forward.states[k].t)
        dtaus.append(dtau)
        fluxes.append(flux)
        residuals.append(dtau + flux)
        if measure_defect:
            s, a = forward.states[k], adjoint.states[k]
            comparisons.append(
                (params.sigma_m - params.sigma_e) * (dot(s.E, a.V) - dot(s.B, a.W))
            )

    residuals = np.stack(residuals)
    comparison_l2 = comparison_rel_diff = None
    if measure_defect:
        comparison = np.stack(comparisons)
        comparison_l2 = _rms(comparison)
        comparison_rel_diff = _rms(residuals - comparison) / max(comparison_l2, _TINY)
    ddt_l2 = _rms(np.stack(dtaus))
    flux_l2 = _rms(np.stack(fluxes))
    return ResidualSeries(
        times=np.array(times),
        residuals=residuals,
        l2=_rms(residuals),
        linf=float(np.max(np.abs(residuals))),
        ddt_l2=ddt_l2,
        flux_l2=flux_l2,
        normalized_l2=_rms(residuals) / max(ddt_l2, flux_l2, _TINY),
        comparison_l2=comparison_l2,
        comparison_rel_diff=comparison_rel_diff,
    )


def global_invariant(
    law: ConservationLaw,
    forward: Trajectory,
    adjoint: Trajectory,
    grid: GridSpec,
    order: int = 2,
) -> GlobalInvariantSeries:
    """Box integral Σ τ·dV of the law's density at every admissible time."""
    from .noether import derivative_bundle

    _check_aligned(forward, adjoint)
    params = forward.params
    n = len(forward)
    ks = range(1, n - 1) if law.uses_derivatives else range(n)
    dV = grid.cell_volume
    times, values = [], []
    for k in ks:
        derivs = derivative_bundle(forward, k, order) if law.uses_derivatives else None
        tau = law.tau(forward.states[k], adjoint.states[k], derivs, grid, params)
        times.append(forward.states[k].t)
        values.append(float(np.sum(tau) * dV))
    return GlobalInvariantSeries(times=np.array(times), values=np.array(values))
