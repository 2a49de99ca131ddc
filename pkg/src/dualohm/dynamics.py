"""Time integration and exact solution families.

The forward system (method of lines, collocated central differences):

    dE/dt =  curl B − σ_e E
    dB/dt = −curl E − σ_m B

and the adjoint system for (V, W):

    dW/dt = σ_e W − curl V
    dV/dt = curl W + σ_m V

R_e and R_m are algebraic constraints of the adjoint system (identically
zero on solutions), so the integrator carries them through unchanged.

Adjoint solutions can also be manufactured from any forward solution by
sampling it at negated times: V(x,t) = B'(x,−t), W(x,t) = E'(x,−t).  The
signs work out because time reversal flips the damping terms into the
anti-damped ones of the adjoint equations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import operators
from .model import AdjointState, Array, FieldState, GridSpec, MediumParams, gauss_charges

BLOWUP_LIMIT = 1e12


class BlowUpError(RuntimeError):
    """Raised when an integrated field exceeds the blow-up guard."""


@dataclass(frozen=True)
class Trajectory:
    """Uniformly spaced snapshots of one integrated (or sampled) solution."""

    states: tuple
    dt: float
    params: MediumParams
    grid: GridSpec

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise ValueError("trajectory needs at least one state")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        t0 = self.states[0].t
        for k, s in enumerate(self.states):
            if abs(s.t - (t0 + k * self.dt)) > 1e-9 * max(self.dt, 1.0):
                raise ValueError(
                    f"non-uniform time spacing at index {k}: t={s.t}, "
                    f"expected {t0 + k * self.dt}"
                )

    def __len__(self) -> int:
        return len(self.states)

    @property
    def times(self) -> Array:
        return np.array([s.t for s in self.states])

    @property
    def is_adjoint(self) -> bool:
        return isinstance(self.states[0], AdjointState)


def rhs_forward(
    state: FieldState, params: MediumParams, grid: GridSpec, order: int = 2
) -> tuple[Array, Array]:
    """Rates (dE/dt, dB/dt) of the forward system."""
    grid.check_triple(state.E, "E")
    grid.check_triple(state.B, "B")
    dE = operators.curl(state.B, grid, order) - params.sigma_e * state.E
    dB = -operators.curl(state.E, grid, order) - params.sigma_m * state.B
    return dE, dB


def rhs_adjoint(
    adj: AdjointState, params: MediumParams, grid: GridSpec, order: int = 2
) -> tuple[Array, Array]:
    """Rates (dV/dt, dW/dt) of the adjoint system; R_e, R_m are constraints."""
    grid.check_triple(adj.V, "V")
    grid.check_triple(adj.W, "W")
    dV = operators.curl(adj.W, grid, order) + params.sigma_m * adj.V
    dW = params.sigma_e * adj.W - operators.curl(adj.V, grid, order)
    return dV, dW


def _guard(arrays, t: float) -> None:
    worst = max(float(np.max(np.abs(a))) for a in arrays)
    if not np.isfinite(worst) or worst > BLOWUP_LIMIT:
        raise BlowUpError(
            f"integration blew up at t={t:g}: max |field| = {worst:.3e} "
            f"exceeds guard {BLOWUP_LIMIT:.0e}"
        )


def step_rk4(
    state,
    params: MediumParams,
    grid: GridSpec,
    dt: float,
    direction: str = "forward",
    order: int = 2,
    check_cfl: bool = True,
):
    """One classical Runge-Kutta step of either system, forward or backward."""
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be forward or backward, got {direction}")
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    if check_cfl and dt > grid.min_spacing:
        warnings.warn(
            f"dt={dt:g} exceeds the advisory bound min(dx,dy,dz)={grid.min_spacing:g}",
            stacklevel=2,
        )
    h = dt if direction == "forward" else -dt

    if isinstance(state, AdjointState):
        pair, rebuild = (state.V, state.W), "adjoint"
        rhs = lambda a, b: rhs_adjoint(
            AdjointState(state.t, a, b, state.R_e, state.R_m), params, grid, order
        )
    else:
        pair, rebuild = (state.E, state.B), "forward"
        rhs = lambda a, b: rhs_forward(FieldState(state.t, a, b), params, grid, order)

    a0, b0 = pair
    ka1, kb1 = rhs(a0, b0)
    ka2, kb2 = rhs(a0 + 0.5 * h * ka1, b0 + 0.5 * h * kb1)
    ka3, kb3 = rhs(a0 + 0.5 * h * ka2, b0 + 0.5 * h * kb2)
    ka4, kb4 = rhs(a0 + h * ka3, b0 + h * kb3)
    a1 = a0 + (h / 6.0) * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4)
    b1 = b0 + (h / 6.0) * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4)
    t1 = state.t + h
    _guard((a1, b1), t1)

    if rebuild == "adjoint":
        return AdjointState(t1, a1, b1, state.R_e, state.R_m)
    return FieldState(t1, a1, b1)


def integrate(
    state0,
    params: MediumParams,
    grid: GridSpec,
    dt: float,
    n_steps: int,
    order: int = 2,
    direction: str = "forward",
    check_cfl: bool = True,
) -> Trajectory:
    """Integrate n_steps of RK4; snapshots are returned in ascending time.

    Backward runs march from state0.t down to state0.t − n_steps·dt and the
    snapshot list is reversed so the Trajectory invariant (positive dt,
    ascending times) holds either way.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    states = [state0]
    s = state0
    for _ in range(n_steps):
        s = step_rk4(s, params, grid, dt, direction, order, check_cfl)
        states.append(s)
    if direction == "backward":
        states.reverse()
    return Trajectory(tuple(states), dt, params, grid)


def exact_uniform(E0, B0, params: MediumParams, grid: GridSpec, t: float) -> FieldState:
    """Spatially constant solution: each field decays with its own conductivity."""
    E0 = np.asarray(E0, dtype=float).reshape(3)
    B0 = np.asarray(B0, dtype=float).reshape(3)
    shape = (3,) + grid.shape
    E = np.broadcast_to(
        (E0 * np.exp(-params.sigma_e * t))[:, None, None, None], shape
    ).copy()
    B = np.broadcast_to(
        (B0 * np.exp(-params.sigma_m * t))[:, None, None, None], shape
    ).copy()
    return FieldState(t, E, B)


def exact_damped_plane_wave(
    profile: Callable[[Array], Array],
    params: MediumParams,
    grid: GridSpec,
    t: float,
) -> FieldState:
    """Damped wave travelling along x: E = (0, f, 0), B = (0, 0, f).

    f(x,t) = e^{−σt}·g(x − t) with g periodic over the box length; only
    valid when the two conductivities coincide (σ_e = σ_m = σ).
    """
    if not params.sigma_equal:
        raise ValueError(
            "damped plane wave requires sigma_e == sigma_m, got "
            f"{params.sigma_e} / {params.sigma_m}"
        )
    sigma = params.sigma_e
    Lx = grid.lengths[0]
    x, _, _ = grid.coordinates()
    arg = np.mod(x - t, Lx)
    f = np.exp(-sigma * t) * np.broadcast_to(profile(arg), grid.shape)
    zero = np.zeros(grid.shape)
    E = np.stack((zero, f, zero))
    B = np.stack((zero, zero, f))
    return FieldState(t, E, B)


def forward_residual(
    traj: Trajectory, index: int, order: int = 2
) -> tuple[Array, Array]:
    """Discrete residual of the two forward curl equations at an interior
    snapshot: (ddt E − curl B + σ_e E, ddt B + curl E + σ_m B)."""
    if traj.is_adjoint:
        raise ValueError("forward_residual expects a forward trajectory")
    s = traj.states[index]
    dE = operators.ddt_centered([st.E for st in traj.states], traj.dt, index)
    dB = operators.ddt_centered([st.B for st in traj.states], traj.dt, index)
    rate_E, rate_B = rhs_forward(s, traj.params, traj.grid, order)
    return dE - rate_E, dB - rate_B


def adjoint_residual(
    traj: Trajectory, index: int, order: int = 2
) -> tuple[Array, Array]:
    """Discrete residual of the two adjoint curl equations at an interior
    snapshot: (ddt V − curl W − σ_m V, ddt W + curl V − σ_e W)."""
    if not traj.is_adjoint:
        raise ValueError("adjoint_residual expects an adjoint trajectory")
    s = traj.states[index]
    dV = operators.ddt_centered([st.V for st in traj.states], traj.dt, index)
    dW = operators.ddt_centered([st.W for st in traj.states], traj.dt, index)
    rate_V, rate_W = rhs_adjoint(s, traj.params, traj.grid, order)
    return dV - rate_V, dW - rate_W


def exact_uniform_adjoint(
    V0, W0, params: MediumParams, grid: GridSpec, t: float
) -> AdjointState:
    """Spatially constant adjoint solution for arbitrary conductivities:
    V(t) = V0·e^{σ_m t}, W(t) = W0·e^{σ_e t}, multipliers zero.

    This is the time-reversed image of :func:`exact_uniform`; with equal
    conductivities and V0 = W0 = x̂ it is the classic single-component
    exponential adjoint.
    """
    V0 = np.asarray(V0, dtype=float).reshape(3)
    W0 = np.asarray(W0, dtype=float).reshape(3)
    shape = (3,) + grid.shape
    V = np.broadcast_to(
        (V0 * np.exp(params.sigma_m * t))[:, None, None, None], shape
    ).copy()
    W = np.broadcast_to(
        (W0 * np.exp(params.sigma_e * t))[:, None, None, None], shape
    ).copy()
    zero = np.zeros(grid.shape)
    return AdjointState(t, V, W, zero, zero.copy())


def sample_closed_form(
    family: Callable[[float], FieldState],
    t0: float,
    dt: float,
    n_steps: int,
    params: MediumParams,
    grid: GridSpec,
) -> Trajectory:
    """Trajectory built by evaluating a closed-form solution at uniform times."""
    states = [family(t0 + k * dt) for k in range(n_steps + 1)]
    return Trajectory(tuple(states), dt, params, grid)


@dataclass(frozen=True)
class ModeSuperposition:
    """Seeded superposition of periodic Fourier modes, one set per component.

    The mode table depends only on the seed, so the same continuum field can
    be sampled on every rung of a refinement ladder.
    """

    wavevectors: Array  # (n_modes, 3) integers
    amplitudes: Array  # (6, n_modes): E1..E3, B1..B3
    phases: Array  # (6, n_modes)

    def evaluate(self, grid: GridSpec, t: float = 0.0) -> FieldState:
        x, y, z = grid.coordinates()
        Lx, Ly, Lz = grid.lengths
        comps = []
        for c in range(6):
            f = np.zeros(grid.shape)
            for m, k in enumerate(self.wavevectors):
                phase = 2.0 * np.pi * (k[0] * x / Lx + k[1] * y / Ly + k[2] * z / Lz)
                f = f + self.amplitudes[c, m] * np.cos(phase + self.phases[c, m])
            comps.append(f)
        return FieldState(t, np.stack(comps[:3]), np.stack(comps[3:]))


def random_modes(
    seed, n_modes: int = 4, kmax: int = 1, amplitude: float = 1.0
) -> ModeSuperposition:
    """Draw a reproducible smooth periodic field: n_modes randomly phased
    Fourier modes per component with |k|_∞ ≤ kmax (k = 0 excluded)."""
    if not 1 <= n_modes <= 8:
        raise ValueError(f"n_modes must be in 1..8, got {n_modes}")
    rng = np.random.default_rng(seed)
    kvecs = np.zeros((n_modes, 3), dtype=int)
    for m in range(n_modes):
        k = np.zeros(3, dtype=int)
        while not k.any():
            k = rng.integers(-kmax, kmax + 1, size=3)
        kvecs[m] = k
    amps = rng.normal(scale=amplitude / np.sqrt(n_modes), size=(6, n_modes))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(6, n_modes))
    return ModeSuperposition(kvecs, amps, phases)


def adjoint_from_time_reversal(primed: Trajectory, order: int = 2) -> Trajectory:
    """Adjoint trajectory on [0, T] from a forward trajectory on [−T, 0].

    V(x,t) = B'(x,−t) and W(x,t) = E'(x,−t); the multipliers are the Gauss
    residuals of the primed solution at −t, identically zero because the
    charges are themselves defined through the discrete divergence.
    """
    if primed.is_adjoint:
        raise ValueError("time reversal expects a forward trajectory")
    times = primed.times
    if abs(times[-1]) > 1e-9 * max(primed.dt, 1.0):
        raise ValueError(
            f"primed trajectory must end at t = 0 (covers [−T, 0]), ends at {times[-1]}"
        )
    n = len(primed) - 1
    adj_states = []
    for k in range(n + 1):
        src = primed.states[n - k]  # state at t' = −k·dt
        charges = gauss_charges(src, primed.grid, order)
        div_E = operators.divergence(src.E, primed.grid, order)
        div_B = operators.divergence(src.B, primed.grid, order)
        adj_states.append(
            AdjointState(
                t=k * primed.dt,
                V=src.B,
                W=src.E,
                R_e=div_E - charges.rho_e,
                R_m=div_B - charges.rho_m,
            )
        )
    return Trajectory(tuple(adj_states), primed.dt, primed.params, primed.grid)
