"""Backward-forward sweep solver for the PMP optimality system.

Given a problem plus its analytic PMP callbacks (Hamiltonian, adjoint
right-hand side, and pointwise control characterization), the solver
iterates:

1. start from an initial control guess (zero unless configured);
2. solve the states forward in time with RK4;
3. solve the adjoints backward in time from the transversality value
   lambda(tf) = 0 with RK4;
4. update the control from its characterization, clipped into the box,
   then blend with the previous iterate (relaxation);
5. stop once controls, states, and adjoints are all sufficiently close to
   the previous iteration under a summed relative test.

The solver minimises internally; a maximisation problem is negated on entry
together with its callbacks, and all reported quantities (objective,
adjoints, residuals) refer to the problem as given by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .integrators import TimeGrid, as_control_grid, rk4_backward, rk4_forward
from .problem import OcProblem, evaluate_objective, negate_sense

__all__ = [
    "PmpCallbacks",
    "SweepConfig",
    "SweepResult",
    "CallbackCheck",
    "clip_control",
    "negate_callbacks",
    "check_callbacks",
    "sweep_solve",
]


@dataclass(frozen=True)
class PmpCallbacks:
    """Analytic PMP ingredients for one problem.

    ``hamiltonian(t, x, u, lam)`` is the scalar H = f + lam . g,
    ``adjoint_rhs(t, x, u, lam)`` is -dH/dx, and ``control_update(t, x, lam)``
    returns the unclipped stationary control solving dH/du = 0.  The three
    must be mutually consistent; :func:`check_callbacks` verifies this
    numerically at randomized sample points.
    """

    hamiltonian: Callable[[float, np.ndarray, np.ndarray, np.ndarray], float]
    adjoint_rhs: Callable[[float, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    control_update: Callable[[float, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SweepConfig:
    """Sweep iteration knobs.

    ``tol`` is the relative convergence tolerance applied to controls,
    states, and adjoints; ``relaxation`` in (0, 1] blends the new
    characterized control with the previous iterate (1 means replace).
    """

    n_intervals: int = 3000
    tol: float = 1e-3
    relaxation: float = 0.5
    max_iter: int = 500
    initial_control: float | np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if not 0.0 < self.relaxation <= 1.0:
            raise ValueError("relaxation must lie in (0, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class SweepResult:
    """Converged (or last) sweep iterate with diagnostics.

    ``states``, ``adjoints``, and ``objective`` are re-simulated at the
    returned control so the triple is self-consistent; ``pmp_residual`` is
    the largest |dH/du| over nodes where the control is strictly inside its
    box.
    """

    states: np.ndarray
    adjoints: np.ndarray
    control: np.ndarray
    objective: float
    iterations: int
    converged: bool
    pmp_residual: float
    grid: TimeGrid


def clip_control(u_tilde, lower, upper) -> np.ndarray:
    """Componentwise median(a, u, b): clamp a control into its box."""
    u = np.asarray(u_tilde, dtype=float)
    a = np.asarray(lower, dtype=float)
    b = np.asarray(upper, dtype=float)
    if u.shape[-1:] != a.shape or a.shape != b.shape:
        raise ValueError(f"shape mismatch: control {u.shape}, bounds {a.shape} vs {b.shape}")
    return np.minimum(np.maximum(u, a), b)


def negate_callbacks(callbacks: PmpCallbacks) -> PmpCallbacks:
    """Callbacks consistent with the sense-negated problem.

    Negating the costs flips the Hamiltonian and the adjoint sign; the
    stationary control is invariant under the pairing lam -> -lam.  Running
    the sweep on (negate_sense(p), negate_callbacks(cb)) reproduces the
    original control iterates exactly, with adjoints negated.
    """
    ham = callbacks.hamiltonian
    rhs = callbacks.adjoint_rhs
    upd = callbacks.control_update
    return PmpCallbacks(
        hamiltonian=lambda t, x, u, lam: -ham(t, x, u, -lam),
        adjoint_rhs=lambda t, x, u, lam: -np.asarray(rhs(t, x, u, -lam)),
        control_update=lambda t, x, lam: upd(t, x, -lam),
    )


@dataclass(frozen=True)
class CallbackCheck:
    """Worst-case residuals from the randomized consistency check."""

    adjoint_rel_err: float
    stationarity_resid: float


def check_callbacks(
    problem: OcProblem,
    callbacks: PmpCallbacks,
    n_samples: int = 100,
    seed: int = 0,
) -> CallbackCheck:
    """Verify a callback triple against its own Hamiltonian numerically.

    At ``n_samples`` random points (t uniform on the horizon, states uniform
    on [0, 1] per component, controls uniform in the box, adjoints uniform on
    [-100, 100]) this checks that ``adjoint_rhs`` equals the negative
    central-difference gradient of H in x, and that dH/du vanishes at the
    characterized control.  Both residuals are scaled: the adjoint error
    relative to max(1, |grad H|_inf) and the stationarity residual relative
    to max(1, |H|).
    """
    rng = np.random.default_rng(seed)
    n = problem.n_states
    m = problem.n_controls
    ham = callbacks.hamiltonian

    worst_adjoint = 0.0
    worst_stationarity = 0.0
    for _ in range(n_samples):
        t = rng.uniform(problem.t0, problem.tf)
        x = rng.uniform(0.0, 1.0, n)
        u = rng.uniform(problem.control_lower, problem.control_upper)
        lam = rng.uniform(-100.0, 100.0, n)

        grad = np.empty(n)
        for k in range(n):
            step = 1e-5 * max(1.0, abs(x[k]))
            xp = x.copy()
            xp[k] += step
            xm = x.copy()
            xm[k] -= step
            grad[k] = (ham(t, xp, u, lam) - ham(t, xm, u, lam)) / (2.0 * step)
        rhs = np.asarray(callbacks.adjoint_rhs(t, x, u, lam), dtype=float)
        err = np.max(np.abs(rhs + grad)) / max(1.0, np.max(np.abs(grad)))
        worst_adjoint = max(worst_adjoint, float(err))

        u_star = np.atleast_1d(np.asarray(callbacks.control_update(t, x, lam), dtype=float))
        h_scale = max(1.0, abs(ham(t, x, u_star, lam)))
        for k in range(m):
            step = 1e-4 * max(1.0, abs(u_star[k]))
            up = u_star.copy()
            up[k] += step
            um = u_star.copy()
            um[k] -= step
            dhdu = (ham(t, x, up, lam) - ham(t, x, um, lam)) / (2.0 * step)
            worst_stationarity = max(worst_stationarity, abs(dhdu) / h_scale)
    return CallbackCheck(adjoint_rel_err=worst_adjoint, stationarity_resid=worst_stationarity)


def _within_tol(current: np.ndarray, previous: np.ndarray, tol: float) -> bool:
    # Relative summed test: tol * sum|v| - sum|v - v_prev| >= 0.
    return tol * np.abs(current).sum() - np.abs(current - previous).sum() >= 0.0


def _stationarity_residual(
    callbacks: PmpCallbacks,
    states: np.ndarray,
    adjoints: np.ndarray,
    control: np.ndarray,
    nodes: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
) -> float:
    """Max |dH/du| (central differences) over strictly interior control nodes."""
    margin = 1e-7 * (upper - lower)
    worst = 0.0
    for i in range(control.shape[0]):
        ui = control[i]
        interior = (ui > lower + margin) & (ui < upper - margin)
        if not interior.any():
            continue
        for k in np.flatnonzero(interior):
            step = 1e-4 * max(1.0, abs(ui[k]))
            up = ui.copy()
            up[k] += step
            um = ui.copy()
            um[k] -= step
            dhdu = (
                callbacks.hamiltonian(nodes[i], states[i], up, adjoints[i])
                - callbacks.hamiltonian(nodes[i], states[i], um, adjoints[i])
            ) / (2.0 * step)
            worst = max(worst, abs(dhdu))
    return worst


def sweep_solve(problem: OcProblem, callbacks: PmpCallbacks, config: SweepConfig | None = None) -> SweepResult:
    """Run the backward-forward sweep until convergence or ``max_iter``.

    Requires a free terminal state (transversality lambda(tf) = 0).  Each
    iteration integrates states forward and adjoints backward with RK4,
    clips the characterized control into the box, and relaxes it against the
    previous iterate.  Convergence requires, for each of u, x, and lambda,

        tol * sum|v| - sum|v - v_prev| >= 0.

    Exceeding ``max_iter`` is reported via ``converged=False``, not raised;
    integration failures propagate as :class:`IntegrationError`.  Identical
    inputs produce bitwise-identical results.
    """
    cfg = config if config is not None else SweepConfig()
    given_problem, given_callbacks = problem, callbacks
    if problem.sense == "max":
        problem = negate_sense(problem)
        callbacks = negate_callbacks(callbacks)

    grid = TimeGrid(problem.t0, problem.tf, cfg.n_intervals)
    nodes = grid.nodes
    lower = problem.control_lower
    upper = problem.control_upper
    omega = cfg.relaxation

    if cfg.initial_control is None:
        u = np.zeros((grid.n_nodes, problem.n_controls))
    else:
        u = as_control_grid(cfg.initial_control, grid, problem.n_controls).copy()
    u = np.clip(u, lower, upper)

    lam_tf = np.zeros(problem.n_states)
    x_prev: np.ndarray | None = None
    lam_prev: np.ndarray | None = None
    converged = False
    iterations = 0

    for _ in range(cfg.max_iter):
        iterations += 1
        u_old = u
        x = rk4_forward(problem.dynamics, problem.x0, u, grid)
        lam = rk4_backward(callbacks.adjoint_rhs, lam_tf, x, u, grid)

        u_char = np.empty_like(u)
        for i in range(grid.n_nodes):
            u_char[i] = callbacks.control_update(nodes[i], x[i], lam[i])
        u_char = np.clip(u_char, lower, upper)
        u = np.clip(omega * u_char + (1.0 - omega) * u_old, lower, upper)

        if (
            x_prev is not None
            and _within_tol(u, u_old, cfg.tol)
            and _within_tol(x, x_prev, cfg.tol)
            and _within_tol(lam, lam_prev, cfg.tol)
        ):
            converged = True
            break
        x_prev, lam_prev = x, lam

    # Re-simulate at the final control, against the caller's problem/callbacks,
    # so the returned triple is self-consistent and in the original sense.
    states = rk4_forward(given_problem.dynamics, given_problem.x0, u, grid)
    adjoints = rk4_backward(given_callbacks.adjoint_rhs, np.zeros(given_problem.n_states), states, u, grid)
    objective = evaluate_objective(given_problem, states, u, grid, integrator="rk4")
    residual = _stationarity_residual(given_callbacks, states, adjoints, u, nodes, lower, upper)
    return SweepResult(
        states=states,
        adjoints=adjoints,
        control=u,
        objective=float(objective),
        iterations=iterations,
        converged=converged,
        pmp_residual=float(residual),
        grid=grid,
    )
