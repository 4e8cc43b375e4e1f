"""Direct method: Euler transcription to a box-constrained NLP, solved by
projected gradient descent with exact discrete-adjoint gradients.

The Mayer-form problem is reduced by single shooting: propagating the Euler
recursion x_{i+1} = x_i + h g(t_i, x_i, u_i) eliminates the states, leaving
the node controls as the only decision variables with replicated box bounds.
The resulting objective F(u) is minimised by

    u+ = clip(u - alpha grad F(u))

with a Barzilai-Borwein trial step safeguarded by Armijo backtracking, so the
accepted objective values decrease strictly until termination.  Gradients
come from the exact reverse recursion through the Euler steps (analytic
Jacobians of the dynamics when the problem carries them, central differences
otherwise), and :func:`constraint_residuals` re-exposes the Euler defects of
the full transcription for verification - they vanish identically on any
single-shooting result by construction.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .integrators import IntegrationError, TimeGrid, as_control_grid, euler_forward
from .problem import OcProblem, negate_sense, to_mayer

__all__ = [
    "Nlp",
    "DirectConfig",
    "DirectResult",
    "transcribe_euler",
    "projected_gradient_solve",
    "constraint_residuals",
    "solve_direct",
]


@dataclass(frozen=True)
class Nlp:
    """Reduced (single-shooting) problem over node controls.

    The decision vector is node-major: entry ``i * n_controls + j`` is
    control component j at node i.  ``objective`` and ``gradient`` accept the
    flat vector (a matching ``(N+1, m)`` array also works).  ``problem`` is
    the underlying Mayer-form problem in minimisation sense, or ``None`` for
    synthetic test objectives.
    """

    n_vars: int
    n_controls: int
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    lower: np.ndarray
    upper: np.ndarray
    grid: TimeGrid
    problem: OcProblem | None


@dataclass(frozen=True)
class DirectConfig:
    """Projected-gradient knobs (Armijo constant, backtracking, stopping)."""

    n_intervals: int = 3000
    grad_tol: float = 1e-6
    max_iter: int = 5000
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 1.0
    initial_control: float | np.ndarray | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.grad_tol <= 0.0 or self.initial_step <= 0.0:
            raise ValueError("tolerances and initial_step must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class DirectResult:
    """Direct-solver output.

    ``states`` is the Euler trajectory of the Mayer-form problem at the final
    control (including the augmented cost state), or ``None`` for synthetic
    NLPs without dynamics.  ``objective`` equals the terminal cost of that
    trajectory; the unused last node control is reported equal to its
    neighbour for plotting continuity.
    """

    control: np.ndarray
    states: np.ndarray | None
    objective: float
    iterations: int
    converged: bool
    projected_grad_norm: float
    grid: TimeGrid


def _fd_step(value: float) -> float:
    return 1e-6 * max(1.0, abs(value))


def _fd_dynamics_dx(dynamics, t, x, u):
    n = x.size
    jac = np.empty((n, n))
    for k in range(n):
        step = _fd_step(x[k])
        xp = x.copy()
        xp[k] += step
        xm = x.copy()
        xm[k] -= step
        jac[:, k] = (np.asarray(dynamics(t, xp, u)) - np.asarray(dynamics(t, xm, u))) / (2.0 * step)
    return jac


def _fd_dynamics_du(dynamics, t, x, u):
    jac = np.empty((x.size, u.size))
    for k in range(u.size):
        step = _fd_step(u[k])
        up = u.copy()
        up[k] += step
        um = u.copy()
        um[k] -= step
        jac[:, k] = (np.asarray(dynamics(t, x, up)) - np.asarray(dynamics(t, x, um))) / (2.0 * step)
    return jac


def _fd_terminal_dxf(terminal_cost, t0, x_start, tf, x_end):
    grad = np.empty(x_end.size)
    for k in range(x_end.size):
        step = _fd_step(x_end[k])
        xp = x_end.copy()
        xp[k] += step
        xm = x_end.copy()
        xm[k] -= step
        grad[k] = (terminal_cost(t0, x_start, tf, xp) - terminal_cost(t0, x_start, tf, xm)) / (2.0 * step)
    return grad


def transcribe_euler(p_mayer: OcProblem, grid: TimeGrid) -> Nlp:
    """Reduce a Mayer-form problem to a box-constrained NLP over controls.

    ``objective(u)`` runs the Euler recursion from x0 and returns the
    terminal cost; ``gradient(u)`` is its exact derivative via the discrete
    adjoint recursion

        p_N = d(terminal cost)/dx_N,
        p_i = p_{i+1} + h (dg/dx)^T p_{i+1},
        dF/du_i = h (dg/du)^T p_{i+1},

    with a zero entry for the unused last-node control.  Maximisation
    problems are negated so the NLP objective is always to be minimised.
    """
    if p_mayer.running_cost is not None:
        raise ValueError("transcribe_euler expects a Mayer-form problem (running_cost None); use to_mayer first")
    pm = negate_sense(p_mayer) if p_mayer.sense == "max" else p_mayer

    n_nodes = grid.n_nodes
    m = pm.n_controls
    n_vars = n_nodes * m
    h = grid.h
    nodes = grid.nodes
    dynamics = pm.dynamics
    terminal = pm.terminal_cost
    jac_x = pm.dynamics_dx
    jac_u = pm.dynamics_du
    terminal_grad = pm.terminal_cost_dxf

    def _controls(u_vec) -> np.ndarray:
        u = np.asarray(u_vec, dtype=float)
        if u.size != n_vars:
            raise ValueError(f"decision vector has {u.size} entries, expected {n_vars}")
        return u.reshape(n_nodes, m)

    def objective(u_vec) -> float:
        u = _controls(u_vec)
        x = euler_forward(dynamics, pm.x0, u, grid)
        value = terminal(grid.t0, x[0], grid.tf, x[-1]) if terminal is not None else 0.0
        return float(value)

    def gradient(u_vec) -> np.ndarray:
        u = _controls(u_vec)
        x = euler_forward(dynamics, pm.x0, u, grid)
        if terminal is None:
            return np.zeros(n_vars)
        if terminal_grad is not None:
            p = np.asarray(terminal_grad(grid.t0, x[0], grid.tf, x[-1]), dtype=float)
        else:
            p = _fd_terminal_dxf(terminal, grid.t0, x[0], grid.tf, x[-1])
        grad = np.zeros((n_nodes, m))
        for i in range(grid.n_intervals - 1, -1, -1):
            ti = nodes[i]
            xi = x[i]
            ui = u[i]
            ju = jac_u(ti, xi, ui) if jac_u is not None else _fd_dynamics_du(dynamics, ti, xi, ui)
            grad[i] = h * (p @ ju)
            jx = jac_x(ti, xi, ui) if jac_x is not None else _fd_dynamics_dx(dynamics, ti, xi, ui)
            p = p + h * (jx.T @ p)
        if not np.all(np.isfinite(grad)):
            raise IntegrationError("non-finite gradient in discrete adjoint recursion")
        return grad.ravel()

    return Nlp(
        n_vars=n_vars,
        n_controls=m,
        objective=objective,
        gradient=gradient,
        lower=np.tile(pm.control_lower, n_nodes),
        upper=np.tile(pm.control_upper, n_nodes),
        grid=grid,
        problem=pm,
    )


def projected_gradient_solve(nlp: Nlp, config: DirectConfig | None = None) -> DirectResult:
    """Minimise the NLP by projected gradient with Armijo backtracking.

    Trial steps use the Barzilai-Borwein spectral length (seeded by
    ``initial_step`` on the first iteration, doubled after iterations where
    curvature information is unusable) and are backtracked until the
    sufficient-decrease condition F(u+) <= F(u) + c <grad F, u+ - u> holds,
    so accepted objective values are strictly decreasing.  Termination is by
    the projected-gradient norm |u - clip(u - grad F)|_inf <= grad_tol,
    iteration cap, or step underflow (reported via ``converged=False``).
    """
    cfg = config if config is not None else DirectConfig()
    lower, upper = nlp.lower, nlp.upper

    if cfg.initial_control is None:
        u = np.zeros(nlp.n_vars)
    else:
        u = as_control_grid(cfg.initial_control, nlp.grid, nlp.n_controls).ravel().copy()
        if u.size != nlp.n_vars:
            raise ValueError(f"initial control has {u.size} entries, expected {nlp.n_vars}")
    u = np.clip(u, lower, upper)

    value = nlp.objective(u)
    grad = np.asarray(nlp.gradient(u), dtype=float)
    pg_norm = float(np.max(np.abs(u - np.clip(u - grad, lower, upper))))

    iterations = 0
    converged = pg_norm <= cfg.grad_tol
    failed = False
    alpha_accepted: float | None = None
    s = y = None

    while not converged and not failed and iterations < cfg.max_iter:
        if s is not None:
            sy = float(s @ y)
            alpha = float(np.clip((s @ s) / sy, 1e-10, 1e10)) if sy > 0.0 else 2.0 * alpha_accepted
        elif alpha_accepted is not None:
            alpha = 2.0 * alpha_accepted
        else:
            alpha = cfg.initial_step

        while True:
            u_new = np.clip(u - alpha * grad, lower, upper)
            direction = u_new - u
            slope = float(grad @ direction)
            value_new = nlp.objective(u_new)
            if slope < 0.0 and value_new <= value + cfg.armijo_c * slope:
                break
            alpha *= cfg.backtrack_factor
            if alpha < 1e-20:
                failed = True  # step underflow: no acceptable descent step
                break
        if failed:
            break

        grad_new = np.asarray(nlp.gradient(u_new), dtype=float)
        s = u_new - u
        y = grad_new - grad
        u, value, grad = u_new, value_new, grad_new
        alpha_accepted = alpha
        iterations += 1
        pg_norm = float(np.max(np.abs(u - np.clip(u - grad, lower, upper))))
        converged = pg_norm <= cfg.grad_tol

    control = u.reshape(nlp.grid.n_nodes, nlp.n_controls).copy()
    states = None
    if nlp.problem is not None:
        if nlp.grid.n_intervals >= 1:
            control[-1] = control[-2]  # u_N never enters the Euler recursion
        states = euler_forward(nlp.problem.dynamics, nlp.problem.x0, control, nlp.grid)
    return DirectResult(
        control=control,
        states=states,
        objective=float(value),
        iterations=iterations,
        converged=converged,
        projected_grad_norm=pg_norm,
        grid=nlp.grid,
    )


def constraint_residuals(p_mayer: OcProblem, states, control, grid: TimeGrid) -> np.ndarray:
    """Euler defect residuals x_{i+1} - x_i - h g(t_i, x_i, u_i), flattened.

    On a trajectory produced by ``euler_forward`` with the same control the
    residuals are exactly zero (same floating-point operations), which is the
    full transcription's equality-constraint view of a shooting solution.
    """
    x = np.asarray(states, dtype=float)
    if x.shape[0] != grid.n_nodes:
        raise ValueError(f"state trajectory has {x.shape[0]} rows, grid has {grid.n_nodes} nodes")
    u = as_control_grid(control, grid)
    dynamics = p_mayer.dynamics
    nodes = grid.nodes
    h = grid.h
    res = np.empty((grid.n_intervals, x.shape[1]))
    for i in range(grid.n_intervals):
        res[i] = x[i + 1] - (x[i] + h * dynamics(nodes[i], x[i], u[i]))
    return res.ravel()


def solve_direct(problem: OcProblem, config: DirectConfig | None = None) -> DirectResult:
    """Convenience path: canonicalise, transcribe, and solve a problem directly.

    Converts to Mayer form, transcribes with Euler on a fresh grid, and runs
    the projected-gradient solver.  The reported objective is in the
    problem's own sense (negated back for maximisation problems); states are
    the augmented Euler trajectory at the final control.
    """
    cfg = config if config is not None else DirectConfig()
    grid = TimeGrid(problem.t0, problem.tf, cfg.n_intervals)
    nlp = transcribe_euler(to_mayer(problem), grid)
    result = projected_gradient_solve(nlp, cfg)
    if problem.sense == "max":
        result = dataclasses.replace(result, objective=-result.objective)
    return result
