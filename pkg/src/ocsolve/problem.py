"""Continuous-time optimal control problems and objective evaluation.

A problem is posed on a fixed horizon [t0, tf] with free terminal state:

    optimize  J = phi(t0, x(t0), tf, x(tf)) + integral of f(t, x, u) dt
    s.t.      x'(t) = g(t, x(t), u(t)),  x(t0) = x0,  a <= u(t) <= b.

``running_cost`` is f and ``terminal_cost`` is phi; either may be ``None``
meaning identically zero, which also classifies the problem: Lagrange
(phi = 0), Mayer (f = 0), or Bolza (both present).  Solvers canonicalise to
Mayer form via :func:`to_mayer` and always minimise internally; maximisation
is handled by :func:`negate_sense` at the boundary.

Optional analytic derivatives (``dynamics_dx``, ``dynamics_du``,
``running_cost_dx``, ``running_cost_du``, ``terminal_cost_dxf``) are used by
the direct solver's discrete adjoint; finite differences fill in when they
are absent.  All evaluators must be pure functions of their arguments - the
problem object is immutable and safe to share across threads.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .integrators import TimeGrid, as_control_grid

__all__ = ["OcProblem", "to_mayer", "negate_sense", "evaluate_objective"]

Dynamics = Callable[[float, np.ndarray, np.ndarray], np.ndarray]
RunningCost = Callable[[float, np.ndarray, np.ndarray], float]
TerminalCost = Callable[[float, np.ndarray, float, np.ndarray], float]


@dataclass(frozen=True)
class OcProblem:
    """Immutable optimal control problem on a fixed horizon with box-bounded controls."""

    t0: float
    tf: float
    x0: np.ndarray
    dynamics: Dynamics
    n_controls: int
    control_lower: np.ndarray
    control_upper: np.ndarray
    running_cost: RunningCost | None = None
    terminal_cost: TerminalCost | None = None
    sense: str = "min"
    dynamics_dx: Callable[[float, np.ndarray, np.ndarray], np.ndarray] | None = None
    dynamics_du: Callable[[float, np.ndarray, np.ndarray], np.ndarray] | None = None
    running_cost_dx: Callable[[float, np.ndarray, np.ndarray], np.ndarray] | None = None
    running_cost_du: Callable[[float, np.ndarray, np.ndarray], np.ndarray] | None = None
    terminal_cost_dxf: Callable[[float, np.ndarray, float, np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).ravel())
        object.__setattr__(self, "control_lower", np.asarray(self.control_lower, dtype=float).ravel())
        object.__setattr__(self, "control_upper", np.asarray(self.control_upper, dtype=float).ravel())
        if not self.tf > self.t0:
            raise ValueError(f"need t0 < tf, got [{self.t0}, {self.tf}]")
        if self.x0.size == 0 or not np.all(np.isfinite(self.x0)):
            raise ValueError("x0 must be a non-empty finite vector")
        if self.n_controls < 1:
            raise ValueError("n_controls must be >= 1")
        if self.control_lower.size != self.n_controls or self.control_upper.size != self.n_controls:
            raise ValueError("control bounds must have length n_controls")
        if np.any(self.control_lower > self.control_upper):
            raise ValueError("control_lower must be <= control_upper componentwise")
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")

    @property
    def n_states(self) -> int:
        return self.x0.size

    @property
    def form(self) -> str:
        """Classify the objective: 'lagrange', 'mayer', or 'bolza'."""
        if self.running_cost is None:
            return "mayer"
        if self.terminal_cost is None:
            return "lagrange"
        return "bolza"


def to_mayer(problem: OcProblem) -> OcProblem:
    """Rewrite the problem in Mayer form by appending a cost state.

    The extra component satisfies x_c' = f(t, x, u) with x_c(t0) = 0, the
    running cost of the result is zero, and its terminal cost is the original
    phi plus x_c(tf).  The original dynamics are untouched on the first
    n_states components, so trajectories of the embedded system are preserved
    exactly.  Analytic derivatives are carried over whenever every needed
    piece is available.
    """
    n = problem.n_states
    g = problem.dynamics
    f = problem.running_cost
    phi = problem.terminal_cost

    def dynamics_aug(t: float, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        out = np.empty(n + 1)
        out[:n] = g(t, x[:n], u)
        out[n] = f(t, x[:n], u) if f is not None else 0.0
        return out

    def terminal_aug(t0: float, x_start: np.ndarray, tf: float, x_end: np.ndarray) -> float:
        value = x_end[n]
        if phi is not None:
            value = phi(t0, x_start[:n], tf, x_end[:n]) + value
        return value

    dynamics_dx_aug = None
    if problem.dynamics_dx is not None and (f is None or problem.running_cost_dx is not None):
        jx, fdx = problem.dynamics_dx, problem.running_cost_dx

        def dynamics_dx_aug(t, x, u):
            out = np.zeros((n + 1, n + 1))
            out[:n, :n] = jx(t, x[:n], u)
            if f is not None:
                out[n, :n] = fdx(t, x[:n], u)
            return out

    dynamics_du_aug = None
    if problem.dynamics_du is not None and (f is None or problem.running_cost_du is not None):
        ju, fdu = problem.dynamics_du, problem.running_cost_du

        def dynamics_du_aug(t, x, u):
            out = np.zeros((n + 1, problem.n_controls))
            out[:n, :] = ju(t, x[:n], u)
            if f is not None:
                out[n, :] = fdu(t, x[:n], u)
            return out

    if phi is None:
        def terminal_dxf_aug(t0, x_start, tf, x_end):
            grad = np.zeros(n + 1)
            grad[n] = 1.0
            return grad
    elif problem.terminal_cost_dxf is not None:
        phi_dxf = problem.terminal_cost_dxf

        def terminal_dxf_aug(t0, x_start, tf, x_end):
            grad = np.empty(n + 1)
            grad[:n] = phi_dxf(t0, x_start[:n], tf, x_end[:n])
            grad[n] = 1.0
            return grad
    else:
        terminal_dxf_aug = None

    return OcProblem(
        t0=problem.t0,
        tf=problem.tf,
        x0=np.append(problem.x0, 0.0),
        dynamics=dynamics_aug,
        n_controls=problem.n_controls,
        control_lower=problem.control_lower,
        control_upper=problem.control_upper,
        running_cost=None,
        terminal_cost=terminal_aug,
        sense=problem.sense,
        dynamics_dx=dynamics_dx_aug,
        dynamics_du=dynamics_du_aug,
        terminal_cost_dxf=terminal_dxf_aug,
    )


def negate_sense(problem: OcProblem) -> OcProblem:
    """Flip min <-> max, negating both cost terms (and their derivatives).

    For every trajectory the objective of the result is exactly the negation
    of the original, so applying this twice reproduces the original objective
    values bit for bit.
    """
    f = problem.running_cost
    phi = problem.terminal_cost
    fdx = problem.running_cost_dx
    fdu = problem.running_cost_du
    phi_dxf = problem.terminal_cost_dxf
    return dataclasses.replace(
        problem,
        sense="max" if problem.sense == "min" else "min",
        running_cost=None if f is None else (lambda t, x, u: -f(t, x, u)),
        terminal_cost=None if phi is None else (lambda t0, xs, tf, xe: -phi(t0, xs, tf, xe)),
        running_cost_dx=None if fdx is None else (lambda t, x, u: -np.asarray(fdx(t, x, u))),
        running_cost_du=None if fdu is None else (lambda t, x, u: -np.asarray(fdu(t, x, u))),
        terminal_cost_dxf=None if phi_dxf is None else (lambda t0, xs, tf, xe: -np.asarray(phi_dxf(t0, xs, tf, xe))),
    )


def evaluate_objective(problem: OcProblem, states, control, grid: TimeGrid, integrator: str = "rk4") -> float:
    """Objective value of a discrete (trajectory, control) pair on ``grid``.

    The integral term is accumulated exactly the way the matching integrator
    would propagate the Mayer cost state along the supplied trajectory:

    * ``integrator="rk4"`` rebuilds the RK4 stages from each node (control at
      half steps is the nodal average) and applies the Simpson-type weights
      h/6 (1, 2, 2, 1) to the running cost at the stage points.  For a
      trajectory produced by ``rk4_forward`` with the same control this
      reproduces the augmented terminal state of :func:`to_mayer` bit for bit.
    * ``integrator="euler"`` takes the left-endpoint sum h * f(t_i, x_i, u_i),
      matching the Euler transcription's cost recursion.

    Objective evaluation therefore can never disagree with the solvers'
    discretizations.
    """
    x = np.asarray(states, dtype=float)
    if x.ndim != 2 or x.shape != (grid.n_nodes, problem.n_states):
        raise ValueError(
            f"state trajectory shape {x.shape} does not match "
            f"({grid.n_nodes}, {problem.n_states})"
        )
    u = as_control_grid(control, grid, problem.n_controls)

    value = 0.0
    if problem.terminal_cost is not None:
        value = float(problem.terminal_cost(grid.t0, x[0], grid.tf, x[-1]))

    f = problem.running_cost
    if f is None:
        return value

    nodes = grid.nodes
    h = grid.h
    cost = 0.0
    if integrator == "rk4":
        g = problem.dynamics
        half = 0.5 * h
        for i in range(grid.n_intervals):
            ti = nodes[i]
            xi = x[i]
            ui = u[i]
            un = u[i + 1]
            um = 0.5 * (ui + un)
            k1 = g(ti, xi, ui)
            c1 = f(ti, xi, ui)
            s2 = xi + half * k1
            k2 = g(ti + half, s2, um)
            c2 = f(ti + half, s2, um)
            s3 = xi + half * k2
            k3 = g(ti + half, s3, um)
            c3 = f(ti + half, s3, um)
            s4 = xi + h * k3
            c4 = f(ti + h, s4, un)
            cost = cost + (h / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
    elif integrator == "euler":
        for i in range(grid.n_intervals):
            cost = cost + h * f(nodes[i], x[i], u[i])
    else:
        raise ValueError(f"unknown integrator {integrator!r}, expected 'rk4' or 'euler'")
    return value + cost
