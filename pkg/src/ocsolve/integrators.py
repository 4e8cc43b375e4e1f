"""Explicit ODE integrators on uniform time grids.

The sweep solver drives states forward and adjoints backward with the
classical fourth-order Runge-Kutta scheme, the direct transcription uses
forward Euler, and an adaptive Dormand-Prince 5(4) pair is available for
reference solutions in accuracy studies.

Conventions: a state (or adjoint) trajectory is a plain ``(N+1, n)`` float
array whose rows sit on the grid nodes, and a control grid is ``(N+1, m)``
(an ``(N+1,)`` vector is accepted when m = 1).  All integrators are pure
functions; they allocate fresh arrays and never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "TimeGrid",
    "IntegrationError",
    "DopriResult",
    "as_control_grid",
    "rk4_forward",
    "rk4_backward",
    "euler_forward",
    "dopri45",
]

Dynamics = Callable[[float, np.ndarray, np.ndarray], np.ndarray]
AdjointRhs = Callable[[float, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class IntegrationError(RuntimeError):
    """A trajectory left the finite range, or an adaptive step underflowed."""

    def __init__(self, message: str, node: int | None = None) -> None:
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class TimeGrid:
    """Uniform mesh with ``n_intervals`` steps (``n_intervals + 1`` nodes)."""

    t0: float
    tf: float
    n_intervals: int

    def __post_init__(self) -> None:
        if not self.tf > self.t0:
            raise ValueError(f"need t0 < tf, got [{self.t0}, {self.tf}]")
        if self.n_intervals < 1:
            raise ValueError("n_intervals must be >= 1")

    @property
    def h(self) -> float:
        """Step size (tf - t0) / N."""
        return (self.tf - self.t0) / self.n_intervals

    @property
    def n_nodes(self) -> int:
        return self.n_intervals + 1

    @property
    def nodes(self) -> np.ndarray:
        """Node times t_i = t0 + i h for i = 0..N."""
        return np.linspace(self.t0, self.tf, self.n_intervals + 1)


def as_control_grid(values, grid: TimeGrid, n_controls: int | None = None) -> np.ndarray:
    """Normalise control values to an ``(N+1, m)`` float array on ``grid``.

    Accepts a scalar (broadcast to every node), an ``(N+1,)`` vector for a
    single control, or a ready ``(N+1, m)`` array.
    """
    n_nodes = grid.n_nodes
    u = np.asarray(values, dtype=float)
    if u.ndim == 0:
        return np.full((n_nodes, n_controls or 1), float(u))
    if u.ndim == 1:
        if u.shape[0] != n_nodes:
            raise ValueError(f"control vector has {u.shape[0]} nodes, grid has {n_nodes}")
        u = u[:, None]
    elif u.ndim != 2 or u.shape[0] != n_nodes:
        raise ValueError(f"control grid shape {u.shape} does not match {n_nodes} nodes")
    if n_controls is not None and u.shape[1] != n_controls:
        raise ValueError(f"expected {n_controls} control components, got {u.shape[1]}")
    return u


def _check_finite(row: np.ndarray, node: int, kind: str) -> None:
    if not np.all(np.isfinite(row)):
        raise IntegrationError(f"non-finite {kind} at node {node}", node=node)


def rk4_forward(dynamics: Dynamics, x0, control, grid: TimeGrid) -> np.ndarray:
    """Integrate ``x' = dynamics(t, x, u)`` forward with classical RK4.

    Stage controls follow the nodal-grid convention: u_i at the left node,
    the average (u_i + u_{i+1}) / 2 at both half steps, and u_{i+1} at the
    right node.  Returns the ``(N+1, n)`` trajectory with row 0 equal to
    ``x0``; raises :class:`IntegrationError` if any state goes non-finite.
    """
    u = as_control_grid(control, grid)
    x_start = np.asarray(x0, dtype=float).ravel()
    nodes = grid.nodes
    h = grid.h
    half = 0.5 * h
    n_steps = grid.n_intervals

    out = np.empty((n_steps + 1, x_start.size))
    out[0] = x_start
    xi = x_start
    for i in range(n_steps):
        ti = nodes[i]
        ui = u[i]
        un = u[i + 1]
        um = 0.5 * (ui + un)
        k1 = dynamics(ti, xi, ui)
        k2 = dynamics(ti + half, xi + half * k1, um)
        k3 = dynamics(ti + half, xi + half * k2, um)
        k4 = dynamics(ti + h, xi + h * k3, un)
        xi = xi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(xi, i + 1, "state")
        out[i + 1] = xi
    return out


def rk4_backward(adjoint_rhs: AdjointRhs, lambda_tf, states, control, grid: TimeGrid) -> np.ndarray:
    """Integrate an adjoint equation backward from ``lambda(tf) = lambda_tf``.

    Sweeps from node N down to node 0 with RK4.  States at the half steps
    are the nodal averages (x_j + x_{j-1}) / 2, the end stage uses x_{j-1},
    and the control is held at u_j throughout each step (the nodal-grid
    convention for the backward pass).  The result is stored in forward
    node order: row i corresponds to t_i, row N equals ``lambda_tf``.
    """
    u = as_control_grid(control, grid)
    x = np.asarray(states, dtype=float)
    if x.shape[0] != grid.n_nodes:
        raise ValueError(f"state trajectory has {x.shape[0]} rows, grid has {grid.n_nodes} nodes")
    lam_end = np.asarray(lambda_tf, dtype=float).ravel()
    nodes = grid.nodes
    h = grid.h
    half = 0.5 * h

    out = np.empty((grid.n_nodes, lam_end.size))
    out[grid.n_intervals] = lam_end
    lj = lam_end
    for j in range(grid.n_intervals, 0, -1):
        tj = nodes[j]
        uj = u[j]
        xj = x[j]
        xm = 0.5 * (x[j] + x[j - 1])
        xp = x[j - 1]
        k1 = adjoint_rhs(tj, xj, uj, lj)
        k2 = adjoint_rhs(tj - half, xm, uj, lj - half * k1)
        k3 = adjoint_rhs(tj - half, xm, uj, lj - half * k2)
        k4 = adjoint_rhs(tj - h, xp, uj, lj - h * k3)
        lj = lj - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(lj, j - 1, "adjoint")
        out[j - 1] = lj
    return out


def euler_forward(dynamics: Dynamics, x0, control, grid: TimeGrid) -> np.ndarray:
    """Integrate forward with the explicit Euler step x_{i+1} = x_i + h g(t_i, x_i, u_i).

    Only the left-node control is sampled; u_N never enters the recursion.
    """
    u = as_control_grid(control, grid)
    x_start = np.asarray(x0, dtype=float).ravel()
    nodes = grid.nodes
    h = grid.h

    out = np.empty((grid.n_nodes, x_start.size))
    out[0] = x_start
    xi = x_start
    for i in range(grid.n_intervals):
        xi = xi + h * dynamics(nodes[i], xi, u[i])
        _check_finite(xi, i + 1, "state")
        out[i + 1] = xi
    return out


@dataclass(frozen=True)
class DopriResult:
    """Adaptive integration output: accepted nodes and step statistics."""

    t: np.ndarray
    states: np.ndarray
    n_accepted: int
    n_rejected: int


# Dormand-Prince 5(4) tableau; the fifth-order solution is propagated and the
# first-same-as-last stage is reused across accepted steps.
_DP_C = (0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0)
_DP_A = (
    (0.2,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_DP_B5 = np.array([35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0])
_DP_B4 = np.array(
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0]
)
_DP_E = _DP_B5 - _DP_B4


def dopri45(
    dynamics: Dynamics,
    x0,
    control_fn: Callable[[float], np.ndarray],
    t0: float,
    tf: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> DopriResult:
    """Adaptive Dormand-Prince 5(4) integration of ``x' = dynamics(t, x, u(t))``.

    ``control_fn`` maps a time to the control vector (scalars are accepted).
    The step size is driven by the embedded error estimate with proportional
    control: a step is accepted when the weighted RMS error is at most one,
    and the next step is scaled by ``0.9 * err**(-1/5)`` clipped to
    [0.2, 5.0].  Intended for reference trajectories in accuracy tests, so
    the result carries its own accepted node set rather than a fixed grid.

    Raises :class:`IntegrationError` when the step underflows below
    ``1e-12 * (tf - t0)`` or a state goes non-finite.
    """
    if rtol <= 0.0 or atol <= 0.0:
        raise ValueError("rtol and atol must be positive")
    if not tf > t0:
        raise ValueError(f"need t0 < tf, got [{t0}, {tf}]")

    def u_at(t: float) -> np.ndarray:
        return np.atleast_1d(np.asarray(control_fn(t), dtype=float))

    y = np.asarray(x0, dtype=float).ravel()
    t = float(t0)
    span = tf - t0
    h_min = 1e-12 * span
    h = span / 100.0

    ts = [t]
    ys = [y]
    n_accepted = 0
    n_rejected = 0

    k = np.empty((7, y.size))
    k[0] = dynamics(t, y, u_at(t))
    while t < tf:
        h = min(h, tf - t)
        for s in range(1, 7):
            ts_stage = t + _DP_C[s - 1] * h
            y_stage = y + h * np.dot(_DP_A[s - 1], k[:s])
            k[s] = dynamics(ts_stage, y_stage, u_at(ts_stage))
        y_new = y + h * np.dot(_DP_B5, k)
        err_vec = h * np.dot(_DP_E, k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))

        if err <= 1.0:
            t = t + h
            y = y_new
            _check_finite(y, len(ts), "state")
            ts.append(t)
            ys.append(y)
            k[0] = k[6]  # FSAL
            n_accepted += 1
        else:
            n_rejected += 1

        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h = h * factor
        if h < h_min and t < tf:
            raise IntegrationError(
                f"step size underflow at t = {t} (h = {h:.3e} < {h_min:.3e})", node=len(ts) - 1
            )
    return DopriResult(t=np.array(ts), states=np.array(ys), n_accepted=n_accepted, n_rejected=n_rejected)
