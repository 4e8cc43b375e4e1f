"""Define a problem from scratch and validate both solvers against a
closed-form optimum.

The scalar regulator

    minimise  integral over [0, 1] of (x^2 + u^2) dt
    s.t.      x' = u,  x(0) = 1,  -1 <= u <= 1

has Hamiltonian H = x^2 + u^2 + lam u, adjoint lam' = -2x with lam(1) = 0,
and stationary control u = -lam / 2.  Eliminating lam gives x'' = x with
x(0) = 1 and x'(1) = 0, so

    x*(t) = cosh(1 - t) / cosh(1),   u*(t) = -sinh(1 - t) / cosh(1),

and the optimal value is J* = tanh(1).  The bound never activates
(|u*| <= tanh(1) < 1), making this a clean end-to-end correctness probe.
"""

import math

import numpy as np

from ocsolve import (
    DirectConfig,
    OcProblem,
    PmpCallbacks,
    SweepConfig,
    solve_direct,
    sweep_solve,
)

problem = OcProblem(
    t0=0.0,
    tf=1.0,
    x0=[1.0],
    dynamics=lambda t, x, u: np.array([u[0]]),
    n_controls=1,
    control_lower=[-1.0],
    control_upper=[1.0],
    running_cost=lambda t, x, u: x[0] ** 2 + u[0] ** 2,
    dynamics_dx=lambda t, x, u: np.array([[0.0]]),
    dynamics_du=lambda t, x, u: np.array([[1.0]]),
    running_cost_dx=lambda t, x, u: np.array([2.0 * x[0]]),
    running_cost_du=lambda t, x, u: np.array([2.0 * u[0]]),
)

callbacks = PmpCallbacks(
    hamiltonian=lambda t, x, u, lam: float(x[0] ** 2 + u[0] ** 2 + lam[0] * u[0]),
    adjoint_rhs=lambda t, x, u, lam: np.array([-2.0 * x[0]]),
    control_update=lambda t, x, lam: np.array([-0.5 * lam[0]]),
)

n_intervals = 2000
sweep = sweep_solve(problem, callbacks, SweepConfig(n_intervals=n_intervals))
direct = solve_direct(problem, DirectConfig(n_intervals=n_intervals))

t = sweep.grid.nodes
u_exact = -np.sinh(1.0 - t) / math.cosh(1.0)
x_exact = np.cosh(1.0 - t) / math.cosh(1.0)
j_exact = math.tanh(1.0)

print("scalar regulator: minimise integral of (x^2 + u^2), x' = u, x(0) = 1")
print(f"{'':10s}{'J':>12s}{'|J - tanh 1|':>14s}{'max |u - u*|':>14s}{'max |x - x*|':>14s}")
for name, result in (("sweep", sweep), ("direct", direct)):
    du = np.max(np.abs(result.control[:, 0] - u_exact))
    dx = np.max(np.abs(result.states[:, 0] - x_exact))
    print(f"{name:10s}{result.objective:12.8f}{abs(result.objective - j_exact):14.2e}{du:14.2e}{dx:14.2e}")
print(f"{'exact':10s}{j_exact:12.8f}")

assert abs(sweep.objective - j_exact) < 1e-6
assert abs(direct.objective - j_exact) < 1e-3  # first-order transcription
print("\nboth solvers reproduce the closed-form optimum.")
