"""Built-in problem registry: the rubella vaccination benchmark plus an
analytically solvable quadratic fixture.

The rubella model tracks four population fractions over a three-year
horizon: susceptibles x1, incubating x2, infected x3, and a bookkeeping
component x4 that stays at the constant population level.  Vaccination at
rate u (bounded by 0.9) drains susceptibles, and the objective penalises
infections plus quadratic control effort:

    minimise  integral of (A x3 + u^2) dt  over [0, 3]

    x1' = b - b (p x2 + q x3) - b x1 - beta x1 x3 - u x1
    x2' = b p x2 + beta x1 x3 - (e + b) x2
    x3' = e x2 - (g_rec + b) x3
    x4' = b - b x4

All problems ship analytic PMP callbacks and dynamics Jacobians, so both the
sweep and the direct solver run without finite-difference fallbacks.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .problem import OcProblem
from .sweep import PmpCallbacks

__all__ = [
    "RubellaParams",
    "ProblemSpec",
    "UnknownProblemError",
    "rubella_params",
    "rubella_callbacks",
    "rubella_problem",
    "quadratic_control_problem",
    "registry_lookup",
    "available_problems",
]


@dataclass(frozen=True)
class RubellaParams:
    """Model constants for the rubella benchmark.

    ``b`` birth/death rate, ``e`` incubation-to-infected transition,
    ``g_rec`` recovery rate (named to avoid clashing with the dynamics
    function), ``p``/``q`` fractions of newborns from incubating/infected
    mothers entering the incubation class, ``beta`` transmission rate, ``A``
    infection cost weight; vaccination is bounded to [u_min, u_max].
    """

    b: float = 0.012
    e: float = 36.5
    g_rec: float = 30.417
    p: float = 0.65
    q: float = 0.65
    beta: float = 527.59
    A: float = 100.0
    u_min: float = 0.0
    u_max: float = 0.9
    t0: float = 0.0
    tf: float = 3.0
    x_init: tuple[float, float, float, float] = (0.0555, 0.0003, 0.0004, 1.0)

    def __post_init__(self) -> None:
        for name in ("b", "e", "g_rec", "p", "q", "beta", "A"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"parameter {name} must be positive")
        if not 0.0 <= self.u_min < self.u_max:
            raise ValueError("need 0 <= u_min < u_max")
        if not self.tf > self.t0:
            raise ValueError("need t0 < tf")
        if len(self.x_init) != 4 or any(not 0.0 <= v <= 1.0 for v in self.x_init):
            raise ValueError("x_init must be four components in [0, 1]")


def rubella_params(**overrides) -> RubellaParams:
    """Default parameters with scalar overrides applied (unknown keys rejected)."""
    try:
        return dataclasses.replace(RubellaParams(), **overrides)
    except TypeError:
        valid = ", ".join(f.name for f in dataclasses.fields(RubellaParams))
        unknown = set(overrides) - {f.name for f in dataclasses.fields(RubellaParams)}
        raise ValueError(f"unknown rubella parameter(s) {sorted(unknown)}; valid keys: {valid}") from None


def rubella_callbacks(params: RubellaParams | None = None) -> PmpCallbacks:
    """Analytic Hamiltonian, adjoint right-hand side, and control law.

    The Hamiltonian is the running cost plus the adjoint-weighted dynamics;
    the adjoint system (lam' = -dH/dx) is

        lam1' = lam1 (b + u + beta x3) - lam2 beta x3
        lam2' = lam1 b p + lam2 (e + b - p b) - lam3 e
        lam3' = -A + lam1 (b q + beta x1) - lam2 beta x1 + lam3 (g_rec + b)
        lam4' = b lam4

    and dH/du = 2u - lam1 x1 gives the stationary control u = lam1 x1 / 2.
    """
    pr = params if params is not None else RubellaParams()
    b, e, g, p, q, beta, big_a = pr.b, pr.e, pr.g_rec, pr.p, pr.q, pr.beta, pr.A
    dynamics = _rubella_dynamics(pr)

    def hamiltonian(t, x, u, lam):
        running = big_a * x[2] + u[0] ** 2
        return float(running + lam @ dynamics(t, x, u))

    def adjoint_rhs(t, x, u, lam):
        x1, x3 = x[0], x[2]
        l1, l2, l3, l4 = lam
        v = u[0]
        return np.array(
            [
                l1 * (b + v + beta * x3) - l2 * beta * x3,
                l1 * b * p + l2 * (e + b - p * b) - l3 * e,
                -big_a + l1 * (b * q + beta * x1) - l2 * beta * x1 + l3 * (g + b),
                b * l4,
            ]
        )

    def control_update(t, x, lam):
        return np.array([0.5 * lam[0] * x[0]])

    return PmpCallbacks(hamiltonian=hamiltonian, adjoint_rhs=adjoint_rhs, control_update=control_update)


def _rubella_dynamics(pr: RubellaParams):
    b, e, g, p, q, beta = pr.b, pr.e, pr.g_rec, pr.p, pr.q, pr.beta

    def dynamics(t, x, u):
        x1, x2, x3, x4 = x
        v = u[0]
        infection = beta * x1 * x3
        return np.array(
            [
                b - b * (p * x2 + q * x3) - b * x1 - infection - v * x1,
                b * p * x2 + infection - (e + b) * x2,
                e * x2 - (g + b) * x3,
                b - b * x4,
            ]
        )

    return dynamics


def rubella_problem(params: RubellaParams | None = None) -> tuple[OcProblem, PmpCallbacks]:
    """The rubella vaccination benchmark with analytic derivatives."""
    pr = params if params is not None else RubellaParams()
    b, e, g, p, q, beta, big_a = pr.b, pr.e, pr.g_rec, pr.p, pr.q, pr.beta, pr.A
    dynamics = _rubella_dynamics(pr)

    def running_cost(t, x, u):
        return big_a * x[2] + u[0] ** 2

    def dynamics_dx(t, x, u):
        x1, x3 = x[0], x[2]
        v = u[0]
        return np.array(
            [
                [-b - beta * x3 - v, -b * p, -b * q - beta * x1, 0.0],
                [beta * x3, b * p - (e + b), beta * x1, 0.0],
                [0.0, e, -(g + b), 0.0],
                [0.0, 0.0, 0.0, -b],
            ]
        )

    def dynamics_du(t, x, u):
        return np.array([[-x[0]], [0.0], [0.0], [0.0]])

    def running_cost_dx(t, x, u):
        return np.array([0.0, 0.0, big_a, 0.0])

    def running_cost_du(t, x, u):
        return np.array([2.0 * u[0]])

    problem = OcProblem(
        t0=pr.t0,
        tf=pr.tf,
        x0=np.array(pr.x_init),
        dynamics=dynamics,
        n_controls=1,
        control_lower=np.array([pr.u_min]),
        control_upper=np.array([pr.u_max]),
        running_cost=running_cost,
        sense="min",
        dynamics_dx=dynamics_dx,
        dynamics_du=dynamics_du,
        running_cost_dx=running_cost_dx,
        running_cost_du=running_cost_du,
    )
    return problem, rubella_callbacks(pr)


def quadratic_control_problem(u_min: float = -1.0, u_max: float = 1.0) -> tuple[OcProblem, PmpCallbacks]:
    """Verification fixture: minimise the integral of u^2 with x' = u, x(0) = 0.

    With the default symmetric bounds the optimum is u = 0 and J = 0; the
    adjoint is identically zero (lam' = 0 with lam(1) = 0) and the stationary
    control is -lam / 2.  Shifting the bounds to [0.1, 1] forces u = 0.1 and
    J = 0.01, which pins down the clipping path of both solvers.
    """

    def dynamics(t, x, u):
        return np.array([u[0]])

    def running_cost(t, x, u):
        return u[0] ** 2

    problem = OcProblem(
        t0=0.0,
        tf=1.0,
        x0=np.array([0.0]),
        dynamics=dynamics,
        n_controls=1,
        control_lower=np.array([u_min]),
        control_upper=np.array([u_max]),
        running_cost=running_cost,
        sense="min",
        dynamics_dx=lambda t, x, u: np.array([[0.0]]),
        dynamics_du=lambda t, x, u: np.array([[1.0]]),
        running_cost_dx=lambda t, x, u: np.array([0.0]),
        running_cost_du=lambda t, x, u: np.array([2.0 * u[0]]),
    )
    callbacks = PmpCallbacks(
        hamiltonian=lambda t, x, u, lam: float(u[0] ** 2 + lam[0] * u[0]),
        adjoint_rhs=lambda t, x, u, lam: np.zeros(1),
        control_update=lambda t, x, lam: np.array([-0.5 * lam[0]]),
    )
    return problem, callbacks


class UnknownProblemError(KeyError):
    """Raised when a registry lookup names no known problem."""


@dataclass(frozen=True)
class ProblemSpec:
    """Registry entry: a named builder plus its default parameter overrides."""

    name: str
    builder: Callable[..., tuple[OcProblem, PmpCallbacks]]
    defaults: Mapping[str, float] = field(default_factory=dict)

    def build(self, overrides: Mapping[str, float] | None = None) -> tuple[OcProblem, PmpCallbacks]:
        merged = dict(self.defaults)
        if overrides:
            merged.update(overrides)
        return self.builder(**merged)


def _build_rubella(**overrides) -> tuple[OcProblem, PmpCallbacks]:
    return rubella_problem(rubella_params(**overrides))


def _build_quadratic(**overrides) -> tuple[OcProblem, PmpCallbacks]:
    unknown = set(overrides) - {"u_min", "u_max"}
    if unknown:
        raise ValueError(f"unknown quadratic parameter(s) {sorted(unknown)}; valid keys: u_min, u_max")
    return quadratic_control_problem(**overrides)


_REGISTRY: dict[str, ProblemSpec] = {
    "rubella": ProblemSpec(name="rubella", builder=_build_rubella),
    "quadratic": ProblemSpec(name="quadratic", builder=_build_quadratic),
}


def available_problems() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def registry_lookup(name: str) -> ProblemSpec:
    """Fetch a problem spec by name; unknown names list what is available."""
    try:
        return _REGISTRY[name]
    except KeyError:
        names = ", ".join(available_problems())
        raise UnknownProblemError(f"unknown problem {name!r}; available problems: {names}") from None
