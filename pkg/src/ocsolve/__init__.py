"""Optimal control solver toolkit.

Two numerical families over one problem type: the indirect forward-backward
sweep method (Pontryagin's principle, RK4 state/adjoint integration, clipped
control characterization) and a direct method (Euler transcription to a
box-constrained NLP via single shooting, exact discrete-adjoint gradients,
projected gradient descent).  Bundled benchmarks let the two validate each
other.
"""

from .direct import (
    DirectConfig,
    DirectResult,
    Nlp,
    constraint_residuals,
    projected_gradient_solve,
    solve_direct,
    transcribe_euler,
)
from .integrators import (
    DopriResult,
    IntegrationError,
    TimeGrid,
    as_control_grid,
    dopri45,
    euler_forward,
    rk4_backward,
    rk4_forward,
)
from .problem import OcProblem, evaluate_objective, negate_sense, to_mayer
from .problems import (
    ProblemSpec,
    RubellaParams,
    UnknownProblemError,
    available_problems,
    quadratic_control_problem,
    registry_lookup,
    rubella_callbacks,
    rubella_params,
    rubella_problem,
)
from .sweep import (
    CallbackCheck,
    PmpCallbacks,
    SweepConfig,
    SweepResult,
    check_callbacks,
    clip_control,
    negate_callbacks,
    sweep_solve,
)

__version__ = "0.1.0"

__all__ = [
    "OcProblem",
    "to_mayer",
    "negate_sense",
    "evaluate_objective",
    "TimeGrid",
    "IntegrationError",
    "DopriResult",
    "as_control_grid",
    "rk4_forward",
    "rk4_backward",
    "euler_forward",
    "dopri45",
    "PmpCallbacks",
    "SweepConfig",
    "SweepResult",
    "CallbackCheck",
    "clip_control",
    "negate_callbacks",
    "check_callbacks",
    "sweep_solve",
    "Nlp",
    "DirectConfig",
    "DirectResult",
    "transcribe_euler",
    "projected_gradient_solve",
    "constraint_residuals",
    "solve_direct",
    "RubellaParams",
    "ProblemSpec",
    "UnknownProblemError",
    "rubella_params",
    "rubella_callbacks",
    "rubella_problem",
    "quadratic_control_problem",
    "registry_lookup",
    "available_problems",
    "__version__",
]
