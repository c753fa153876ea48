"""Spectral-volume finite-volume solver with a sign-preserving convex recovery.

Cell averages on the subcells of each macrocell are recovered as a linear
combination of Legendre polynomials and sign-constrained unit-jump functions.
The constrained least-squares projection is solved with an active-set method
whose inner solver is conjugate gradients on the normal equations.
"""

from enosv.discretization import (
    BasisSpec,
    Grid,
    OperatorPair,
    build_operators,
    chebyshev_boundaries,
    jump_basis_average,
    jump_basis_eval,
    legendre_average,
    legendre_eval,
    recovery_tables,
)
from enosv.errors import (
    ActiveSetError,
    CgError,
    ConfigError,
    NonPhysicalState,
    NumericalError,
)
from enosv.qp import (
    ActiveSet,
    QpProblem,
    QpSolution,
    active_set_solve,
    cg_solve,
    solve_equality_restricted,
    step_length,
    update_active_set,
)
from enosv.recovery import (
    RecoveredFunction,
    compute_interface_jumps,
    evaluate_recovered,
    evaluate_traces,
    recover_macrocell,
    select_jump_edges,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveSet",
    "ActiveSetError",
    "BasisSpec",
    "CgError",
    "ConfigError",
    "Grid",
    "NonPhysicalState",
    "NumericalError",
    "OperatorPair",
    "QpProblem",
    "QpSolution",
    "RecoveredFunction",
    "active_set_solve",
    "build_operators",
    "cg_solve",
    "chebyshev_boundaries",
    "compute_interface_jumps",
    "evaluate_recovered",
    "evaluate_traces",
    "jump_basis_average",
    "jump_basis_eval",
    "legendre_average",
    "legendre_eval",
    "recover_macrocell",
    "recovery_tables",
    "select_jump_edges",
    "solve_equality_restricted",
    "step_length",
    "update_active_set",
]
