"""Convex-constrained least squares via an active-set method.

Solves ``min ||A x - target||_2`` subject to ``x_j >= 0`` for a subset of
coordinate indices.  Each equality-restricted subproblem (constrained
coordinates pinned to zero) is solved through the normal equations with a
conjugate-gradient iteration, warm-started from the previous active-set
iterate.  Systems here are tiny (at most ~12 x 12), so no sparse machinery
is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from enosv.errors import ActiveSetError, CgError, ConfigError

Array = np.ndarray

#: Relative residual target for the inner CG solves.
CG_TOL = 1.0e-12
#: Stagnated CG results are still accepted below this relative residual.
CG_ACCEPT_TOL = 1.0e-8
#: Scale-relative threshold under which a multiplier counts as negative.
MULTIPLIER_TOL = 1.0e-10
#: Scale-relative feasibility slack for constrained coefficients.
FEASIBILITY_TOL = 1.0e-12


@dataclass(frozen=True)
class QpProblem:
    """Least-squares data: matrix, target vector, and constrained columns."""

    matrix: Array
    target: Array
    constrained_indices: tuple[int, ...]

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        target = np.asarray(self.target, dtype=float)
        if matrix.ndim != 2:
            raise ConfigError("matrix must be two-dimensional")
        if target.shape != (matrix.shape[0],):
            raise ConfigError("target length must match matrix rows")
        idx = tuple(int(i) for i in self.constrained_indices)
        if any(not 0 <= i < matrix.shape[1] for i in idx):
            raise ConfigError("constrained index out of range")
        if len(set(idx)) != len(idx):
            raise ConfigError("constrained indices must be distinct")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "constrained_indices", idx)

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class ActiveSet:
    """Constrained indices currently pinned to zero."""

    active: frozenset[int] = frozenset()

    def with_index(self, index: int) -> "ActiveSet":
        return ActiveSet(self.active | {index})

    def without_index(self, index: int) -> "ActiveSet":
        return ActiveSet(self.active - {index})


@dataclass(frozen=True)
class QpSolution:
    """Feasible minimizer together with active-set iteration metadata."""

    coefficients: Array
    iterations: int
    final_active: ActiveSet
    objectives: tuple[float, ...] = ()


def cg_solve(matrix_apply, rhs: Array, x0: Array | None = None,
             tol: float = CG_TOL, max_iter: int | None = None) -> tuple[Array, int]:
    """Conjugate gradients for a symmetric positive definite operator.

    ``matrix_apply`` is the operator as a function.  Returns the solution and
    the number of iterations used; converged means the residual dropped below
    ``tol * ||rhs||``.  Raises :class:`CgError` on non-convergence (carrying
    the best iterate seen) or when the operator reveals itself indefinite.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.size
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if max_iter is None:
        max_iter = 4 * n
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros(n), 0
    r = rhs - np.asarray(matrix_apply(x), dtype=float)
    threshold = tol * rhs_norm
    res = float(np.linalg.norm(r))
    best_x, best_res = x.copy(), res
    if res <= threshold:
        return x, 0
    p = r.copy()
    rr = res * res
    for it in range(1, max_iter + 1):
        ap = np.asarray(matrix_apply(p), dtype=float)
        pap = float(p @ ap)
        if pap <= 0.0:
            raise CgError(
                f"operator not positive definite (<p, Ap> = {pap:.3e})",
                best_x=best_x, best_residual=best_res / rhs_norm, iterations=it,
            )
        alpha = rr / pap
        x = x + alpha * p
        r = r - alpha * ap
        rr_next = float(r @ r)
        res = np.sqrt(rr_next)
        if res < best_res:
            best_x, best_res = x.copy(), res
        if res <= threshold:
            return x, it
        p = r + (rr_next / rr) * p
        rr = rr_next
    raise CgError(
        f"no convergence after {max_iter} iterations "
        f"(relative residual {best_res / rhs_norm:.3e})",
        best_x=best_x, best_residual=best_res / rhs_norm, iterations=max_iter,
    )


def solve_equality_restricted(problem: QpProblem, active: ActiveSet,
                              warm_start: Array | None = None) -> Array:
    """Unconstrained minimizer with the active coordinates fixed to zero.

    Drops the active columns, solves the normal equations of the restricted
    basis by CG, and embeds zeros back at the active positions.  The warm
    start (previous active-set iterate) seeds the CG iteration.
    """
    n = problem.n
    free = [j for j in range(n) if j not in active.active]
    x = np.zeros(n)
    if not free:
        return x
    restricted = problem.matrix[:, free]
    gram = restricted.T @ restricted
    rhs = restricted.T @ problem.target
    x0 = None
    if warm_start is not None:
        x0 = np.asarray(warm_start, dtype=float)[free]
    try:
        w, _ = cg_solve(lambda v: gram @ v, rhs, x0=x0, tol=CG_TOL,
                        max_iter=4 * len(free))
    except CgError as err:
        # The attainable CG residual is floored by the squared conditioning of
        # the normal equations; a stagnated but small residual is still a
        # perfectly usable least-squares solution.
        if err.best_residual is not None and err.best_residual <= CG_ACCEPT_TOL:
            w = err.best_x
        else:
            raise
    x[free] = w
    return x


def step_length(d_current: Array, d_candidate: Array) -> tuple[float, int | None]:
    """Largest step toward the candidate that keeps constrained values >= 0.

    Only components descending toward zero restrict the step.  Returns the
    step length in [0, 1] together with the blocking component's position (or
    ``None`` when the full step is feasible); the lowest index wins ties.
    """
    d_current = np.asarray(d_current, dtype=float)
    d_candidate = np.asarray(d_candidate, dtype=float)
    lam = 1.0
    blocking = None
    for j in range(d_current.size):
        delta = d_candidate[j] - d_current[j]
        if delta < 0.0:
            ratio = -max(d_current[j], 0.0) / delta
            if ratio < lam:
                lam = ratio
                blocking = j
    return max(lam, 0.0), blocking


def update_active_set(active: ActiveSet, lam: float, blocking_index: int | None,
                      multipliers: dict[int, float],
                      tol: float = 0.0) -> ActiveSet:
    """One active-set update: activate the blocker or release one constraint.

    A short step activates the blocking constraint.  At a full step, the
    active index with the most negative multiplier (steepest descent pointing
    into the admissible region) is released; at most one index is removed.
    """
    if lam < 1.0:
        if blocking_index is None:
            raise ActiveSetError("short step without a blocking constraint")
        return active.with_index(blocking_index)
    if multipliers:
        worst = min(multipliers, key=lambda j: (multipliers[j], j))
        if multipliers[worst] < -tol:
            return active.without_index(worst)
    return active


def _objective(problem: QpProblem, x: Array) -> float:
    return float(np.linalg.norm(problem.matrix @ x - problem.target))


def active_set_solve(problem: QpProblem, initial: Array | None = None) -> QpSolution:
    """Minimize ``||A x - target||_2`` subject to the sign constraints.

    Starts from a feasible point (the zero vector by default), alternates
    equality-restricted solves with step-length control, and terminates once
    a full step is taken and no constraint can be dropped.  A cycle guard
    aborts runaway iterations.
    """
    n = problem.n
    constrained = list(problem.constrained_indices)
    if initial is None:
        x = np.zeros(n)
    else:
        x = np.array(initial, dtype=float)
        if x.shape != (n,):
            raise ConfigError("initial point has wrong length")
        lowest = min((x[j] for j in constrained), default=0.0)
        if lowest < -FEASIBILITY_TOL * max(1.0, float(np.max(np.abs(x)))):
            raise ConfigError("initial point violates the sign constraints")
        for j in constrained:
            x[j] = max(x[j], 0.0)

    active = ActiveSet(frozenset(j for j in constrained if x[j] == 0.0))
    grad_scale = max(1.0, float(np.max(np.abs(problem.matrix.T @ problem.target),
                                       initial=0.0)))
    mult_tol = MULTIPLIER_TOL * grad_scale
    max_outer = 10 * (len(constrained) + 1)

    iterations = 0
    objectives = [_objective(problem, x)]
    for _ in range(max_outer):
        iterations += 1
        candidate = solve_equality_restricted(problem, active, warm_start=x)
        lam, block_pos = step_length(x[constrained], candidate[constrained])
        blocking = constrained[block_pos] if block_pos is not None else None
        x = (1.0 - lam) * x + lam * candidate
        for j in active.active:
            x[j] = 0.0
        objectives.append(_objective(problem, x))
        if lam < 1.0:
            active = update_active_set(active, lam, blocking, {})
            continue
        grad = problem.matrix.T @ (problem.matrix @ x - problem.target)
        multipliers = {j: float(grad[j]) for j in active.active}
        updated = update_active_set(active, lam, None, multipliers, tol=mult_tol)
        if updated.active == active.active:
            scale = max(1.0, float(np.max(np.abs(x), initial=0.0)))
            for j in constrained:
                if -FEASIBILITY_TOL * scale <= x[j] < 0.0:
                    x[j] = 0.0
            return QpSolution(x, iterations, active, tuple(objectives))
        active = updated
    raise ActiveSetError(
        f"active-set iteration did not terminate within {max_outer} steps"
    )
