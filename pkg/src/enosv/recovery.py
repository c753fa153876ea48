"""Per-macrocell recovery of a pointwise-evaluable function from subcell averages.

The candidate discontinuity edges are the interior subcell edges with the
largest jumps in the averages.  Unit-jump basis functions placed there are
scaled by the sign of the average jump, turning the sign property into plain
non-negativity constraints for the constrained least-squares projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from enosv.discretization import (
    BasisSpec,
    RecoveryTables,
    jump_basis_eval,
    legendre_eval,
    recovery_tables,
)
from enosv.errors import ConfigError, NumericalError
from enosv.qp import QpProblem, active_set_solve

Array = np.ndarray


@dataclass(frozen=True)
class RecoveredFunction:
    """Coefficients over a sign-normalized basis on one macrocell.

    The leading ``k`` coefficients weight the Legendre part; the trailing
    ones weight the sign-scaled jumps and are non-negative, which is exactly
    the sign property: a recovered jump is either absent or oriented like the
    jump in the averages.
    """

    spec: BasisSpec
    coefficients: Array
    macrocell_index: int = 0

    @property
    def jump_coefficients(self) -> Array:
        return np.asarray(self.coefficients[self.spec.k:], dtype=float)


def compute_interface_jumps(averages: Array) -> Array:
    """Consecutive differences of the subcell averages (length ``q``)."""
    averages = np.asarray(averages, dtype=float)
    if averages.size < 2:
        raise ConfigError("need at least two averages to form a jump")
    return np.diff(averages)


def select_jump_edges(jumps: Array, l: int) -> list[tuple[int, int]]:
    """The ``l`` interior edges with the largest average jumps, with signs.

    Edges are ranked by decreasing jump magnitude; the leftmost edge wins
    ties.  Zero jumps are never selected, so fewer than ``l`` pairs come back
    when the data has fewer nonzero jumps (the basis shrinks instead).  The
    returned pairs ``(edge_index, sign)`` are sorted by edge index.
    """
    jumps = np.asarray(jumps, dtype=float)
    if l > jumps.size:
        raise ConfigError(f"cannot select {l} jump edges from {jumps.size}")
    order = np.argsort(-np.abs(jumps), kind="stable")
    chosen = []
    for pos in order[:l]:
        if jumps[pos] == 0.0:
            continue
        edge = int(pos) + 1
        sign = 1 if jumps[pos] > 0.0 else -1
        chosen.append((edge, sign))
    chosen.sort()
    return chosen


def _averaging_matrix(tables: RecoveryTables, selection) -> Array:
    n = tables.k + len(selection)
    matrix = np.zeros((tables.subcells, n))
    matrix[:, : tables.k] = tables.poly_avg
    for col, (edge, sign) in enumerate(selection):
        matrix[edge - 1, tables.k + col] = -0.5 * sign
        matrix[edge, tables.k + col] = 0.5 * sign
    return matrix


def recover_coefficients(averages: Array, k: int, l: int, tables: RecoveryTables,
                         warm_start: Array | None = None):
    """Selection plus constrained projection for one macrocell.

    Returns the coefficient vector, the selected ``(edge, sign)`` pairs and
    the QP solution.  ``warm_start`` must match the current basis size to be
    used; it doubles as the feasible starting point of the active-set loop
    and as the seed of its inner CG solves.
    """
    averages = np.asarray(averages, dtype=float)
    jumps = compute_interface_jumps(averages) if averages.size >= 2 else np.zeros(0)
    selection = select_jump_edges(jumps, l)
    matrix = _averaging_matrix(tables, selection)
    constrained = tuple(range(k, k + len(selection)))
    problem = QpProblem(matrix, averages, constrained)
    initial = None
    if warm_start is not None and np.shape(warm_start) == (k + len(selection),):
        initial = np.array(warm_start, dtype=float)
        for j in constrained:
            initial[j] = max(initial[j], 0.0)
    solution = active_set_solve(problem, initial)
    return solution.coefficients, selection, solution


def recover_macrocell(averages: Array, k: int, l: int, subcell_edges: Array,
                      warm_start: Array | None = None,
                      macrocell_index: int = 0) -> RecoveredFunction:
    """Recover one macrocell's function from its ``q + 1`` subcell averages."""
    averages = np.asarray(averages, dtype=float)
    subcells = averages.size
    if np.asarray(subcell_edges).size != subcells + 1:
        raise ConfigError("subcell_edges must have one more entry than averages")
    if k + l > subcells:
        raise ConfigError(f"k + l = {k + l} exceeds subcell count {subcells}")
    tables = recovery_tables(subcells, k)
    try:
        coeffs, selection, _ = recover_coefficients(averages, k, l, tables, warm_start)
    except NumericalError as err:
        raise type(err)(f"macrocell {macrocell_index}: {err}") from err
    spec = BasisSpec(
        k=k,
        jump_edges=tuple(edge for edge, _ in selection),
        jump_signs=tuple(sign for _, sign in selection),
    )
    return RecoveredFunction(spec, coeffs, macrocell_index)


def evaluate_traces(fn: RecoveredFunction, subcell_edges: Array) -> tuple[Array, Array]:
    """One-sided limits of the recovered function at all ``q + 2`` subcell edges.

    Left and right values differ only at the selected jump edges.  At the two
    macrocell boundary edges both entries carry the interior-side trace,
    which is the only one this macrocell defines.
    """
    edges = np.asarray(subcell_edges, dtype=float)
    tables = recovery_tables(edges.size - 1, fn.spec.k)
    poly = tables.poly_edge @ fn.coefficients[: fn.spec.k]
    left = poly.copy()
    right = poly.copy()
    for col, (edge, sign) in enumerate(zip(fn.spec.jump_edges, fn.spec.jump_signs)):
        d = fn.coefficients[fn.spec.k + col]
        left[edge] -= d * sign
        right[edge] += d * sign
    return left, right


def evaluate_recovered(fn: RecoveredFunction, subcell_edges: Array, x,
                       side: str = "point"):
    """Evaluate the recovered function at arbitrary points inside the macrocell."""
    edges = np.asarray(subcell_edges, dtype=float)
    lo, hi = edges[0], edges[-1]
    ref = (2.0 * np.asarray(x, dtype=float) - (lo + hi)) / (hi - lo)
    ref_edges = (2.0 * edges - (lo + hi)) / (hi - lo)
    values = np.zeros_like(ref)
    for i in range(fn.spec.k):
        values = values + fn.coefficients[i] * legendre_eval(i, ref)
    for col, (edge, sign) in enumerate(zip(fn.spec.jump_edges, fn.spec.jump_signs)):
        d = fn.coefficients[fn.spec.k + col]
        values = values + d * sign * jump_basis_eval(edge, ref, ref_edges, side=side)
    return values if values.ndim else float(values)
