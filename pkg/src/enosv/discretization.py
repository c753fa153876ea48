"""Macrocell geometry, recovery bases, and exact averaging operators.

Each macrocell is split into ``q + 1`` subcells whose boundaries follow the
Chebyshev second-kind layout mapped affinely onto the macrocell.  Recovery
bases combine Legendre polynomials (the continuous part) with piecewise
linear unit-jump functions attached to interior subcell edges.  Subcell
averages of every basis function are computed exactly: Legendre averages via
the antiderivative identity, jump averages from the midpoint value of the
linear ramps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from enosv.errors import ConfigError, NumericalError

Array = np.ndarray

#: Averaging matrices above this condition estimate are rejected.
MAX_CONDITION = 1.0e12


def chebyshev_boundaries(q: int) -> Array:
    """Subcell boundaries on [-1, 1] for ``q + 1`` subcells.

    The boundaries are the Chebyshev points of the second kind,
    ``cos(i * pi / (q + 1))`` for ``i = 0..q+1``, returned in ascending order
    (the cosine formula itself produces a descending sequence).  The result
    is exactly antisymmetric with endpoints exactly -1 and 1.
    """
    if q < 0:
        raise ConfigError(f"subcell count must be positive, got q+1 = {q + 1}")
    i = np.arange(q + 2, dtype=float)
    x = np.cos(i * np.pi / (q + 1))[::-1].copy()
    # symmetrize so the layout is exactly mirror-symmetric (and the middle
    # boundary of an even subcell count is exactly zero)
    x = 0.5 * (x - x[::-1])
    x[0] = -1.0
    x[-1] = 1.0
    return x


def legendre_eval(n: int, x):
    """Value of the degree-``n`` Legendre polynomial via the three-term recurrence."""
    if n < 0:
        raise ConfigError(f"polynomial degree must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for m in range(1, n):
        p, p_prev = ((2 * m + 1) * x * p - m * p_prev) / (m + 1), p
    return p if p.ndim else float(p)


def legendre_average(n: int, a: float, b: float) -> float:
    """Exact average of the degree-``n`` Legendre polynomial over ``[a, b]``.

    Uses the antiderivative identity
    ``(2n + 1) * P_n = d/dx (P_{n+1} - P_{n-1})``; no quadrature is involved.
    """
    if not -1.0 <= a < b <= 1.0:
        raise ConfigError(f"invalid averaging interval [{a}, {b}]")
    if n == 0:
        return 1.0
    upper = legendre_eval(n + 1, b) - legendre_eval(n - 1, b)
    lower = legendre_eval(n + 1, a) - legendre_eval(n - 1, a)
    return float(upper - lower) / ((2 * n + 1) * (b - a))


def jump_basis_eval(edge_index: int, x, subcell_edges: Array, side: str = "point"):
    """Evaluate the unit-jump basis attached to interior edge ``edge_index``.

    The function rises linearly from 0 at the left neighbour edge to -1 just
    left of the jump edge, switches to +1 just right of it, and decays
    linearly back to 0 at the right neighbour edge; it vanishes outside those
    two subcells.  ``side`` selects the one-sided limit at the jump edge
    itself ("left" or "right"); "point" evaluation takes the right-sided
    value there.

    Edge indices are 1-based over the interior edges, so edge ``j`` sits
    between subcells ``j - 1`` and ``j`` at coordinate ``subcell_edges[j]``.
    """
    edges = np.asarray(subcell_edges, dtype=float)
    q = edges.size - 2
    if not 1 <= edge_index <= q:
        raise ConfigError(f"edge index {edge_index} outside interior range 1..{q}")
    if side not in ("left", "right", "point"):
        raise ConfigError(f"unknown side {side!r}")
    x = np.asarray(x, dtype=float)
    if np.any(x < edges[0]) or np.any(x > edges[-1]):
        raise ConfigError("evaluation point outside the macrocell")
    a = edges[edge_index - 1]
    c = edges[edge_index]
    b = edges[edge_index + 1]
    vals = np.zeros_like(x)
    on_left = (x >= a) & (x < c)
    on_right = (x > c) & (x <= b)
    vals = np.where(on_left, -(x - a) / (c - a), vals)
    vals = np.where(on_right, -(x - b) / (b - c), vals)
    at_edge = x == c
    vals = np.where(at_edge, -1.0 if side == "left" else 1.0, vals)
    return vals if vals.ndim else float(vals)


def jump_basis_average(edge_index: int, subcell_index: int) -> float:
    """Exact subcell average of the unit-jump basis at interior edge ``edge_index``.

    -1/2 on the subcell left of the jump, +1/2 on the subcell right of it,
    zero elsewhere.  Each ramp is linear, so its average equals its midpoint
    value regardless of the subcell widths.
    """
    if subcell_index == edge_index - 1:
        return -0.5
    if subcell_index == edge_index:
        return 0.5
    return 0.0


@dataclass(frozen=True)
class BasisSpec:
    """Recovery basis: ``k`` Legendre functions plus signed unit jumps.

    ``jump_edges`` are 1-based interior edge indices; ``jump_signs`` give the
    orientation each jump column is scaled by, so the admissible set is
    always ``d >= 0`` in the scaled basis.
    """

    k: int
    jump_edges: tuple[int, ...] = ()
    jump_signs: tuple[int, ...] = ()

    def __post_init__(self):
        if self.k < 0:
            raise ConfigError("continuous function count must be non-negative")
        if len(self.jump_edges) != len(self.jump_signs):
            raise ConfigError("jump_edges and jump_signs must have equal length")
        if len(set(self.jump_edges)) != len(self.jump_edges):
            raise ConfigError("jump edges must be pairwise distinct")
        if any(s not in (-1, 1) for s in self.jump_signs):
            raise ConfigError("jump signs must be +1 or -1")

    @property
    def l(self) -> int:
        return len(self.jump_edges)

    @property
    def size(self) -> int:
        return self.k + self.l

    def validate_for(self, subcells: int) -> None:
        """Check the compatibility relation ``k + l <= q + 1`` against a layout."""
        if self.size > subcells:
            raise ConfigError(
                f"basis with k={self.k}, l={self.l} exceeds {subcells} subcells"
            )
        q = subcells - 1
        if any(not 1 <= j <= q for j in self.jump_edges):
            raise ConfigError(f"jump edges {self.jump_edges} outside 1..{q}")


@dataclass(frozen=True)
class OperatorPair:
    """Averaging matrix plus one-sided point-evaluation matrices for a basis."""

    averaging: Array
    vandermonde_left: Array
    vandermonde_right: Array


def _to_reference(x, edges: Array):
    lo, hi = edges[0], edges[-1]
    return (2.0 * np.asarray(x, dtype=float) - (lo + hi)) / (hi - lo)


def build_operators(
    spec: BasisSpec, subcell_edges: Array, eval_points: Array
) -> OperatorPair:
    """Averaging and point-evaluation operators for one macrocell layout.

    ``subcell_edges`` are the physical subcell boundaries of a single
    macrocell; evaluation points are physical coordinates inside it.  Basis
    functions live on the reference interval and averages are affine
    invariant, so no Jacobian factors appear.  Raises when the averaging
    matrix is numerically rank-deficient.
    """
    edges = np.asarray(subcell_edges, dtype=float)
    subcells = edges.size - 1
    spec.validate_for(subcells)
    ref_edges = _to_reference(edges, edges)
    pts = _to_reference(np.asarray(eval_points, dtype=float), edges)

    n = spec.size
    averaging = np.zeros((subcells, n))
    v_left = np.zeros((pts.size, n))
    v_right = np.zeros((pts.size, n))
    for i in range(spec.k):
        for row in range(subcells):
            averaging[row, i] = legendre_average(i, ref_edges[row], ref_edges[row + 1])
        vals = legendre_eval(i, pts)
        v_left[:, i] = vals
        v_right[:, i] = vals
    for col, (edge, sign) in enumerate(zip(spec.jump_edges, spec.jump_signs)):
        j = spec.k + col
        averaging[edge - 1, j] = -0.5 * sign
        averaging[edge, j] = 0.5 * sign
        v_left[:, j] = sign * jump_basis_eval(edge, pts, ref_edges, side="left")
        v_right[:, j] = sign * jump_basis_eval(edge, pts, ref_edges, side="right")

    if n > 0:
        cond = np.linalg.cond(averaging)
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise NumericalError(
                f"averaging matrix is numerically rank-deficient (cond ~ {cond:.2e})"
            )
    return OperatorPair(averaging, v_left, v_right)


@dataclass(frozen=True)
class Grid:
    """Macrocell extents plus per-macrocell subcell boundaries.

    ``subcell_edges[m]`` holds the ``q + 2`` ascending boundaries of
    macrocell ``m``; the first and last coincide with the macrocell edges and
    the interior layout is the Chebyshev layout mapped onto the macrocell.
    """

    macrocell_edges: Array
    subcells_per_macrocell: int
    subcell_edges: Array

    def __post_init__(self):
        macro = np.asarray(self.macrocell_edges, dtype=float)
        sub = np.asarray(self.subcell_edges, dtype=float)
        if macro.ndim != 1 or macro.size < 2:
            raise ConfigError("need at least one macrocell")
        if np.any(np.diff(macro) <= 0):
            raise ConfigError("macrocell edges must be strictly increasing")
        q1 = self.subcells_per_macrocell
        if q1 < 1:
            raise ConfigError("need at least one subcell per macrocell")
        if sub.shape != (macro.size - 1, q1 + 1):
            raise ConfigError(
                f"subcell_edges must have shape {(macro.size - 1, q1 + 1)}"
            )
        if np.any(np.diff(sub, axis=1) <= 0):
            raise ConfigError("subcell edges must be strictly increasing")
        ref = chebyshev_boundaries(q1 - 1)
        centers = 0.5 * (macro[:-1] + macro[1:])
        halves = 0.5 * np.diff(macro)
        expected = centers[:, None] + halves[:, None] * ref[None, :]
        if not np.allclose(sub, expected, rtol=0.0, atol=1e-12 * np.max(halves)):
            raise ConfigError("subcell layout is not the Chebyshev layout")
        object.__setattr__(self, "macrocell_edges", macro)
        object.__setattr__(self, "subcell_edges", sub)

    @classmethod
    def from_macrocell_edges(cls, macrocell_edges, subcells_per_macrocell: int) -> "Grid":
        macro = np.asarray(macrocell_edges, dtype=float)
        ref = chebyshev_boundaries(subcells_per_macrocell - 1)
        centers = 0.5 * (macro[:-1] + macro[1:])
        halves = 0.5 * np.diff(macro)
        sub = centers[:, None] + halves[:, None] * ref[None, :]
        sub[:, 0] = macro[:-1]
        sub[:, -1] = macro[1:]
        return cls(macro, subcells_per_macrocell, sub)

    @classmethod
    def uniform(cls, a: float, b: float, n_macrocells: int, subcells_per_macrocell: int) -> "Grid":
        if b <= a:
            raise ConfigError("domain must have positive length")
        if n_macrocells < 1:
            raise ConfigError("need at least one macrocell")
        edges = np.linspace(a, b, n_macrocells + 1)
        return cls.from_macrocell_edges(edges, subcells_per_macrocell)

    @property
    def n_macrocells(self) -> int:
        return self.macrocell_edges.size - 1

    @property
    def macrocell_widths(self) -> Array:
        return np.diff(self.macrocell_edges)

    @property
    def subcell_widths(self) -> Array:
        return np.diff(self.subcell_edges, axis=1)

    @property
    def min_subcell_width(self) -> float:
        return float(np.min(self.subcell_widths))

    @property
    def total_length(self) -> float:
        return float(self.macrocell_edges[-1] - self.macrocell_edges[0])


@dataclass(frozen=True)
class RecoveryTables:
    """Precomputed averaging/evaluation tables shared by every macrocell.

    The tables cover the ``k`` Legendre columns plus all ``q`` candidate
    (unsigned) jump columns; a per-macrocell recovery picks out the columns
    for its selected edges and folds in the jump signs.  ``gram_*`` blocks
    are the corresponding pieces of the full Gram matrix of the averaging
    columns.
    """

    subcells: int
    k: int
    ref_edges: Array      # (q+2,)
    ref_widths: Array     # (q+1,)
    poly_avg: Array       # (q+1, k) exact Legendre subcell averages
    poly_edge: Array      # (q+2, k) Legendre values at the subcell edges
    gram_pp: Array        # (k, k)
    gram_pj: Array        # (k, q)
    gram_jj: Array        # (q, q)

    @property
    def n_interior_edges(self) -> int:
        return self.subcells - 1


@lru_cache(maxsize=None)
def recovery_tables(subcells: int, k: int) -> RecoveryTables:
    """Build (and cache) the recovery tables for ``subcells`` and ``k``."""
    if k > subcells:
        raise ConfigError(f"k={k} exceeds subcell count {subcells}")
    q = subcells - 1
    ref_edges = chebyshev_boundaries(q)
    poly_avg = np.zeros((subcells, k))
    for i in range(k):
        for row in range(subcells):
            poly_avg[row, i] = legendre_average(i, ref_edges[row], ref_edges[row + 1])
    poly_edge = np.zeros((subcells + 1, k))
    for i in range(k):
        poly_edge[:, i] = legendre_eval(i, ref_edges)

    # unsigned jump column e (1-based) has -1/2 at subcell e-1 and +1/2 at e
    gram_pp = poly_avg.T @ poly_avg
    gram_pj = np.zeros((k, q))
    for e in range(1, q + 1):
        gram_pj[:, e - 1] = 0.5 * (poly_avg[e] - poly_avg[e - 1])
    gram_jj = np.zeros((q, q))
    for e in range(1, q + 1):
        gram_jj[e - 1, e - 1] = 0.5
        if e + 1 <= q:
            gram_jj[e - 1, e] = -0.25
            gram_jj[e, e - 1] = -0.25

    tables = RecoveryTables(
        subcells=subcells,
        k=k,
        ref_edges=ref_edges,
        ref_widths=np.diff(ref_edges),
        poly_avg=poly_avg,
        poly_edge=poly_edge,
        gram_pp=gram_pp,
        gram_pj=gram_pj,
        gram_jj=gram_jj,
    )
    for arr in (tables.ref_edges, tables.ref_widths, tables.poly_avg,
                tables.poly_edge, tables.gram_pp, tables.gram_pj, tables.gram_jj):
        arr.setflags(write=False)
    return tables
