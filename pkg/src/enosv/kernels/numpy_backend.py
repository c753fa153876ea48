"""Vectorized pure-numpy kernel backend.

Macrocells sharing the same selected jump edge are solved in batches through
the normal equations of the restricted basis; the single-jump configurations
used by the flow solver need at most one constraint decision per macrocell
(pin the jump to zero when the unconstrained coefficient comes out with the
wrong sign), which keeps the whole recovery expressible in batched linear
algebra.  General jump counts fall back to a per-macrocell loop over the
reference implementation.
"""

from __future__ import annotations

import numpy as np

from enosv.discretization import RecoveryTables
from enosv.errors import NonPhysicalState
from enosv.euler import hll_flux_arrays
from enosv.recovery import recover_coefficients

NAME = "numpy"

Array = np.ndarray


def _physical_mask(states: Array, gamma: float) -> Array:
    rho = states[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        pressure = (gamma - 1.0) * (states[..., 2]
                                    - 0.5 * states[..., 1] ** 2 / rho)
    return (rho > 0.0) & (pressure > 0.0)


def _poly_only_solve(tables: RecoveryTables, rhs_rows: Array) -> Array:
    if tables.k == 0:
        return np.zeros((rhs_rows.shape[0], 0))
    return np.linalg.solve(tables.gram_pp, rhs_rows.T).T


def _single_jump_system(tables: RecoveryTables, edge: int) -> Array:
    """Normal-equation matrix for k Legendre columns plus unsigned jump `edge`."""
    k = tables.k
    system = np.empty((k + 1, k + 1))
    system[:k, :k] = tables.gram_pp
    system[:k, k] = tables.gram_pj[:, edge - 1]
    system[k, :k] = tables.gram_pj[:, edge - 1]
    system[k, k] = tables.gram_jj[edge - 1, edge - 1]
    return system


def recover_batch(averages: Array, tables: RecoveryTables, k: int, l: int):
    """Recover every macrocell of one variable.

    Returns ``(coeffs, tags, left, right, violations)`` where ``coeffs`` is
    (M, k+l) with unused slots zero, ``tags`` is (M, l) holding the signed
    edge index ``edge * sign`` per used jump (0 when unused), and
    ``left``/``right`` are the one-sided traces at the q+2 subcell edges.
    """
    averages = np.asarray(averages, dtype=float)
    m_count, q1 = averages.shape
    coeffs = np.zeros((m_count, k + l))
    tags = np.zeros((m_count, max(l, 1)), dtype=np.int64)[:, :l]

    if l == 1 and k > 0:
        jumps = np.diff(averages, axis=1)
        mags = np.abs(jumps)
        edge_pos = np.argmax(mags, axis=1)            # leftmost maximum
        rows = np.arange(m_count)
        has_jump = mags[rows, edge_pos] > 0.0
        signs = np.where(jumps[rows, edge_pos] > 0.0, 1.0, -1.0)
        poly_rhs = averages @ tables.poly_avg          # (M, k)

        d = np.zeros(m_count)
        c_part = np.empty((m_count, k))
        pinned = ~has_jump
        for edge in np.unique(edge_pos[has_jump]):
            group = has_jump & (edge_pos == edge)
            system = _single_jump_system(tables, edge + 1)
            rhs = np.empty((int(group.sum()), k + 1))
            rhs[:, :k] = poly_rhs[group]
            rhs[:, k] = 0.5 * jumps[group, edge]       # unsigned column
            sol = np.linalg.solve(system, rhs.T).T
            c_part[group] = sol[:, :k]
            d_signed = signs[group] * sol[:, k]
            d[group] = d_signed
            bad = group.copy()
            bad[group] = d_signed < 0.0
            pinned |= bad
        if np.any(pinned):
            c_part[pinned] = _poly_only_solve(tables, poly_rhs[pinned])
            d[pinned] = 0.0
        coeffs[:, :k] = c_part
        coeffs[:, k] = np.where(has_jump, np.maximum(d, 0.0), 0.0)
        tags[:, 0] = np.where(has_jump, (edge_pos + 1) * signs.astype(np.int64), 0)
    else:
        for m in range(m_count):
            row_coeffs, selection, _ = recover_coefficients(
                averages[m], k, l, tables
            )
            coeffs[m, : row_coeffs.size] = row_coeffs
            for slot, (edge, sign) in enumerate(selection):
                tags[m, slot] = edge * sign

    poly_trace = coeffs[:, :k] @ tables.poly_edge.T    # (M, q2)
    left = poly_trace.copy()
    right = poly_trace.copy()
    violations = 0
    jumps_all = np.diff(averages, axis=1)
    for slot in range(l):
        used = tags[:, slot] != 0
        if not np.any(used):
            continue
        edges = np.abs(tags[used, slot])
        signs = np.sign(tags[used, slot]).astype(float)
        ds = coeffs[used, k + slot] * signs
        rows = np.flatnonzero(used)
        left[rows, edges] -= ds
        right[rows, edges] += ds
        trace_jump = 2.0 * ds
        avg_jump = jumps_all[rows, edges - 1]
        violations += int(np.sum((trace_jump != 0.0)
                                 & (np.sign(trace_jump) != np.sign(avg_jump))))
    return coeffs, tags, left, right, violations


def euler_rhs(avg_ext: Array, widths: Array, tables: RecoveryTables, k: int,
              l: int, gamma: float, warm_coeffs: Array | None = None,
              warm_tags: Array | None = None):
    """Semidiscrete derivative of the interior subcell averages.

    ``avg_ext`` carries one ghost macrocell on each side; ``widths`` are the
    physical subcell widths of the interior macrocells.  Returns
    ``(dudt, sign_violations)``.
    """
    avg_ext = np.asarray(avg_ext, dtype=float)
    m_total, q1, _ = avg_ext.shape
    m_int = m_total - 2
    q2 = q1 + 1

    left = np.empty((m_total, q2, 3))
    right = np.empty((m_total, q2, 3))
    violations = 0
    for var in range(3):
        coeffs, tags, lt, rt, bad = recover_batch(avg_ext[:, :, var], tables, k, l)
        left[:, :, var] = lt
        right[:, :, var] = rt
        violations += bad
        if warm_coeffs is not None:
            warm_coeffs[:, var, : k + l] = coeffs
        if warm_tags is not None and l > 0:
            warm_tags[:, var, :l] = tags

    n_edges = m_int * q1 + 1
    pos = np.arange(n_edges)
    local = pos % q1
    macro = pos // q1
    boundary = local == 0
    u_l = left[np.where(boundary, macro, macro + 1),
               np.where(boundary, q1, local)]
    u_r = right[macro + 1, np.where(boundary, 0, local)]
    # recovery overshoot can take a trace outside the physical region near a
    # strong shock; such a trace falls back to the adjacent subcell average
    # (the formally first-order trace), which stays physical
    avg_l = avg_ext[np.where(boundary, macro, macro + 1),
                    np.where(boundary, q1 - 1, local - 1)]
    avg_r = avg_ext[macro + 1, np.where(boundary, 0, local)]
    fallbacks = 0
    for states, averages in ((u_l, avg_l), (u_r, avg_r)):
        bad = ~_physical_mask(states, gamma)
        if np.any(bad):
            states[bad] = averages[bad]
            fallbacks += int(bad.sum())
    try:
        flux = hll_flux_arrays(u_l, u_r, gamma)
    except NonPhysicalState as err:
        edge = err.subcell if err.subcell is not None else 0
        raise NonPhysicalState(
            f"non-physical state at edge {edge}",
            macrocell=int(edge // q1), subcell=int(edge % q1),
        ) from err
    dudt = (flux[:-1].reshape(m_int, q1, 3) - flux[1:].reshape(m_int, q1, 3))
    dudt /= np.asarray(widths, dtype=float)[:, :, None]
    return dudt, violations, fallbacks
