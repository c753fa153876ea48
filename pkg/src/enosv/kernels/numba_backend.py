"""Numba-compiled kernel backend.

One fused pass per right-hand-side evaluation: for every macrocell and
conserved variable the kernel detects candidate jump edges, assembles the
restricted normal equations from precomputed Gram blocks, runs the active-set
iteration with a conjugate-gradient inner solver, writes one-sided traces,
and finishes with the HLL flux sweep and the flux divergence.  Warm starts
reuse the previous step's coefficients whenever the same signed edges are
selected again.

Semantics match ``enosv.kernels.numpy_backend``; equivalence is enforced by
the test suite.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from enosv.discretization import RecoveryTables
from enosv.errors import CgError, NonPhysicalState, NumericalError

NAME = "numba"

Array = np.ndarray

STATUS_OK = 0
STATUS_NONPHYSICAL = 1
STATUS_CG_FAILURE = 2
STATUS_CYCLE = 3

_CG_TOL2 = 1.0e-24       # squared relative residual target
_CG_ACCEPT2 = 1.0e-16    # squared stagnation acceptance threshold
_MULT_TOL = 1.0e-10
_FEAS_TOL = 1.0e-12


@njit(cache=True)
def _recover_all(avg_ext, poly_avg, poly_edge, gram_pp, gram_pj, gram_jj,
                 k, l, warm_coeffs, warm_tags, use_warm, left_tr, right_tr,
                 fail_info):
    m_total, q1, _ = avg_ext.shape
    q = q1 - 1
    nmax = k + l

    jumps = np.empty(q)
    sel_e = np.empty(max(l, 1), dtype=np.int64)
    sel_s = np.empty(max(l, 1))
    active = np.empty(max(l, 1), dtype=np.uint8)
    normal = np.empty((nmax, nmax))
    rhs = np.empty(nmax)
    x = np.empty(nmax)
    cand = np.empty(nmax)
    free_idx = np.empty(nmax, dtype=np.int64)
    sub_mat = np.empty((nmax, nmax))
    sub_rhs = np.empty(nmax)
    sub_x = np.empty(nmax)
    best_x = np.empty(nmax)
    cg_r = np.empty(nmax)
    cg_p = np.empty(nmax)
    cg_ap = np.empty(nmax)

    violations = 0
    for m in range(m_total):
        for var in range(3):
            u = avg_ext[m, :, var]
            for e in range(q):
                jumps[e] = u[e + 1] - u[e]

            # jump selection: largest magnitudes, leftmost wins ties, zero
            # jumps never selected
            r = 0
            for _pick in range(l):
                best = -1
                best_mag = 0.0
                for e in range(q):
                    mag = abs(jumps[e])
                    if mag > best_mag:
                        taken = False
                        for t in range(r):
                            if sel_e[t] == e + 1:
                                taken = True
                                break
                        if not taken:
                            best = e
                            best_mag = mag
                if best < 0:
                    break
                sel_e[r] = best + 1
                sel_s[r] = 1.0 if jumps[best] > 0.0 else -1.0
                r += 1
            for i in range(1, r):  # canonical ascending edge order
                j = i
                while j > 0 and sel_e[j - 1] > sel_e[j]:
                    sel_e[j - 1], sel_e[j] = sel_e[j], sel_e[j - 1]
                    sel_s[j - 1], sel_s[j] = sel_s[j], sel_s[j - 1]
                    j -= 1
            n = k + r

            # normal equations of the signed selected basis
            grad_scale = 1.0
            for a in range(k):
                acc = 0.0
                for i in range(q1):
                    acc += poly_avg[i, a] * u[i]
                rhs[a] = acc
                if abs(acc) > grad_scale:
                    grad_scale = abs(acc)
                for b in range(k):
                    normal[a, b] = gram_pp[a, b]
            for cj in range(r):
                e = sel_e[cj] - 1
                s = sel_s[cj]
                for a in range(k):
                    normal[a, k + cj] = gram_pj[a, e] * s
                    normal[k + cj, a] = normal[a, k + cj]
                for cj2 in range(r):
                    normal[k + cj, k + cj2] = (gram_jj[e, sel_e[cj2] - 1]
                                               * s * sel_s[cj2])
                rhs[k + cj] = s * 0.5 * jumps[e]
                if abs(rhs[k + cj]) > grad_scale:
                    grad_scale = abs(rhs[k + cj])
            mult_tol = _MULT_TOL * grad_scale

            # warm start only when the signed selection is unchanged
            warm_ok = use_warm
            if warm_ok:
                for cj in range(l):
                    tag = 0
                    if cj < r:
                        tag = sel_e[cj] if sel_s[cj] > 0.0 else -sel_e[cj]
                    if warm_tags[m, var, cj] != tag:
                        warm_ok = False
                        break
            for j in range(n):
                x[j] = warm_coeffs[m, var, j] if warm_ok else 0.0
            for cj in range(r):
                if x[k + cj] < 0.0:
                    x[k + cj] = 0.0
                active[cj] = 1 if x[k + cj] == 0.0 else 0

            # active-set iteration
            converged = False
            for _outer in range(10 * (r + 1)):
                # restricted CG on the free coordinates
                nf = 0
                for a in range(k):
                    free_idx[nf] = a
                    nf += 1
                for cj in range(r):
                    if active[cj] == 0:
                        free_idx[nf] = k + cj
                        nf += 1
                rhs_norm2 = 0.0
                for a in range(nf):
                    ia = free_idx[a]
                    sub_rhs[a] = rhs[ia]
                    sub_x[a] = x[ia]
                    rhs_norm2 += rhs[ia] * rhs[ia]
                    for b in range(nf):
                        sub_mat[a, b] = normal[ia, free_idx[b]]
                if rhs_norm2 == 0.0:
                    for a in range(nf):
                        sub_x[a] = 0.0
                else:
                    res2 = 0.0
                    for a in range(nf):
                        acc = sub_rhs[a]
                        for b in range(nf):
                            acc -= sub_mat[a, b] * sub_x[b]
                        cg_r[a] = acc
                        cg_p[a] = acc
                        best_x[a] = sub_x[a]
                        res2 += acc * acc
                    best_res2 = res2
                    ok = res2 <= _CG_TOL2 * rhs_norm2
                    if not ok:
                        for _it in range(4 * nf):
                            pap = 0.0
                            for a in range(nf):
                                acc = 0.0
                                for b in range(nf):
                                    acc += sub_mat[a, b] * cg_p[b]
                                cg_ap[a] = acc
                                pap += cg_p[a] * acc
                            if pap <= 0.0:
                                break
                            alpha = res2 / pap
                            new_res2 = 0.0
                            for a in range(nf):
                                sub_x[a] += alpha * cg_p[a]
                                cg_r[a] -= alpha * cg_ap[a]
                                new_res2 += cg_r[a] * cg_r[a]
                            if new_res2 < best_res2:
                                best_res2 = new_res2
                                for a in range(nf):
                                    best_x[a] = sub_x[a]
                            if new_res2 <= _CG_TOL2 * rhs_norm2:
                                res2 = new_res2
                                ok = True
                                break
                            beta = new_res2 / res2
                            res2 = new_res2
                            for a in range(nf):
                                cg_p[a] = cg_r[a] + beta * cg_p[a]
                    if not ok:
                        if best_res2 <= _CG_ACCEPT2 * rhs_norm2:
                            for a in range(nf):
                                sub_x[a] = best_x[a]
                        else:
                            fail_info[0] = m
                            fail_info[1] = var
                            return STATUS_CG_FAILURE, violations
                for j in range(n):
                    cand[j] = 0.0
                for a in range(nf):
                    cand[free_idx[a]] = sub_x[a]

                # largest feasible step toward the candidate
                lam = 1.0
                blocking = -1
                for cj in range(r):
                    delta = cand[k + cj] - x[k + cj]
                    if delta < 0.0:
                        dcur = x[k + cj] if x[k + cj] > 0.0 else 0.0
                        ratio = -dcur / delta
                        if ratio < lam:
                            lam = ratio
                            blocking = cj
                if lam < 0.0:
                    lam = 0.0
                for j in range(n):
                    x[j] = (1.0 - lam) * x[j] + lam * cand[j]
                for cj in range(r):
                    if active[cj] == 1:
                        x[k + cj] = 0.0
                if lam < 1.0:
                    active[blocking] = 1
                    continue
                worst = -1
                worst_val = -mult_tol
                for cj in range(r):
                    if active[cj] == 1:
                        grad = -rhs[k + cj]
                        for j in range(n):
                            grad += normal[k + cj, j] * x[j]
                        if grad < worst_val:
                            worst_val = grad
                            worst = cj
                if worst < 0:
                    converged = True
                    break
                active[worst] = 0
            if not converged:
                fail_info[0] = m
                fail_info[1] = var
                return STATUS_CYCLE, violations

            scale = 1.0
            for j in range(n):
                if abs(x[j]) > scale:
                    scale = abs(x[j])
            for cj in range(r):
                if -_FEAS_TOL * scale <= x[k + cj] < 0.0:
                    x[k + cj] = 0.0

            # traces at the q+2 subcell edges
            for e in range(q1 + 1):
                val = 0.0
                for a in range(k):
                    val += poly_edge[e, a] * x[a]
                left_tr[m, e, var] = val
                right_tr[m, e, var] = val
            for cj in range(r):
                ds = x[k + cj] * sel_s[cj]
                e = sel_e[cj]
                left_tr[m, e, var] -= ds
                right_tr[m, e, var] += ds
                trace_jump = 2.0 * ds
                if trace_jump != 0.0 and (trace_jump > 0.0) != (jumps[e - 1] > 0.0):
                    violations += 1

            for j in range(nmax):
                warm_coeffs[m, var, j] = x[j] if j < n else 0.0
            for cj in range(l):
                if cj < r:
                    warm_tags[m, var, cj] = (sel_e[cj] if sel_s[cj] > 0.0
                                             else -sel_e[cj])
                else:
                    warm_tags[m, var, cj] = 0
    return STATUS_OK, violations


@njit(cache=True)
def _flux_divergence(avg_ext, left_tr, right_tr, widths, gamma, dudt, fail_info):
    m_int, q1 = widths.shape
    n_edges = m_int * q1 + 1
    flux = np.empty((n_edges, 3))
    fallbacks = 0
    for p in range(n_edges):
        mi = p // q1
        le = p % q1
        if le == 0:
            em_l, ee_l = mi, q1
            em_r, ee_r = mi + 1, 0
        else:
            em_l, ee_l = mi + 1, le
            em_r, ee_r = mi + 1, le
        a0 = left_tr[em_l, ee_l, 0]
        a1 = left_tr[em_l, ee_l, 1]
        a2 = left_tr[em_l, ee_l, 2]
        b0 = right_tr[em_r, ee_r, 0]
        b1 = right_tr[em_r, ee_r, 1]
        b2 = right_tr[em_r, ee_r, 2]
        # a trace that recovery overshoot pushed outside the physical region
        # falls back to the adjacent subcell average (formally first-order)
        if a0 <= 0.0 or (gamma - 1.0) * (a2 - 0.5 * a1 * a1 / a0) <= 0.0:
            sub_l = q1 - 1 if le == 0 else le - 1
            a0 = avg_ext[em_l, sub_l, 0]
            a1 = avg_ext[em_l, sub_l, 1]
            a2 = avg_ext[em_l, sub_l, 2]
            fallbacks += 1
        if b0 <= 0.0 or (gamma - 1.0) * (b2 - 0.5 * b1 * b1 / b0) <= 0.0:
            b0 = avg_ext[em_r, ee_r, 0]
            b1 = avg_ext[em_r, ee_r, 1]
            b2 = avg_ext[em_r, ee_r, 2]
            fallbacks += 1
        if a0 <= 0.0 or b0 <= 0.0:
            fail_info[0] = mi
            fail_info[1] = le
            return STATUS_NONPHYSICAL, fallbacks
        v_l = a1 / a0
        p_l = (gamma - 1.0) * (a2 - 0.5 * a1 * v_l)
        v_r = b1 / b0
        p_r = (gamma - 1.0) * (b2 - 0.5 * b1 * v_r)
        if p_l <= 0.0 or p_r <= 0.0:
            fail_info[0] = mi
            fail_info[1] = le
            return STATUS_NONPHYSICAL, fallbacks
        f_l0 = a1
        f_l1 = a1 * v_l + p_l
        f_l2 = v_l * (a2 + p_l)
        if a0 == b0 and a1 == b1 and a2 == b2:
            flux[p, 0] = f_l0
            flux[p, 1] = f_l1
            flux[p, 2] = f_l2
            continue
        f_r0 = b1
        f_r1 = b1 * v_r + p_r
        f_r2 = v_r * (b2 + p_r)
        c_l = np.sqrt(gamma * p_l / a0)
        c_r = np.sqrt(gamma * p_r / b0)
        a_lo = min(v_l - c_l, v_r - c_r)
        a_hi = max(v_l + c_l, v_r + c_r)
        if a_lo > 0.0 or (a_lo == a_hi and a_lo >= 0.0):
            flux[p, 0] = f_l0
            flux[p, 1] = f_l1
            flux[p, 2] = f_l2
        elif a_hi < 0.0 or a_lo == a_hi:
            flux[p, 0] = f_r0
            flux[p, 1] = f_r1
            flux[p, 2] = f_r2
        else:
            inv = 1.0 / (a_hi - a_lo)
            prod = a_hi * a_lo
            flux[p, 0] = (a_hi * f_l0 - a_lo * f_r0 + prod * (b0 - a0)) * inv
            flux[p, 1] = (a_hi * f_l1 - a_lo * f_r1 + prod * (b1 - a1)) * inv
            flux[p, 2] = (a_hi * f_l2 - a_lo * f_r2 + prod * (b2 - a2)) * inv
    for i in range(m_int):
        for sub in range(q1):
            base = i * q1 + sub
            w = widths[i, sub]
            for c in range(3):
                dudt[i, sub, c] = (flux[base, c] - flux[base + 1, c]) / w
    return STATUS_OK, fallbacks


def recover_batch(averages: Array, tables: RecoveryTables, k: int, l: int):
    """Single-variable batched recovery mirroring the numpy backend."""
    averages = np.ascontiguousarray(averages, dtype=float)
    m_count, q1 = averages.shape
    stacked = np.empty((m_count, q1, 3))
    stacked[:, :, 0] = averages
    stacked[:, :, 1] = averages
    stacked[:, :, 2] = averages
    warm_coeffs = np.zeros((m_count, 3, k + l))
    warm_tags = np.zeros((m_count, 3, max(l, 1)), dtype=np.int64)
    left = np.empty((m_count, q1 + 1, 3))
    right = np.empty((m_count, q1 + 1, 3))
    fail = np.zeros(2, dtype=np.int64)
    status, violations = _recover_all(
        stacked, tables.poly_avg, tables.poly_edge, tables.gram_pp,
        tables.gram_pj, tables.gram_jj, k, l, warm_coeffs, warm_tags,
        False, left, right, fail,
    )
    _raise_for_recover_status(status, fail)
    tags = warm_tags[:, 0, :l]
    return (warm_coeffs[:, 0, :], tags, left[:, :, 0], right[:, :, 0],
            violations // 3)


def _raise_for_recover_status(status, fail):
    if status == STATUS_CG_FAILURE:
        raise CgError(f"inner CG failed in macrocell {fail[0]}, "
                      f"variable {fail[1]}")
    if status == STATUS_CYCLE:
        raise NumericalError(f"active-set cycle in macrocell {fail[0]}, "
                             f"variable {fail[1]}")


def euler_rhs(avg_ext: Array, widths: Array, tables: RecoveryTables, k: int,
              l: int, gamma: float, warm_coeffs: Array | None = None,
              warm_tags: Array | None = None):
    """Fused recovery + flux + divergence; see the numpy backend docstring."""
    avg_ext = np.ascontiguousarray(avg_ext, dtype=float)
    m_total, q1, _ = avg_ext.shape
    m_int = m_total - 2
    use_warm = warm_coeffs is not None and warm_tags is not None
    if not use_warm:
        warm_coeffs = np.zeros((m_total, 3, k + l))
        warm_tags = np.zeros((m_total, 3, max(l, 1)), dtype=np.int64)
    left = np.empty((m_total, q1 + 1, 3))
    right = np.empty((m_total, q1 + 1, 3))
    fail = np.zeros(2, dtype=np.int64)
    status, violations = _recover_all(
        avg_ext, tables.poly_avg, tables.poly_edge, tables.gram_pp,
        tables.gram_pj, tables.gram_jj, k, l, warm_coeffs, warm_tags,
        use_warm, left, right, fail,
    )
    _raise_for_recover_status(status, fail)
    dudt = np.empty((m_int, q1, 3))
    widths = np.ascontiguousarray(widths, dtype=float)
    status, fallbacks = _flux_divergence(avg_ext, left, right, widths, gamma,
                                         dudt, fail)
    if status == STATUS_NONPHYSICAL:
        raise NonPhysicalState(
            f"non-physical state at macrocell {fail[0]}, edge {fail[1]}",
            macrocell=int(fail[0]), subcell=int(fail[1]),
        )
    return dudt, violations, fallbacks
