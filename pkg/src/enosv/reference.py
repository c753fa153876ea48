"""Independent reference solutions: exact Riemann solver and a MUSCL scheme.

The exact Riemann solver follows the classical pressure-function approach: a
Newton iteration on ``f_L(p) + f_R(p) + (v_r - v_l) = 0`` with shock and
rarefaction branch functions, then self-similar sampling in ``xi = x / t``.
The MUSCL reference is a minmod-limited second-order scheme on a uniform
grid with HLL fluxes, used where no closed-form solution exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from enosv.cases import TestCase
from enosv.errors import ConfigError, NumericalError
from enosv.euler import (
    PrimitiveState,
    conserved_arrays,
    hll_flux_arrays,
    max_signal_speed,
    sound_speed,
)
from enosv.output import read_profile_csv, write_profile_csv
from enosv.timestepping import ssprk33_advance

Array = np.ndarray

NEWTON_TOL = 1.0e-12
NEWTON_MAX_ITER = 100
PRESSURE_FLOOR = 1.0e-8


def _branch_value(p_star, state: PrimitiveState, c, gamma):
    """Pressure-function value for one side (shock or rarefaction branch)."""
    if p_star > state.p:
        a = 2.0 / ((gamma + 1.0) * state.rho)
        b = (gamma - 1.0) / (gamma + 1.0) * state.p
        return (p_star - state.p) * np.sqrt(a / (p_star + b))
    return (2.0 * c / (gamma - 1.0)) * (
        (p_star / state.p) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0
    )


def _branch_derivative(p_star, state: PrimitiveState, c, gamma):
    if p_star > state.p:
        a = 2.0 / ((gamma + 1.0) * state.rho)
        b = (gamma - 1.0) / (gamma + 1.0) * state.p
        return np.sqrt(a / (p_star + b)) * (
            1.0 - 0.5 * (p_star - state.p) / (p_star + b)
        )
    return (p_star / state.p) ** (-(gamma + 1.0) / (2.0 * gamma)) / (state.rho * c)


@dataclass(frozen=True)
class RiemannSolution:
    """Star-region values plus a self-similar sampler over ``xi = x / t``."""

    left: PrimitiveState
    right: PrimitiveState
    gamma: float
    p_star: float
    v_star: float
    rho_star_left: float
    rho_star_right: float
    left_wave: str
    right_wave: str

    @property
    def wave_speeds(self) -> tuple[float, ...]:
        """Similarity coordinates of every wave front (heads/tails/contact)."""
        g = self.gamma
        c_l = sound_speed(self.left, g)
        c_r = sound_speed(self.right, g)
        speeds = []
        if self.left_wave == "shock":
            speeds.append(self.left.v - c_l * np.sqrt(
                (g + 1.0) / (2.0 * g) * self.p_star / self.left.p
                + (g - 1.0) / (2.0 * g)))
        else:
            c_star = c_l * (self.p_star / self.left.p) ** ((g - 1.0) / (2.0 * g))
            speeds.extend([self.left.v - c_l, self.v_star - c_star])
        speeds.append(self.v_star)
        if self.right_wave == "shock":
            speeds.append(self.right.v + c_r * np.sqrt(
                (g + 1.0) / (2.0 * g) * self.p_star / self.right.p
                + (g - 1.0) / (2.0 * g)))
        else:
            c_star = c_r * (self.p_star / self.right.p) ** ((g - 1.0) / (2.0 * g))
            speeds.extend([self.v_star + c_star, self.right.v + c_r])
        return tuple(speeds)

    def sample(self, xi) -> tuple[Array, Array, Array]:
        """Primitive state (rho, v, p) at similarity coordinates ``xi``."""
        xi = np.asarray(xi, dtype=float)
        g = self.gamma
        g4 = 2.0 / (g - 1.0)
        g3 = 2.0 * g / (g - 1.0)
        g5 = 2.0 / (g + 1.0)
        g7 = (g - 1.0) / 2.0

        rho = np.empty_like(xi)
        v = np.empty_like(xi)
        p = np.empty_like(xi)

        on_left = xi <= self.v_star
        for is_left in (True, False):
            side = on_left if is_left else ~on_left
            if not np.any(side):
                continue
            state = self.left if is_left else self.right
            sign = 1.0 if is_left else -1.0
            c = sound_speed(state, g)
            wave = self.left_wave if is_left else self.right_wave
            rho_star = self.rho_star_left if is_left else self.rho_star_right
            x = xi[side]
            r = np.empty_like(x)
            u = np.empty_like(x)
            q = np.empty_like(x)
            if wave == "shock":
                shock_speed = state.v - sign * c * np.sqrt(
                    (g + 1.0) / (2.0 * g) * self.p_star / state.p
                    + (g - 1.0) / (2.0 * g))
                outside = sign * x <= sign * shock_speed
                r[:] = np.where(outside, state.rho, rho_star)
                u[:] = np.where(outside, state.v, self.v_star)
                q[:] = np.where(outside, state.p, self.p_star)
            else:
                c_star = c * (self.p_star / state.p) ** ((g - 1.0) / (2.0 * g))
                head = state.v - sign * c
                tail = self.v_star - sign * c_star
                outside = sign * x <= sign * head
                inside_star = sign * x >= sign * tail
                fan = ~outside & ~inside_star
                r[:] = np.where(outside, state.rho, rho_star)
                u[:] = np.where(outside, state.v, self.v_star)
                q[:] = np.where(outside, state.p, self.p_star)
                if np.any(fan):
                    xf = x[fan]
                    cf = g5 * (c + sign * g7 * (state.v - xf))
                    uf = g5 * (sign * c + g7 * state.v + xf)
                    r[fan] = state.rho * (cf / c) ** g4
                    u[fan] = uf
                    q[fan] = state.p * (cf / c) ** g3
            rho[side] = r
            v[side] = u
            p[side] = q
        if xi.ndim == 0:
            return float(rho), float(v), float(p)
        return rho, v, p


def exact_riemann(left: PrimitiveState, right: PrimitiveState,
                  gamma: float) -> RiemannSolution:
    """Solve the two-state Riemann problem for the Euler equations.

    Newton iteration on the star pressure to relative tolerance 1e-12 from a
    primitive-variable initial guess; raises when vacuum would be generated
    or the iteration fails to converge.
    """
    c_l = sound_speed(left, gamma)
    c_r = sound_speed(right, gamma)
    if 2.0 / (gamma - 1.0) * (c_l + c_r) <= right.v - left.v:
        raise NumericalError("vacuum generation detected; star region is empty")

    p_guess = max(
        0.5 * (left.p + right.p)
        - 0.125 * (right.v - left.v) * (left.rho + right.rho) * (c_l + c_r),
        PRESSURE_FLOOR,
    )
    p = p_guess
    for _ in range(NEWTON_MAX_ITER):
        f = (_branch_value(p, left, c_l, gamma)
             + _branch_value(p, right, c_r, gamma) + right.v - left.v)
        df = (_branch_derivative(p, left, c_l, gamma)
              + _branch_derivative(p, right, c_r, gamma))
        p_new = p - f / df
        if p_new <= 0.0:
            p_new = 0.5 * p
        if abs(p_new - p) <= NEWTON_TOL * 0.5 * abs(p_new + p):
            p = p_new
            break
        p = p_new
    else:
        raise NumericalError(
            f"star pressure iteration did not converge in {NEWTON_MAX_ITER} steps"
        )

    v_star = 0.5 * (left.v + right.v) + 0.5 * (
        _branch_value(p, right, c_r, gamma) - _branch_value(p, left, c_l, gamma)
    )
    g6 = (gamma - 1.0) / (gamma + 1.0)

    def star_density(state):
        ratio = p / state.p
        if p > state.p:
            return state.rho * (ratio + g6) / (g6 * ratio + 1.0)
        return state.rho * ratio ** (1.0 / gamma)

    return RiemannSolution(
        left=left,
        right=right,
        gamma=gamma,
        p_star=float(p),
        v_star=float(v_star),
        rho_star_left=float(star_density(left)),
        rho_star_right=float(star_density(right)),
        left_wave="shock" if p > left.p else "rarefaction",
        right_wave="shock" if p > right.p else "rarefaction",
    )


def riemann_subcell_averages(solution: RiemannSolution, subcell_edges: Array,
                             t: float, x0: float = 0.0) -> Array:
    """Exact conserved averages of the self-similar solution on given cells.

    ``subcell_edges`` is any (M, q+2) edge array.  Each cell integral is
    split at the wave fronts, so the quadrature only ever sees smooth pieces.
    """
    edges = np.asarray(subcell_edges, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(12)
    fronts = np.array(solution.wave_speeds) * t + x0
    out = np.empty(edges.shape[:-1] + (edges.shape[-1] - 1, 3))
    flat_edges = edges.reshape(-1, edges.shape[-1])
    flat_out = out.reshape(-1, edges.shape[-1] - 1, 3)
    for m in range(flat_edges.shape[0]):
        for i in range(flat_edges.shape[1] - 1):
            a, b = flat_edges[m, i], flat_edges[m, i + 1]
            cuts = [a] + [c for c in np.sort(fronts) if a < c < b] + [b]
            total = np.zeros(3)
            for lo, hi in zip(cuts, cuts[1:]):
                x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes
                if t > 0.0:
                    rho, v, p = solution.sample((x - x0) / t)
                else:
                    rho, v, p = solution.sample(np.where(x < x0, -1.0, 1.0))
                cons = conserved_arrays(rho, v, p, solution.gamma)
                total += 0.5 * (hi - lo) * np.einsum("n,nc->c", weights, cons)
            flat_out[m, i] = total / (b - a)
    return out


def minmod(s1, s2):
    """Zero on a sign change, otherwise the argument of smaller magnitude."""
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    out = np.where(s1 * s2 < 0.0, 0.0, np.where(np.abs(s1) <= np.abs(s2), s1, s2))
    return out if out.ndim else float(out)


def _muscl_rhs(u: Array, dx: float, gamma: float, boundary: str) -> Array:
    if boundary == "periodic":
        ext = np.concatenate([u[-2:], u, u[:2]], axis=0)
    else:
        ext = np.concatenate([u[:1], u[:1], u, u[-1:], u[-1:]], axis=0)
    diffs = ext[1:] - ext[:-1]
    slopes = minmod(diffs[:-1], diffs[1:])  # per cell 1..n+2 of ext
    inner = ext[1:-1]
    u_left = inner[:-1] + 0.5 * slopes[:-1]   # right-face trace of cell j
    u_right = inner[1:] - 0.5 * slopes[1:]    # left-face trace of cell j+1
    flux = hll_flux_arrays(u_left, u_right, gamma)
    return -(flux[1:] - flux[:-1]) / dx


def muscl_solve(case: TestCase, n_cells: int, t_end: float | None = None,
                gamma: float = 1.4, c_fl: float = 0.1):
    """Minmod-limited MUSCL run on a uniform grid; returns (edges, averages)."""
    if n_cells < 4:
        raise ConfigError("MUSCL reference needs at least 4 cells")
    a, b = case.domain
    dx = (b - a) / n_cells
    edges = np.linspace(a, b, n_cells + 1)
    u = np.empty((n_cells, 3))
    for i in range(n_cells):
        u[i] = case.initial_average(edges[i], edges[i + 1], gamma)
    t = 0.0
    t_final = case.t_end if t_end is None else t_end
    while t < t_final:
        dt = c_fl * dx / max_signal_speed(u, gamma)
        dt = min(dt, t_final - t)
        u = ssprk33_advance(u, dt, lambda w: _muscl_rhs(w, dx, gamma, case.boundary))
        t += dt
    return edges, u


def muscl_reference(case: TestCase, n_cells: int, t_end: float, gamma: float,
                    cache_dir) -> tuple[Array, Array]:
    """Disk-cached MUSCL profile, content-addressed by (case, N, t_end, gamma)."""
    cache_dir = Path(cache_dir)
    name = f"muscl_{case.name}_{n_cells}_{t_end:.6g}_{gamma:.6g}.csv"
    path = cache_dir / name
    if path.exists():
        x_left, x_right, u = read_profile_csv(path)
        edges = np.concatenate([x_left, x_right[-1:]])
        return edges, u
    edges, u = muscl_solve(case, n_cells, t_end=t_end, gamma=gamma)
    write_profile_csv(path, edges[:-1], edges[1:], u, gamma)
    return edges, u


def resample_conservative(src_edges: Array, src_avgs: Array,
                          target_lo: Array, target_hi: Array) -> Array:
    """Overlap-weighted averages of a piecewise-constant profile.

    Integrates the cellwise-constant representation of ``src_avgs`` exactly
    over each target interval, conserving the integral of the profile.
    """
    src_edges = np.asarray(src_edges, dtype=float)
    src_avgs = np.asarray(src_avgs, dtype=float)
    widths = np.diff(src_edges)
    flat = src_avgs.reshape(len(widths), -1)
    cumulative = np.concatenate(
        [np.zeros((1, flat.shape[1])), np.cumsum(flat * widths[:, None], axis=0)]
    )

    def integral(points):
        points = np.clip(points, src_edges[0], src_edges[-1])
        idx = np.clip(np.searchsorted(src_edges, points, side="right") - 1,
                      0, len(widths) - 1)
        return cumulative[idx] + (points - src_edges[idx])[:, None] * flat[idx]

    lo = np.asarray(target_lo, dtype=float).ravel()
    hi = np.asarray(target_hi, dtype=float).ravel()
    result = (integral(hi) - integral(lo)) / (hi - lo)[:, None]
    shape = np.shape(target_lo) + src_avgs.shape[1:]
    return result.reshape(shape)
