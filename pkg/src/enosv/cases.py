"""Registry of test cases, exact initialization, and error norms.

Initial subcell averages are computed exactly: Gaussian profiles through the
error function, trigonometric profiles through their antiderivatives, and
piecewise-constant states by splitting cells at the discontinuity.  That
keeps initialization error out of convergence measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from enosv.discretization import Grid
from enosv.errors import ConfigError
from enosv.euler import PrimitiveState, sound_speed

Array = np.ndarray

CASE_NAMES = ("advection", "sod", "lax", "shu-osher")
STATIC_NAMES = ("static-u1", "static-u2", "static-u3")


@dataclass(frozen=True)
class TestCase:
    """One flow problem: domain, initial data, boundary kind, reference handle.

    ``exact_kind`` selects how a reference profile is obtained: "advection"
    (closed-form averages), "riemann" (exact Riemann solver on
    ``left_state``/``right_state``), "muscl" (high-resolution limited-slope
    reference), or "none".
    """

    name: str
    domain: tuple[float, float]
    boundary: str
    t_end: float
    exact_kind: str
    initial: Callable[[Array], tuple[Array, Array, Array]]
    initial_average: Callable[[float, float, float], Array]
    breakpoints: tuple[float, ...] = ()
    left_state: PrimitiveState | None = None
    right_state: PrimitiveState | None = None
    disc_position: float = 0.0
    exact_average: Callable[[float, float, float, float], Array] | None = None
    reference_cells: int = 8192


def _assert_wave_containment(name, domain, t_end, x0, left, right, extra_states,
                             gamma=1.4):
    """Directional wave-speed bound: no wave reaches a boundary before t_end.

    The left boundary only sees signals when the adjacent state has a
    left-running characteristic; the right bound uses the fastest v + c over
    all initial states.
    """
    a, b = domain
    states = [left, right, *extra_states]
    leftward = max(0.0, -(left.v - sound_speed(left, gamma)))
    rightward = max(max(0.0, s.v + sound_speed(s, gamma)) for s in states)
    if leftward * t_end > (x0 - a) or rightward * t_end > (b - x0):
        raise ConfigError(
            f"case {name}: waves reach a non-periodic boundary before t={t_end}"
        )


def _gauss_interval(f, a, b, order=24):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (a + b) + 0.5 * (b - a) * nodes
    return 0.5 * (b - a) * np.sum(weights * f(x), axis=-1)


def _average_piecewise(f, a, b, breakpoints, order=24):
    """Average of a piecewise-smooth function, split exactly at breakpoints."""
    cuts = [a] + [c for c in sorted(breakpoints) if a < c < b] + [b]
    total = sum(_gauss_interval(f, lo, hi, order) for lo, hi in zip(cuts, cuts[1:]))
    return total / (b - a)


def _gaussian_integral(a, b, mu):
    """Integral of exp(-(x - mu)^2 / 2) over [a, b]."""
    s = math.sqrt(0.5)
    return math.sqrt(0.5 * math.pi) * (math.erf((b - mu) * s) - math.erf((a - mu) * s))


ADVECTION_DOMAIN = (-5.0, 15.0)
_ADV_PERIOD = ADVECTION_DOMAIN[1] - ADVECTION_DOMAIN[0]
_ADV_IMAGES = (-2, -1, 0, 1, 2)


def _advection_density_average(a, b, t):
    """Exact subcell average of the periodized advected Gaussian bump."""
    t = math.fmod(t, _ADV_PERIOD)
    total = 0.0
    for n in _ADV_IMAGES:
        total += _gaussian_integral(a, b, 1.0 + t + n * _ADV_PERIOD)
    return 1.0 + total / (b - a)


def _advection_average(a, b, t, gamma):
    rho = _advection_density_average(a, b, t)
    # v = 1 and p = 1 for all time, so momentum and energy averages are
    # affine in the density average
    return np.array([rho, rho, 1.0 / (gamma - 1.0) + 0.5 * rho])


def case_advection() -> TestCase:
    """Advected density bump: rho = 1 + exp(-(x-1)^2/2), v = 1, p = 1, periodic."""

    def initial(x):
        x = np.asarray(x, dtype=float)
        rho = 1.0 + sum(
            np.exp(-0.5 * (x - 1.0 - n * _ADV_PERIOD) ** 2) for n in _ADV_IMAGES
        )
        return rho, np.ones_like(x), np.ones_like(x)

    return TestCase(
        name="advection",
        domain=ADVECTION_DOMAIN,
        boundary="periodic",
        t_end=10.0,
        exact_kind="advection",
        initial=initial,
        initial_average=lambda a, b, gamma: _advection_average(a, b, 0.0, gamma),
        exact_average=_advection_average,
    )


def _two_state_case(name, left, right, t_end, domain=(-5.0, 5.0), x0=0.0):
    _assert_wave_containment(name, domain, t_end, x0, left, right, ())

    def initial(x):
        x = np.asarray(x, dtype=float)
        rho = np.where(x < x0, left.rho, right.rho)
        v = np.where(x < x0, left.v, right.v)
        p = np.where(x < x0, left.p, right.p)
        return rho, v, p

    def initial_average(a, b, gamma):
        frac = np.clip((x0 - a) / (b - a), 0.0, 1.0)
        def mix(f, g):
            return frac * f + (1.0 - frac) * g
        rho = mix(left.rho, right.rho)
        mom = mix(left.rho * left.v, right.rho * right.v)
        e_l = left.p / (gamma - 1.0) + 0.5 * left.rho * left.v ** 2
        e_r = right.p / (gamma - 1.0) + 0.5 * right.rho * right.v ** 2
        return np.array([rho, mom, mix(e_l, e_r)])

    return TestCase(
        name=name,
        domain=domain,
        boundary="transmissive",
        t_end=t_end,
        exact_kind="riemann",
        initial=initial,
        initial_average=initial_average,
        breakpoints=(x0,),
        left_state=left,
        right_state=right,
        disc_position=x0,
    )


def case_sod() -> TestCase:
    """Sod shock tube: (1, 0, 1) | (0.125, 0, 0.1), final time 1.8."""
    return _two_state_case(
        "sod",
        PrimitiveState(1.0, 0.0, 1.0),
        PrimitiveState(0.125, 0.0, 0.1),
        t_end=1.8,
    )


def case_lax() -> TestCase:
    """Lax problem: (0.445, 0.698, 3.528) | (0.5, 0, 0.571), final time 1.2."""
    return _two_state_case(
        "lax",
        PrimitiveState(0.445, 0.698, 3.528),
        PrimitiveState(0.500, 0.000, 0.571),
        t_end=1.2,
    )


SHU_OSHER_EPS = 0.2


def case_shu_osher() -> TestCase:
    """Shock / sine-wave interaction; reference is a high-resolution limited scheme."""
    left = PrimitiveState(3.857143, 2.629369, 10.33333)
    domain = (0.0, 10.0)
    x0 = 1.0
    sine_extremes = [
        PrimitiveState(1.0 + s * SHU_OSHER_EPS, 0.0, 1.0) for s in (-1.0, 1.0)
    ]
    _assert_wave_containment("shu-osher", domain, 1.8, x0, left,
                             sine_extremes[0], sine_extremes)

    def initial(x):
        x = np.asarray(x, dtype=float)
        rho = np.where(x < x0, left.rho, 1.0 + SHU_OSHER_EPS * np.sin(5.0 * x))
        v = np.where(x < x0, left.v, 0.0)
        p = np.where(x < x0, left.p, 1.0)
        return rho, v, p

    def initial_average(a, b, gamma):
        e_left = left.p / (gamma - 1.0) + 0.5 * left.rho * left.v ** 2
        if b <= x0:
            return np.array([left.rho, left.rho * left.v, e_left])
        lo = max(a, x0)
        # exact antiderivative of 1 + eps sin(5x) on the smooth part
        right_int = (b - lo) + SHU_OSHER_EPS * (math.cos(5.0 * lo) - math.cos(5.0 * b)) / 5.0
        if a >= x0:
            rho = right_int / (b - a)
            return np.array([rho, 0.0, 1.0 / (gamma - 1.0)])
        frac = (x0 - a) / (b - a)
        rho = frac * left.rho + right_int / (b - a)
        mom = frac * left.rho * left.v
        energy = frac * e_left + (1.0 - frac) / (gamma - 1.0)
        return np.array([rho, mom, energy])

    return TestCase(
        name="shu-osher",
        domain=domain,
        boundary="transmissive",
        t_end=1.8,
        exact_kind="muscl",
        initial=initial,
        initial_average=initial_average,
        breakpoints=(x0,),
        left_state=left,
        right_state=PrimitiveState(1.0 + SHU_OSHER_EPS * math.sin(5.0), 0.0, 1.0),
        disc_position=x0,
    )


def get_case(name: str) -> TestCase:
    factories = {
        "advection": case_advection,
        "sod": case_sod,
        "lax": case_lax,
        "shu-osher": case_shu_osher,
    }
    if name not in factories:
        raise ConfigError(f"unknown case {name!r}; choose from {CASE_NAMES}")
    return factories[name]()


# ---------------------------------------------------------------------------
# static recovery targets


def static_case(name: str) -> Callable[[Array], Array]:
    """Scalar target functions on [-1, 1] for the static recovery tests."""
    if name == "static-u1":
        return lambda x: np.where(np.asarray(x, dtype=float) < 0.0, 1.0, -1.0)
    if name == "static-u2":
        return lambda x: np.sin(np.asarray(x, dtype=float))
    if name == "static-u3":
        return lambda x: np.where(
            np.asarray(x, dtype=float) < 0.0,
            np.sin(np.asarray(x, dtype=float)),
            np.cos(np.asarray(x, dtype=float)),
        )
    raise ConfigError(f"unknown static case {name!r}; choose from {STATIC_NAMES}")


def static_subcell_averages(name: str, subcell_edges: Array) -> Array:
    """Exact subcell averages of a static target on one macrocell."""
    f = static_case(name)
    edges = np.asarray(subcell_edges, dtype=float)
    return np.array([
        _average_piecewise(f, edges[i], edges[i + 1], (0.0,))
        for i in range(edges.size - 1)
    ])


# ---------------------------------------------------------------------------
# initialization and error measurement on spectral-volume grids


def initial_subcell_averages(case: TestCase, grid: Grid, gamma: float) -> Array:
    """Exact conserved subcell averages of the initial condition, (M, q+1, 3)."""
    edges = grid.subcell_edges
    out = np.empty((grid.n_macrocells, grid.subcells_per_macrocell, 3))
    for m in range(grid.n_macrocells):
        for i in range(grid.subcells_per_macrocell):
            out[m, i] = case.initial_average(edges[m, i], edges[m, i + 1], gamma)
    return out


def advection_exact_averages(case: TestCase, grid: Grid, t: float,
                             gamma: float) -> Array:
    if case.exact_average is None:
        raise ConfigError(f"case {case.name} has no closed-form exact averages")
    edges = grid.subcell_edges
    out = np.empty((grid.n_macrocells, grid.subcells_per_macrocell, 3))
    for m in range(grid.n_macrocells):
        for i in range(grid.subcells_per_macrocell):
            out[m, i] = case.exact_average(edges[m, i], edges[m, i + 1], t, gamma)
    return out


def error_norms(numerical: Array, exact: Array, grid: Grid):
    """Volume-weighted L1 and pointwise-max Linf over subcell averages.

    Works per trailing variable; inputs of shape (M, q+1) or (M, q+1, C).
    """
    numerical = np.asarray(numerical, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if numerical.shape != exact.shape:
        raise ConfigError("numerical/exact discretizations do not match")
    expected = (grid.n_macrocells, grid.subcells_per_macrocell)
    if numerical.shape[:2] != expected:
        raise ConfigError("averages do not match the grid")
    diff = np.abs(numerical - exact)
    weights = grid.subcell_widths
    if diff.ndim == 3:
        l1 = np.einsum("mq,mqc->c", weights, diff)
        linf = diff.max(axis=(0, 1))
    else:
        l1 = float(np.sum(weights * diff))
        linf = float(diff.max())
    return l1, linf


def count_extrema(values: Array, prominence: float) -> int:
    """Number of interior extrema whose swing exceeds ``prominence``."""
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return 0
    direction = 0
    extreme = values[0]
    count = 0
    for v in values[1:]:
        if direction == 0:
            if v - extreme >= prominence:
                direction = 1
                extreme = v
            elif extreme - v >= prominence:
                direction = -1
                extreme = v
        elif direction == 1:
            if v > extreme:
                extreme = v
            elif extreme - v >= prominence:
                count += 1
                direction = -1
                extreme = v
        else:
            if v < extreme:
                extreme = v
            elif v - extreme >= prominence:
                count += 1
                direction = 1
                extreme = v
    return count
