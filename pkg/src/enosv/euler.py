"""Euler-equation physics: state conversions, flux, wave speeds, HLL flux.

Scalar operations work on small frozen state objects; the ``*_arrays``
helpers provide the vectorized versions used by the solvers, operating on
``(..., 3)`` conserved-variable arrays ordered (rho, momentum, energy).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from enosv.errors import NonPhysicalState

Array = np.ndarray


@dataclass(frozen=True)
class ConservedState:
    rho: float
    momentum: float
    energy: float

    def as_array(self) -> Array:
        return np.array([self.rho, self.momentum, self.energy])


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    v: float
    p: float


def conserved_to_primitive(u: ConservedState, gamma: float,
                           where: str = "") -> PrimitiveState:
    """Primitive variables with ``p = (gamma - 1) (E - rho v^2 / 2)``.

    Raises :class:`NonPhysicalState` when density or pressure lose positivity.
    """
    suffix = f" at {where}" if where else ""
    if u.rho <= 0.0:
        raise NonPhysicalState(f"non-positive density {u.rho}{suffix}")
    v = u.momentum / u.rho
    p = (gamma - 1.0) * (u.energy - 0.5 * u.rho * v * v)
    if p <= 0.0:
        raise NonPhysicalState(f"non-positive pressure {p}{suffix}")
    return PrimitiveState(u.rho, v, p)


def primitive_to_conserved(w: PrimitiveState, gamma: float) -> ConservedState:
    energy = w.p / (gamma - 1.0) + 0.5 * w.rho * w.v * w.v
    return ConservedState(w.rho, w.rho * w.v, energy)


def euler_flux(u: ConservedState, gamma: float) -> Array:
    """Physical flux ``(rho v, rho v^2 + p, v (E + p))``."""
    w = conserved_to_primitive(u, gamma)
    return np.array([
        u.momentum,
        u.rho * w.v * w.v + w.p,
        w.v * (u.energy + w.p),
    ])


def sound_speed(w: PrimitiveState, gamma: float) -> float:
    """Acoustic speed ``sqrt(gamma p / rho)``."""
    return float(np.sqrt(gamma * w.p / w.rho))


def davis_speeds(left: PrimitiveState, right: PrimitiveState,
                 gamma: float) -> tuple[float, float]:
    """Simple lower/upper signal speed estimates for the HLL flux."""
    c_l = sound_speed(left, gamma)
    c_r = sound_speed(right, gamma)
    a_l = min(left.v - c_l, right.v - c_r)
    a_r = max(left.v + c_l, right.v + c_r)
    return a_l, a_r


def hll_flux(u_l: ConservedState, u_r: ConservedState, gamma: float) -> Array:
    """Two-wave approximate Riemann flux with Davis speed estimates."""
    if u_l == u_r:
        return euler_flux(u_l, gamma)
    w_l = conserved_to_primitive(u_l, gamma)
    w_r = conserved_to_primitive(u_r, gamma)
    a_l, a_r = davis_speeds(w_l, w_r, gamma)
    if a_l > 0.0:
        return euler_flux(u_l, gamma)
    if a_r < 0.0:
        return euler_flux(u_r, gamma)
    if a_l == a_r:
        # degenerate estimates: upwind by the sign of the common speed
        return euler_flux(u_l, gamma) if a_l >= 0.0 else euler_flux(u_r, gamma)
    f_l = euler_flux(u_l, gamma)
    f_r = euler_flux(u_r, gamma)
    du = u_r.as_array() - u_l.as_array()
    return (a_r * f_l - a_l * f_r + a_r * a_l * du) / (a_r - a_l)


# ---------------------------------------------------------------------------
# vectorized helpers on (..., 3) conserved arrays


def primitive_arrays(u: Array, gamma: float) -> tuple[Array, Array, Array]:
    """Vectorized (rho, v, p); raises with the flat index of the first bad state."""
    rho = u[..., 0]
    if np.any(rho <= 0.0):
        idx = int(np.argmax(rho <= 0.0))
        raise NonPhysicalState("non-positive density", subcell=idx)
    v = u[..., 1] / rho
    p = (gamma - 1.0) * (u[..., 2] - 0.5 * rho * v * v)
    if np.any(p <= 0.0):
        idx = int(np.argmax(p <= 0.0))
        raise NonPhysicalState("non-positive pressure", subcell=idx)
    return rho, v, p


def conserved_arrays(rho: Array, v: Array, p: Array, gamma: float) -> Array:
    u = np.empty(np.broadcast(rho, v, p).shape + (3,))
    u[..., 0] = rho
    u[..., 1] = rho * v
    u[..., 2] = p / (gamma - 1.0) + 0.5 * rho * v * v
    return u


def flux_arrays(u: Array, gamma: float) -> Array:
    rho, v, p = primitive_arrays(u, gamma)
    f = np.empty_like(u)
    f[..., 0] = u[..., 1]
    f[..., 1] = rho * v * v + p
    f[..., 2] = v * (u[..., 2] + p)
    return f


def max_signal_speed(u: Array, gamma: float) -> float:
    rho, v, p = primitive_arrays(u, gamma)
    return float(np.max(np.abs(v) + np.sqrt(gamma * p / rho)))


def hll_flux_arrays(u_l: Array, u_r: Array, gamma: float,
                    a_l: Array | None = None, a_r: Array | None = None) -> Array:
    """Vectorized HLL flux over paired (..., 3) left/right states.

    The signal speeds default to the Davis estimates of the two input
    states; callers may pass speeds computed from different (for example
    cell-averaged) states, in which case the inputs only need positive
    density and the physical fluxes are formed algebraically.
    """
    if a_l is None or a_r is None:
        rho_l, v_l, p_l = primitive_arrays(u_l, gamma)
        rho_r, v_r, p_r = primitive_arrays(u_r, gamma)
        c_l = np.sqrt(gamma * p_l / rho_l)
        c_r = np.sqrt(gamma * p_r / rho_r)
        a_l = np.minimum(v_l - c_l, v_r - c_r)
        a_r = np.maximum(v_l + c_l, v_r + c_r)
    f_l = flux_arrays_unchecked(u_l, gamma)
    f_r = flux_arrays_unchecked(u_r, gamma)

    spread = a_r - a_l
    spread = np.where(spread == 0.0, 1.0, spread)
    middle = (a_r[..., None] * f_l - a_l[..., None] * f_r
              + (a_r * a_l)[..., None] * (u_r - u_l)) / spread[..., None]
    flux = np.where(a_l[..., None] > 0.0, f_l,
                    np.where(a_r[..., None] < 0.0, f_r, middle))
    same = np.all(u_l == u_r, axis=-1)
    flux = np.where(same[..., None], f_l, flux)
    return flux


def flux_arrays_unchecked(u: Array, gamma: float) -> Array:
    """Physical flux formed algebraically; only density positivity is required."""
    rho = u[..., 0]
    if np.any(rho <= 0.0):
        idx = int(np.argmax(rho <= 0.0))
        raise NonPhysicalState("non-positive density", subcell=idx)
    v = u[..., 1] / rho
    p = (gamma - 1.0) * (u[..., 2] - 0.5 * u[..., 1] * v)
    f = np.empty_like(u)
    f[..., 0] = u[..., 1]
    f[..., 1] = u[..., 1] * v + p
    f[..., 2] = v * (u[..., 2] + p)
    return f


def davis_speeds_arrays(u_l: Array, u_r: Array,
                        gamma: float) -> tuple[Array, Array]:
    """Vectorized Davis lower/upper signal speed estimates."""
    rho_l, v_l, p_l = primitive_arrays(u_l, gamma)
    rho_r, v_r, p_r = primitive_arrays(u_r, gamma)
    c_l = np.sqrt(gamma * p_l / rho_l)
    c_r = np.sqrt(gamma * p_r / rho_r)
    return np.minimum(v_l - c_l, v_r - c_r), np.maximum(v_l + c_l, v_r + c_r)
