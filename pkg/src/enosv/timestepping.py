"""Strong-stability-preserving Runge-Kutta time integration."""

from __future__ import annotations

import numpy as np

Array = np.ndarray


def ssprk33_advance(u: Array, dt: float, rhs) -> Array:
    """One SSPRK(3,3) step; three right-hand-side evaluations.

    Every stage is a convex combination of forward-Euler steps, so strong
    stability properties of the forward-Euler update carry over.
    """
    u1 = u + dt * rhs(u)
    u2 = 0.75 * u + 0.25 * (u1 + dt * rhs(u1))
    return (1.0 / 3.0) * u + (2.0 / 3.0) * (u2 + dt * rhs(u2))
