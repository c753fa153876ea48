"""Semidiscrete finite-volume solver over subcell averages.

The right-hand side recovers every macrocell (ghosts included), pairs
one-sided traces at each subcell edge, applies the HLL flux, and divides by
the subcell volumes.  Time integration is SSPRK(3,3) under a CFL step-size
rule based on the smallest subcell and the largest signal speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from enosv.discretization import Grid, recovery_tables
from enosv.errors import ConfigError, NumericalError
from enosv.euler import max_signal_speed
from enosv.kernels import get_backend
from enosv.timestepping import ssprk33_advance

Array = np.ndarray


@dataclass(frozen=True)
class SolverConfig:
    """Scheme parameters: basis sizes, CFL number, gas constant, boundaries."""

    k: int
    l: int
    c_fl: float = 0.1
    gamma: float = 1.4
    boundary: str = "transmissive"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("need at least one continuous basis function")
        if self.l < 0:
            raise ConfigError("jump count must be non-negative")
        if not 0.0 < self.c_fl <= 1.0:
            raise ConfigError("CFL number must lie in (0, 1]")
        if self.gamma <= 1.0:
            raise ConfigError("gamma must exceed 1")
        if self.boundary not in ("periodic", "transmissive"):
            raise ConfigError(f"unknown boundary kind {self.boundary!r}")


@dataclass
class Diagnostics:
    """Mutable run counters shared across the immutable state snapshots."""

    steps: int = 0
    rhs_evaluations: int = 0
    sign_violations: int = 0
    trace_fallbacks: int = 0
    min_dt: float = np.inf


@dataclass
class _WarmCache:
    coefficients: Array
    tags: Array


@dataclass(frozen=True)
class SimulationState:
    """Grid, per-subcell conserved averages, current time, and configuration."""

    grid: Grid
    averages: Array
    time: float
    config: SolverConfig
    diagnostics: Diagnostics = field(default_factory=Diagnostics, compare=False)
    warm: _WarmCache | None = field(default=None, compare=False)
    backend: object = field(default=None, compare=False)


def make_state(grid: Grid, averages: Array, config: SolverConfig,
               time: float = 0.0, backend: str | None = None) -> SimulationState:
    """Validate shapes and prepare the warm-start cache for a fresh run."""
    averages = np.asarray(averages, dtype=float)
    expected = (grid.n_macrocells, grid.subcells_per_macrocell, 3)
    if averages.shape != expected:
        raise ConfigError(f"averages must have shape {expected}")
    if config.k + config.l > grid.subcells_per_macrocell:
        raise ConfigError(
            f"k + l = {config.k + config.l} exceeds "
            f"{grid.subcells_per_macrocell} subcells"
        )
    n = config.k + config.l
    warm = _WarmCache(
        coefficients=np.zeros((grid.n_macrocells + 2, 3, n)),
        tags=np.zeros((grid.n_macrocells + 2, 3, max(config.l, 1)),
                      dtype=np.int64),
    )
    return SimulationState(grid, averages, time, config, Diagnostics(), warm,
                           get_backend(backend))


def _extend(averages: Array, boundary: str) -> Array:
    """Append one ghost macrocell per side (periodic wrap or zero-gradient copy)."""
    if boundary == "periodic":
        return np.concatenate([averages[-1:], averages, averages[:1]], axis=0)
    return np.concatenate([averages[:1], averages, averages[-1:]], axis=0)


def _rhs_arrays(state: SimulationState, averages: Array) -> Array:
    config = state.config
    tables = recovery_tables(state.grid.subcells_per_macrocell, config.k)
    backend = state.backend or get_backend()
    warm = state.warm
    try:
        dudt, violations, fallbacks = backend.euler_rhs(
            _extend(averages, config.boundary),
            state.grid.subcell_widths,
            tables,
            config.k,
            config.l,
            config.gamma,
            warm_coeffs=warm.coefficients if warm is not None else None,
            warm_tags=warm.tags if warm is not None else None,
        )
    except NumericalError as err:
        raise type(err)(
            f"t = {state.time:.6g}, step {state.diagnostics.steps}: {err}"
        ) from err
    state.diagnostics.rhs_evaluations += 1
    state.diagnostics.sign_violations += violations
    state.diagnostics.trace_fallbacks += fallbacks
    return dudt


def semidiscrete_rhs(state: SimulationState) -> Array:
    """Time derivative of all subcell averages at the current state."""
    return _rhs_arrays(state, state.averages)


def compute_dt(state: SimulationState) -> float:
    """CFL time step: ``c_fl * min subcell width / max(|v| + c)``."""
    c_max = max_signal_speed(state.averages, state.config.gamma)
    return state.config.c_fl * state.grid.min_subcell_width / c_max


def ssprk33_step(state: SimulationState, dt: float) -> SimulationState:
    """Advance one SSPRK(3,3) step; returns a new state, never mutates arrays."""
    if dt <= 0.0:
        raise ConfigError("time step must be positive")
    new_averages = ssprk33_advance(state.averages, dt,
                                   lambda u: _rhs_arrays(state, u))
    diag = state.diagnostics
    diag.steps += 1
    diag.min_dt = min(diag.min_dt, dt)
    return replace(state, averages=new_averages, time=state.time + dt)


def run(state: SimulationState, t_end: float, snapshot_interval: float | None = None,
        on_snapshot=None) -> SimulationState:
    """March to ``t_end`` exactly, optionally emitting periodic snapshots."""
    if t_end < state.time:
        raise ConfigError("t_end lies before the current time")
    if on_snapshot is not None:
        on_snapshot(state)
    next_snapshot = (state.time + snapshot_interval
                     if snapshot_interval is not None else np.inf)
    while state.time < t_end:
        dt = compute_dt(state)
        final = dt >= t_end - state.time
        if final:
            dt = t_end - state.time
        state = ssprk33_step(state, dt)
        if final:
            state = replace(state, time=t_end)
        if on_snapshot is not None and (state.time >= next_snapshot or final):
            on_snapshot(state)
            while next_snapshot <= state.time:
                next_snapshot += snapshot_interval
    return state
