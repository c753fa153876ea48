"""Command-line harness: static recovery, solver runs, convergence studies.

Subcommands ``recover``, ``solve``, and ``converge`` emit plot-ready CSV
files plus a JSON metadata record per run.  Figure presets (``fig2`` ..
``fig13``) encode the standard experiment configurations.  Exit codes: 0 on
success, 2 on configuration errors, 3 on numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from enosv.cases import (
    CASE_NAMES,
    STATIC_NAMES,
    advection_exact_averages,
    error_norms,
    get_case,
    initial_subcell_averages,
    static_subcell_averages,
)
from enosv.discretization import Grid, chebyshev_boundaries
from enosv.errors import ConfigError, NumericalError
from enosv.output import fmt, write_json, write_profile_csv
from enosv.recovery import (
    compute_interface_jumps,
    evaluate_recovered,
    evaluate_traces,
    recover_macrocell,
)
from enosv.solver import SolverConfig, make_state, run

RECOVERY_SAMPLES = 512


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation's parameters; round-trips through the metadata JSON."""

    case: str
    macrocells: int = 25
    subcells: int = 4
    k: int = 3
    jumps: int = 1
    c_fl: float = 0.1
    gamma: float = 1.4
    t_end: float | None = None
    out: str = "out"
    snapshot_interval: float | None = None

    def __post_init__(self):
        if self.subcells < 2:
            raise ConfigError("need at least two subcells per macrocell")
        if self.k + self.jumps > self.subcells:
            raise ConfigError(
                f"k + jumps = {self.k + self.jumps} exceeds {self.subcells} subcells"
            )
        if self.macrocells < 3 and self.case not in STATIC_NAMES:
            raise ConfigError("need at least three macrocells")
        if not 0.0 < self.c_fl <= 1.0:
            raise ConfigError("CFL number must lie in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**data)


#: Figure-by-figure experiment configurations.  fig9 runs 12 macrocells of 8
#: subcells (96 cells): the printed caption parameters are not mutually
#: consistent and 100 cells cannot be grouped into cell groups of 8.
PRESETS: dict[str, dict] = {
    "fig2": {"case": "static-u1", "subcells": 10, "k": 8, "jumps": 2,
             "macrocells": 1},
    "fig3": {"case": "static-u2", "subcells": 10, "k": 8, "jumps": 2,
             "macrocells": 1},
    "fig4": {"case": "static-u3", "subcells": 10, "k": 8, "jumps": 2,
             "macrocells": 1},
    "fig5a": {"case": "advection", "subcells": 4, "k": 3, "jumps": 1},
    "fig5b": {"case": "advection", "subcells": 8, "k": 7, "jumps": 1},
    "fig6": {"case": "sod", "macrocells": 25, "subcells": 4, "k": 3, "jumps": 1},
    "fig7": {"case": "sod", "macrocells": 12, "subcells": 8, "k": 7, "jumps": 1},
    "fig8": {"case": "lax", "macrocells": 25, "subcells": 4, "k": 3, "jumps": 1},
    "fig9": {"case": "lax", "macrocells": 12, "subcells": 8, "k": 7, "jumps": 1},
    "fig10": {"case": "shu-osher", "macrocells": 50, "subcells": 4, "k": 3,
              "jumps": 1},
    "fig11": {"case": "shu-osher", "macrocells": 100, "subcells": 4, "k": 3,
              "jumps": 1},
    "fig12": {"case": "shu-osher", "macrocells": 25, "subcells": 8, "k": 7,
              "jumps": 1},
    "fig13": {"case": "shu-osher", "macrocells": 50, "subcells": 8, "k": 7,
              "jumps": 1},
}

CONVERGENCE_GRIDS = (16, 20, 24, 28, 32, 36, 40, 44, 48, 52)


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_recover(config: RunConfig) -> int:
    """Static recovery on one macrocell; emits samples, traces, and jumps."""
    if config.case not in STATIC_NAMES:
        raise ConfigError(
            f"recover expects a static case, one of {STATIC_NAMES}"
        )
    edges = chebyshev_boundaries(config.subcells - 1)
    averages = static_subcell_averages(config.case, edges)
    start = time.perf_counter()
    fn = recover_macrocell(averages, config.k, config.jumps, edges)
    wall = time.perf_counter() - start
    left, right = evaluate_traces(fn, edges)
    jumps = compute_interface_jumps(averages)

    xs = np.linspace(edges[0], edges[-1], RECOVERY_SAMPLES)
    rows = []
    jump_positions = {edges[e]: e for e in fn.spec.jump_edges}
    for x in xs:
        if x in jump_positions:
            rows.append((fmt(x), fmt(evaluate_recovered(fn, edges, x, "left"))))
            rows.append((fmt(x), fmt(evaluate_recovered(fn, edges, x, "right"))))
        else:
            rows.append((fmt(x), fmt(evaluate_recovered(fn, edges, x))))
    for e in fn.spec.jump_edges:  # one-sided duplication at every jump edge
        if edges[e] not in xs:
            rows.append((fmt(edges[e]), fmt(left[e])))
            rows.append((fmt(edges[e]), fmt(right[e])))
    rows.sort(key=lambda r: float(r[0]))

    out = Path(config.out)
    _write_csv(out / "recovery_samples.csv", ("x", "value"), rows)
    _write_csv(
        out / "edge_traces.csv", ("edge", "x", "left", "right"),
        [(e, fmt(edges[e]), fmt(left[e]), fmt(right[e]))
         for e in range(edges.size)],
    )
    _write_csv(
        out / "jump_coefficients.csv",
        ("edge", "x", "sign", "coefficient", "average_jump"),
        [(edge, fmt(edges[edge]), sign,
          fmt(fn.coefficients[fn.spec.k + i]), fmt(jumps[edge - 1]))
         for i, (edge, sign) in enumerate(zip(fn.spec.jump_edges,
                                              fn.spec.jump_signs))],
    )
    write_json(out / "recover_run.json", {
        "config": config.to_dict(),
        "wall_time_s": wall,
        "selected_edges": list(fn.spec.jump_edges),
        "jump_signs": list(fn.spec.jump_signs),
    })
    return 0


def _build_state(config: RunConfig, case):
    grid = Grid.uniform(*case.domain, config.macrocells, config.subcells)
    solver_config = SolverConfig(
        k=config.k, l=config.jumps, c_fl=config.c_fl, gamma=config.gamma,
        boundary=case.boundary,
    )
    averages = initial_subcell_averages(case, grid, config.gamma)
    return grid, make_state(grid, averages, solver_config)


def cmd_solve(config: RunConfig) -> int:
    """Full solver run; emits snapshot CSV profiles plus metadata JSON."""
    if config.case not in CASE_NAMES:
        raise ConfigError(f"solve expects one of {CASE_NAMES}")
    case = get_case(config.case)
    grid, state = _build_state(config, case)
    t_end = case.t_end if config.t_end is None else config.t_end
    out = Path(config.out)
    x_left = grid.subcell_edges[:, :-1].ravel()
    x_right = grid.subcell_edges[:, 1:].ravel()

    counter = {"n": 0}

    def snapshot(s):
        write_profile_csv(out / f"{config.case}_{counter['n']:04d}.csv",
                          x_left, x_right, s.averages, config.gamma)
        counter["n"] += 1

    start = time.perf_counter()
    final = run(state, t_end,
                snapshot_interval=config.snapshot_interval,
                on_snapshot=snapshot if config.snapshot_interval else None)
    wall = time.perf_counter() - start
    write_profile_csv(out / f"{config.case}_final.csv", x_left, x_right,
                      final.averages, config.gamma)
    write_json(out / f"{config.case}_run.json", {
        "config": config.to_dict(),
        "t_end": t_end,
        "steps": final.diagnostics.steps,
        "rhs_evaluations": final.diagnostics.rhs_evaluations,
        "sign_violations": final.diagnostics.sign_violations,
        "min_dt": final.diagnostics.min_dt,
        "wall_time_s": wall,
    })
    return 0


def _parse_grid_list(raw: str) -> tuple[int, ...]:
    try:
        grids = tuple(int(part) for part in str(raw).split(",") if part)
    except ValueError as err:
        raise ConfigError(f"bad grid list {raw!r}") from err
    if not grids:
        raise ConfigError("empty grid list")
    return grids


def convergence_table(config: RunConfig, grids) -> list[dict]:
    """Advection error table over a list of macrocell counts."""
    case = get_case("advection")
    t_end = case.t_end if config.t_end is None else config.t_end
    table = []
    for n in grids:
        cfg = RunConfig(**{**config.to_dict(), "case": "advection",
                           "macrocells": int(n)})
        grid, state = _build_state(cfg, case)
        final = run(state, t_end)
        exact = advection_exact_averages(case, grid, t_end, config.gamma)
        l1, linf = error_norms(final.averages, exact, grid)
        table.append({"macrocells": int(n), "l1": float(l1[0]),
                      "linf": float(linf[0])})
    for i, row in enumerate(table):
        if i == 0:
            row["pairwise_slope"] = ""
        else:
            prev = table[i - 1]
            row["pairwise_slope"] = (
                np.log(prev["l1"] / row["l1"])
                / np.log(row["macrocells"] / prev["macrocells"])
            )
    if len(table) >= 2:
        logn = np.log([row["macrocells"] for row in table])
        loge = np.log([row["l1"] for row in table])
        ls_slope = -np.polyfit(logn, loge, 1)[0]
    else:
        ls_slope = ""
    for row in table:
        row["ls_slope"] = ls_slope
    return table


def cmd_converge(config: RunConfig, grids) -> int:
    """Convergence study on the advection case over the given grids."""
    start = time.perf_counter()
    table = convergence_table(config, grids)
    wall = time.perf_counter() - start
    out = Path(config.out)
    rows = [
        (row["macrocells"], fmt(row["l1"]), fmt(row["linf"]),
         fmt(row["pairwise_slope"]) if row["pairwise_slope"] != "" else "",
         fmt(row["ls_slope"]) if row["ls_slope"] != "" else "")
        for row in table
    ]
    _write_csv(out / "convergence.csv",
               ("macrocells", "l1", "linf", "pairwise_slope", "ls_slope"), rows)
    write_json(out / "converge_run.json", {
        "config": config.to_dict(),
        "grids": list(grids),
        "wall_time_s": wall,
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enosv",
        description="Spectral-volume solver with sign-preserving convex recovery",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("recover", "static recovery on a single macrocell"),
        ("solve", "run a flow case and emit snapshots"),
        ("converge", "advection convergence study"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--case", default=None)
        cmd.add_argument("--macrocells", default=None,
                         help="macrocell count; comma list for converge")
        cmd.add_argument("--subcells", type=int, default=None)
        cmd.add_argument("--k", type=int, default=None)
        cmd.add_argument("--jumps", type=int, default=None)
        cmd.add_argument("--cfl", type=float, default=None)
        cmd.add_argument("--gamma", type=float, default=None)
        cmd.add_argument("--t-end", type=float, default=None)
        cmd.add_argument("--out", default=None)
        cmd.add_argument("--preset", choices=sorted(PRESETS), default=None)
        cmd.add_argument("--snapshot-interval", type=float, default=None)
    return parser


def _config_from_args(args) -> tuple[RunConfig, tuple[int, ...]]:
    settings: dict = {}
    if args.preset:
        settings.update(PRESETS[args.preset])
    grids = CONVERGENCE_GRIDS
    overrides = {
        "case": args.case,
        "subcells": args.subcells,
        "k": args.k,
        "jumps": args.jumps,
        "c_fl": args.cfl,
        "gamma": args.gamma,
        "t_end": args.t_end,
        "out": args.out,
        "snapshot_interval": args.snapshot_interval,
    }
    if args.macrocells is not None:
        parsed = _parse_grid_list(args.macrocells)
        if args.command == "converge":
            grids = parsed
        elif len(parsed) != 1:
            raise ConfigError("a single run takes one macrocell count")
        else:
            overrides["macrocells"] = parsed[0]
    settings.update({key: val for key, val in overrides.items()
                     if val is not None})
    if args.command == "converge":
        settings.setdefault("case", "advection")
    if "case" not in settings:
        raise ConfigError("--case or --preset is required")
    return RunConfig(**settings), grids


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config, grids = _config_from_args(args)
        if args.command == "recover":
            return cmd_recover(config)
        if args.command == "solve":
            return cmd_solve(config)
        return cmd_converge(config, grids)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except NumericalError as err:
        write_json(Path(getattr(args, "out", None) or "out") / "failure.json", {
            "error": str(err),
            "type": type(err).__name__,
        })
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
