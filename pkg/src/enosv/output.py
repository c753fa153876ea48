"""CSV/JSON emission shared by the CLI and the reference-profile cache.

All files are UTF-8, comma separated, with a mandatory header row.  Numbers
are written with 17 significant digits so values round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from enosv.euler import primitive_arrays

PROFILE_HEADER = ("index", "x_left", "x_right", "rho", "momentum", "energy",
                  "velocity", "pressure")


def fmt(x) -> str:
    return f"{float(x):.17g}"


def write_profile_csv(path, x_left, x_right, averages, gamma) -> None:
    """Cell/subcell average profile with primitive companion columns."""
    averages = np.asarray(averages, dtype=float).reshape(-1, 3)
    rho, v, p = primitive_arrays(averages, gamma)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(PROFILE_HEADER)
        for i in range(averages.shape[0]):
            writer.writerow([
                i, fmt(x_left[i]), fmt(x_right[i]),
                fmt(averages[i, 0]), fmt(averages[i, 1]), fmt(averages[i, 2]),
                fmt(v[i]), fmt(p[i]),
            ])


def read_profile_csv(path):
    """Returns (x_left, x_right, conserved averages) from a profile CSV."""
    x_left, x_right, rows = [], [], []
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            x_left.append(float(row["x_left"]))
            x_right.append(float(row["x_right"]))
            rows.append([float(row["rho"]), float(row["momentum"]),
                         float(row["energy"])])
    return np.array(x_left), np.array(x_right), np.array(rows)


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
