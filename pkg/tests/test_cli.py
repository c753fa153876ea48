import csv
import json
from pathlib import Path

import numpy as np
import pytest

from enosv.cli import (
    CONVERGENCE_GRIDS,
    PRESETS,
    RunConfig,
    convergence_table,
    main,
)
from enosv.errors import ConfigError
from enosv.output import read_profile_csv


def read_rows(path):
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


class TestRunConfig:
    def test_round_trip(self):
        config = RunConfig(case="sod", macrocells=25, subcells=4, k=3, jumps=1,
                           c_fl=0.1, gamma=1.4, t_end=None, out="x")
        assert RunConfig.from_dict(config.to_dict()) == config

    def test_json_round_trip(self):
        config = RunConfig(case="lax", t_end=0.5, snapshot_interval=0.1)
        payload = json.dumps(config.to_dict())
        assert RunConfig.from_dict(json.loads(payload)) == config

    def test_compatibility_validated(self):
        with pytest.raises(ConfigError):
            RunConfig(case="sod", subcells=4, k=4, jumps=1)

    def test_macrocell_minimum(self):
        with pytest.raises(ConfigError):
            RunConfig(case="sod", macrocells=2)

    def test_cfl_range(self):
        with pytest.raises(ConfigError):
            RunConfig(case="sod", c_fl=1.5)


class TestPresets:
    def test_all_presets_visible(self):
        expected = {f"fig{i}" for i in (2, 3, 4, 6, 7, 8, 9, 10, 11, 12, 13)}
        expected |= {"fig5a", "fig5b"}
        assert set(PRESETS) == expected

    def test_preset_configs_valid(self):
        for name, settings in PRESETS.items():
            config = RunConfig(**settings)
            assert config.k + config.jumps <= config.subcells

    def test_figure6_parameters(self):
        assert PRESETS["fig6"] == {"case": "sod", "macrocells": 25,
                                   "subcells": 4, "k": 3, "jumps": 1}

    def test_figure13_parameters(self):
        preset = PRESETS["fig13"]
        assert preset["macrocells"] * preset["subcells"] == 400
        assert preset["subcells"] == 8


class TestRecoverCommand:
    def test_u1_outputs(self, tmp_path):
        code = main(["recover", "--preset", "fig2", "--out", str(tmp_path)])
        assert code == 0
        samples = read_rows(tmp_path / "recovery_samples.csv")
        assert len(samples) >= 512
        xs = [float(row["x"]) for row in samples]
        assert xs == sorted(xs)
        jumps = read_rows(tmp_path / "jump_coefficients.csv")
        assert len(jumps) == 1  # u1 has a single nonzero average jump
        dominant = float(jumps[0]["coefficient"])
        assert abs(dominant - 1.0) <= 0.05
        meta = json.loads((tmp_path / "recover_run.json").read_text())
        assert meta["config"]["case"] == "static-u1"

    def test_u2_traces_continuous(self, tmp_path):
        code = main(["recover", "--preset", "fig3", "--out", str(tmp_path)])
        assert code == 0
        traces = read_rows(tmp_path / "edge_traces.csv")
        for row in traces:
            assert float(row["left"]) == pytest.approx(float(row["right"]),
                                                       abs=1e-6)

    def test_u3_sign_property(self, tmp_path):
        code = main(["recover", "--preset", "fig4", "--out", str(tmp_path)])
        assert code == 0
        for row in read_rows(tmp_path / "jump_coefficients.csv"):
            coeff = float(row["coefficient"])
            avg_jump = float(row["average_jump"])
            sign = int(row["sign"])
            assert coeff >= 0.0
            if coeff > 0.0:
                assert np.sign(avg_jump) == sign

    def test_solve_case_rejected(self, tmp_path):
        code = main(["recover", "--case", "sod", "--out", str(tmp_path)])
        assert code == 2


class TestSolveCommand:
    def test_short_sod_run(self, tmp_path):
        code = main(["solve", "--preset", "fig6", "--t-end", "0.1",
                     "--out", str(tmp_path)])
        assert code == 0
        x_left, x_right, averages = read_profile_csv(tmp_path / "sod_final.csv")
        assert averages.shape == (100, 3)
        assert np.all(np.asarray(x_right) > np.asarray(x_left))
        meta = json.loads((tmp_path / "sod_run.json").read_text())
        assert meta["steps"] > 0
        assert meta["sign_violations"] == 0
        assert RunConfig.from_dict(meta["config"]).case == "sod"

    def test_snapshots_emitted(self, tmp_path):
        code = main(["solve", "--preset", "fig6", "--t-end", "0.06",
                     "--snapshot-interval", "0.02", "--out", str(tmp_path)])
        assert code == 0
        snapshots = sorted(tmp_path.glob("sod_0*.csv"))
        assert len(snapshots) >= 3

    def test_deterministic_output(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        for out in (out1, out2):
            assert main(["solve", "--preset", "fig6", "--t-end", "0.05",
                         "--out", str(out)]) == 0
        assert (out1 / "sod_final.csv").read_bytes() == \
            (out2 / "sod_final.csv").read_bytes()

    def test_invalid_configuration_exit_code(self, tmp_path):
        code = main(["solve", "--case", "sod", "--k", "4", "--subcells", "4",
                     "--out", str(tmp_path)])
        assert code == 2

    def test_unknown_case_exit_code(self, tmp_path):
        code = main(["solve", "--case", "vortex", "--out", str(tmp_path)])
        assert code == 2


class TestConvergeCommand:
    def test_small_table(self, tmp_path):
        code = main(["converge", "--preset", "fig5a", "--macrocells", "8,12",
                     "--t-end", "0.5", "--out", str(tmp_path)])
        assert code == 0
        rows = read_rows(tmp_path / "convergence.csv")
        assert [row["macrocells"] for row in rows] == ["8", "12"]
        assert rows[0]["pairwise_slope"] == ""
        assert float(rows[1]["pairwise_slope"]) > 0.0
        assert rows[0]["ls_slope"] == rows[1]["ls_slope"]

    def test_single_grid_has_empty_slopes(self, tmp_path):
        code = main(["converge", "--macrocells", "8", "--subcells", "4",
                     "--k", "3", "--jumps", "1", "--t-end", "0.25",
                     "--out", str(tmp_path)])
        assert code == 0
        rows = read_rows(tmp_path / "convergence.csv")
        assert len(rows) == 1
        assert rows[0]["pairwise_slope"] == ""
        assert rows[0]["ls_slope"] == ""

    def test_default_grid_list(self):
        assert CONVERGENCE_GRIDS == (16, 20, 24, 28, 32, 36, 40, 44, 48, 52)

    def test_convergence_table_api(self):
        config = RunConfig(case="advection", subcells=4, k=3, jumps=1,
                           t_end=0.5)
        table = convergence_table(config, (8, 12))
        assert table[1]["l1"] < table[0]["l1"]


class TestParser:
    def test_usage_error_exit_code(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 2

    def test_missing_case(self, tmp_path):
        assert main(["solve", "--out", str(tmp_path)]) == 2
