import numpy as np

from enosv.output import (
    fmt,
    read_json,
    read_profile_csv,
    write_json,
    write_profile_csv,
)


def test_fmt_round_trips_doubles():
    rng = np.random.default_rng(3)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-12, 12, 200):
        assert float(fmt(x)) == x


def test_profile_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    n = 17
    edges = np.sort(rng.uniform(-1, 1, n + 1))
    rho = rng.uniform(0.5, 2.0, n)
    v = rng.uniform(-1, 1, n)
    p = rng.uniform(0.5, 2.0, n)
    averages = np.stack([rho, rho * v, p / 0.4 + 0.5 * rho * v * v], axis=1)
    path = tmp_path / "profile.csv"
    write_profile_csv(path, edges[:-1], edges[1:], averages, 1.4)
    x_left, x_right, back = read_profile_csv(path)
    np.testing.assert_array_equal(back, averages)
    np.testing.assert_array_equal(x_left, edges[:-1])
    np.testing.assert_array_equal(x_right, edges[1:])


def test_profile_has_primitive_columns(tmp_path):
    path = tmp_path / "profile.csv"
    averages = np.array([[1.0, 0.5, 2.0]])
    write_profile_csv(path, [0.0], [1.0], averages, 1.4)
    header = path.read_text().splitlines()[0]
    assert header == "index,x_left,x_right,rho,momentum,energy,velocity,pressure"


def test_json_round_trip(tmp_path):
    payload = {"a": 1, "b": [1.5, None], "c": {"d": "x"}}
    path = tmp_path / "meta.json"
    write_json(path, payload)
    assert read_json(path) == payload
