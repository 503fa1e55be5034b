"""Snapshot and diagnostics file round-trips."""

import numpy as np
import pytest

from obliquestab import fileio, solver
from obliquestab.solver import Diagnostics, Grid2D, RunConfig, FieldSet
from obliquestab.swe import SweParams


@pytest.fixture
def grid():
    return Grid2D(nx=12, ny=9, x_min=-1.2, x_max=1.2, y_min=-0.9, y_max=0.9)


class TestSnapshots:
    def test_bin_round_trip_bit_exact(self, tmp_path, grid):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((grid.ny, grid.nx))
        a[0, 0] = np.pi * 1e-301  # subnormal-adjacent value must survive
        path = tmp_path / "snap_h_t1.bin"
        fileio.write_snapshot(path, a, 1.25, grid, "bin")
        meta, back = fileio.read_snapshot(path)
        assert meta["t"] == 1.25
        assert meta["nx"] == grid.nx and meta["ny"] == grid.ny
        assert meta["dx"] == grid.dx
        np.testing.assert_array_equal(back, a)
        assert back.tobytes() == a.tobytes()

    def test_csv_round_trip(self, tmp_path, grid):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((grid.ny, grid.nx))
        path = tmp_path / "snap_h_t2.csv"
        fileio.write_snapshot(path, a, 2.0, grid, "csv")
        meta, back = fileio.read_snapshot(path)
        np.testing.assert_array_equal(back, a)  # repr round-trips float64

    def test_header_fields(self, tmp_path, grid):
        path = tmp_path / "s.csv"
        fileio.write_snapshot(path, np.zeros((grid.ny, grid.nx)), 0.5, grid, "csv")
        first = open(path).readline()
        assert first.startswith("# t=0.5 nx=12 ny=9 x_min=-1.2")
        assert "dx=" in first and "dy=" in first

    def test_shape_mismatch(self, tmp_path, grid):
        with pytest.raises(ValueError):
            fileio.write_snapshot(tmp_path / "x.csv", np.zeros((3, 3)), 0.0, grid, "csv")

    def test_corrupt_payload(self, tmp_path, grid):
        path = tmp_path / "s.bin"
        fileio.write_snapshot(path, np.zeros((grid.ny, grid.nx)), 0.0, grid, "bin")
        data = open(path, "rb").read()
        open(path, "wb").write(data[:-8])
        with pytest.raises(ValueError):
            fileio.read_snapshot(path)


class TestDiagnosticsFile:
    def test_round_trip(self, tmp_path):
        cfg = RunConfig(
            mode="linear",
            params=SweParams(),
            grid=Grid2D(nx=16, ny=16, x_min=-1.6, x_max=1.6, y_min=-1.6, y_max=1.6),
            t_final=1.0,
        )
        d = Diagnostics()
        f = solver.initial_fields(cfg)
        d.record(f, cfg)
        f2 = f.copy()
        f2.t = 0.5
        d.record(f2, cfg)
        path = tmp_path / "diag.csv"
        fileio.write_diagnostics(path, d)
        back = fileio.read_diagnostics(path)
        assert list(back) == list(fileio.DIAG_COLUMNS)
        np.testing.assert_allclose(back["t"], [0.0, 0.5])
        np.testing.assert_allclose(back["linf"], d.linf)


class TestJson:
    def test_complex_and_arrays(self, tmp_path):
        payload = {"z": 1 + 2j, "a": np.arange(3), "f": np.float64(2.5), "b": np.bool_(True)}
        path = tmp_path / "x.json"
        fileio.write_json(path, payload)
        import json

        back = json.load(open(path))
        assert back["z"] == {"re": 1.0, "im": 2.0}
        assert back["a"] == [0, 1, 2]
        assert back["f"] == 2.5
        assert back["b"] is True
