import csv
import math

import numpy as np
import pytest
import scipy.io
from scipy import sparse

from shellmodal.services.solvers import LoadProgram, ModalResult, ModalStep
from shellmodal.utils.export import (
    CSV_COLUMNS,
    dump_matrices,
    emit_mode_vtk,
    frequency_rows,
    read_manifest,
    write_frequency_csv,
    write_manifest,
)


def make_result():
    omega2 = [(2.0 * math.pi * 0.05) ** 2, (2.0 * math.pi * 0.1) ** 2]
    steps = []
    for index, (parameter, scale) in enumerate([(1.0, 1.0), (1.1, -1.0)]):
        values = np.array([scale * omega2[0], omega2[1]])
        steps.append(
            ModalStep(
                index=index,
                parameter=parameter,
                omega2=values,
                modes=np.eye(2),
                labels=["(1,1)", "(1,2)"],
                rigid_omega2=np.array([]),
                residuals=np.zeros(2),
                u=np.zeros(2),
            )
        )
    return ModalResult(program=LoadProgram(kind="area_stretch", start=1.0, end=1.1, steps=1), steps=steps)


class TestFrequencyCsv:
    def test_rows(self):
        rows = frequency_rows(make_result())
        assert len(rows) == 4
        assert rows[0]["f_normalized"] == pytest.approx(1.0)
        assert rows[1]["f_THz"] == pytest.approx(0.1)
        assert rows[2]["unstable"] == 1
        assert rows[2]["f_THz"] == pytest.approx(-0.05)

    def test_written_file(self, tmp_path):
        path = write_frequency_csv(frequency_rows(make_result()), tmp_path / "out" / "frequencies.csv")
        with open(path, newline="", encoding="utf-8") as f:
            table = list(csv.reader(f))
        assert tuple(table[0]) == CSV_COLUMNS
        assert len(table) == 5
        assert table[1][2] == "(1,1)"
        assert float(table[2][3]) == pytest.approx(0.1, rel=1e-15)

    def test_custom_columns(self, tmp_path):
        rows = [{"m": 1, "n": 1, "gamma": float("nan"), "omega": 0.5, "f_THz": 0.0795}]
        path = write_frequency_csv(rows, tmp_path / "table.csv", ("m", "n", "f_THz"))
        header, row = path.read_text(encoding="utf-8").splitlines()
        assert header == "m,n,f_THz"
        assert row.startswith("1,1,")
        assert float(row.split(",")[2]) == 0.0795


class TestVtk:
    def test_mode_file(self, plate, rng, tmp_path):
        modes = rng.standard_normal((plate.free_dofs.size, 2))
        path = emit_mode_vtk(plate, modes, tmp_path / "modes.vtk", (5, 4), names=["(1,1)", "(1,2)"])
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# vtk DataFile Version 3.0"
        assert "DATASET STRUCTURED_GRID" in lines
        assert "DIMENSIONS 5 4 1" in lines
        assert "POINTS 20 double" in lines
        assert "POINT_DATA 20" in lines
        assert "VECTORS mode_displacement double" in lines
        assert "VECTORS mode_displacement_1_2 double" in lines
        assert "SCALARS mode_magnitude_1_2 double 1" in lines

    def test_points_lie_on_the_plate(self, plate, tmp_path):
        path = emit_mode_vtk(plate, None, tmp_path / "geometry.vtk", (3, 3))
        lines = path.read_text(encoding="utf-8").splitlines()
        start = lines.index("POINTS 9 double") + 1
        points = np.array([[float(v) for v in line.split()] for line in lines[start:start + 9]])
        assert points[:, :2].min() == pytest.approx(0.0, abs=1e-9)
        assert points[:, :2].max() == pytest.approx(5.0)
        np.testing.assert_allclose(points[:, 2], 0.0, atol=1e-12)
        assert not any(line.startswith("POINT_DATA") for line in lines)

    def test_wrong_mode_length(self, plate, tmp_path):
        with pytest.raises(ValueError):
            emit_mode_vtk(plate, np.ones(10), tmp_path / "bad.vtk", (3, 3))


class TestManifest:
    def test_round_trip(self, tmp_path):
        summary = {"status": "complete", "steps": np.int64(3), "values": np.array([1.0, 2.0])}
        path = write_manifest(tmp_path / "manifest.json", {"scenario": "plate-modal"}, summary, 1.5)
        manifest = read_manifest(path)
        assert manifest["config"] == {"scenario": "plate-modal"}
        assert manifest["summary"] == {"status": "complete", "steps": 3, "values": [1.0, 2.0]}
        assert manifest["wall_time_s"] == 1.5
        assert {"shellmodal", "numpy", "scipy", "sympy", "python"} <= set(manifest["versions"])


def test_matrix_market_dump(tmp_path):
    K = sparse.csr_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    M = sparse.identity(2, format="csr")
    k_path, m_path = dump_matrices(tmp_path, K, M, prefix="step0000_")
    assert k_path.name == "step0000_K.mtx"
    np.testing.assert_allclose(scipy.io.mmread(str(k_path)).toarray(), K.toarray())
    np.testing.assert_allclose(scipy.io.mmread(str(m_path)).toarray(), np.eye(2))
