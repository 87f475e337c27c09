import json

import numpy as np
import pytest

from rbsd import io
from rbsd.design import AssignmentMatrix, DesignSpec, sample
from rbsd.synthetic import OutcomeMatrix


def test_assignment_round_trip(tmp_path):
    W = sample(DesignSpec("iid", 3, 4), 11)
    path = tmp_path / "w.csv"
    io.write_assignment_csv(W, path)
    assert path.read_text().splitlines()[0] == "unit,t1,t2,t3,t4"
    back = io.read_assignment_csv(path)
    assert back.values.tobytes() == W.values.tobytes()


def test_outcome_round_trip_exact(tmp_path, rng):
    Y = OutcomeMatrix(rng.lognormal(2, 1.5, size=(5, 3)) * 1e-7, unit_ids=tuple("abcde"))
    path = tmp_path / "y.csv"
    io.write_outcome_csv(Y, path)
    back = io.read_outcome_csv(path)
    assert np.array_equal(back.values, Y.values)
    assert back.unit_ids == Y.unit_ids


def test_non_binary_cell_located(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("unit,t1,t2\n1,0,1\n2,2,0\n")
    with pytest.raises(io.DataError, match=r"line 3, column 2 \(t1\).*'2'"):
        io.read_assignment_csv(path)


def test_non_numeric_outcome_located(tmp_path):
    path = tmp_path / "y.csv"
    path.write_text("unit,t1,t2\n1,0.5,abc\n")
    with pytest.raises(io.DataError, match=r"line 2, column 3 \(t2\)"):
        io.read_outcome_csv(path)
    path.write_text("unit,t1\n1,nan\n")
    with pytest.raises(io.DataError, match="finite"):
        io.read_outcome_csv(path)


@pytest.mark.parametrize("text", ["", "unit,t1,t2\n", "\n\n"])
def test_empty_file(tmp_path, text):
    path = tmp_path / "w.csv"
    path.write_text(text)
    with pytest.raises(io.DataError, match="no data rows"):
        io.read_assignment_csv(path)


def test_ragged_row(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("unit,t1,t2\n1,0,1\n2,1\n")
    with pytest.raises(io.DataError, match="line 3: expected 3 fields, got 2"):
        io.read_assignment_csv(path)


def test_bad_header(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("id,t1\n1,0\n")
    with pytest.raises(io.DataError, match="line 1"):
        io.read_assignment_csv(path)
    path.write_text("unit,t2\n1,0\n")
    with pytest.raises(io.DataError, match="unit,t1"):
        io.read_assignment_csv(path)


def test_sidecar_round_trip(tmp_path):
    spec = DesignSpec("regular", 2, 6, breakpoints=(1, 4), weights=(0.3, 0.7))
    W = sample(spec, 2**64 - 1)
    csv_path = tmp_path / "w.csv"
    payload = io.write_sidecar(W, csv_path)
    io.validate_report(payload)
    assert io.read_sidecar(io.sidecar_path(csv_path)) == (spec, 2**64 - 1)


def test_sidecar_bad_json(tmp_path):
    path = tmp_path / "w.csv.json"
    path.write_text("{")
    with pytest.raises(io.DataError, match="invalid JSON"):
        io.read_sidecar(path)


def test_dumps_is_deterministic_and_strict():
    text = io.dumps({"b": float("nan"), "a": np.int64(3), "c": (1.5, float("inf"))})
    assert json.loads(text) == {"a": 3, "b": None, "c": [1.5, None]}
    assert text.index('"a"') < text.index('"b"')


def test_schemas_carry_version():
    for name in (
        "assignment_sidecar",
        "generate",
        "validate",
        "estimate_report",
        "simulation_report",
        "breakpoint_solution",
        "window_probability",
        "gen_data",
    ):
        schema = io.load_schema(name)
        assert schema["properties"]["schema_version"]["const"] == io.SCHEMA_VERSION


def test_matrix_without_spec_has_null_sidecar(tmp_path):
    W = AssignmentMatrix([[0, 1]])
    assert io.write_sidecar(W, tmp_path / "w.csv")["spec"] is None
