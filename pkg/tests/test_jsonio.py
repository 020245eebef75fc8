import json

import numpy as np
import pytest

from conftest import rand_herm
from sepeig import jsonio
from sepeig.linalg import DensityOperator, PureBipartiteState
from sepeig.states import bell_phi, werner


def test_operator_round_trip(tmp_path, rng):
    op = rand_herm(2, 3, rng)
    path = tmp_path / "op.json"
    jsonio.save(jsonio.operator_to_dict(op), path)
    back = jsonio.load_operator(path)
    assert back.dims == op.dims
    assert np.array_equal(back.matrix, op.matrix)


def test_schema_layout():
    obj = jsonio.operator_to_dict(bell_phi().projector())
    assert obj["dim_a"] == 2 and obj["dim_b"] == 2
    assert obj["matrix"][1][2] == pytest.approx([0.5, 0.0])
    state = jsonio.state_to_dict(bell_phi())
    assert set(state) == {"dim_a", "dim_b", "vector"}
    assert len(state["vector"]) == 4


def test_state_loading(tmp_path):
    pure = tmp_path / "pure.json"
    jsonio.save(jsonio.state_to_dict(bell_phi()), pure)
    assert isinstance(jsonio.load_state(pure), PureBipartiteState)
    assert isinstance(jsonio.load_density(pure), DensityOperator)
    mixed = tmp_path / "mixed.json"
    jsonio.save(jsonio.state_to_dict(werner(0.5)), mixed)
    rho = jsonio.load_density(mixed)
    assert np.allclose(rho.matrix, werner(0.5).matrix)
    # a pure-state file read as an operator is its projector
    assert np.allclose(jsonio.load_operator(pure).matrix, bell_phi().projector().matrix)


@pytest.mark.parametrize(
    "text, match",
    [
        ("{not json", "malformed"),
        ("[1, 2]", "object"),
        ('{"dim_a": 2, "matrix": []}', "dim_b"),
        ('{"dim_a": 2, "dim_b": 2}', "matrix"),
        ('{"dim_a": 2, "dim_b": 2, "matrix": [[[1, 0]]]}', "shape"),
    ],
)
def test_malformed_files(tmp_path, text, match):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(jsonio.FileFormatError, match=match):
        jsonio.load_operator(path)


def test_extra_keys_ignored(tmp_path):
    obj = jsonio.operator_to_dict(bell_phi().projector())
    obj["run"] = {"seed": 1}
    path = tmp_path / "op.json"
    path.write_text(json.dumps(obj))
    assert jsonio.load_operator(path).dims.total == 4
