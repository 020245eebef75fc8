"""JSON file schema for operators, density operators and pure states.

Operators and density operators::

    {"dim_a": 2, "dim_b": 2, "matrix": [[[re, im], ...], ...]}

Pure states carry a ``"vector"`` field of ``[re, im]`` pairs instead of
``"matrix"``. Unknown keys are ignored on load.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from sepeig.linalg import BipartiteOperator, DensityOperator, Dims, PureBipartiteState, as_density


class FileFormatError(ValueError):
    pass


def _pairs(arr: np.ndarray):
    if arr.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in arr]
    return [_pairs(row) for row in arr]


def _complex(data, shape: tuple[int, ...], field: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"field {field!r} is not a nested list of [re, im] pairs") from exc
    if arr.shape != shape + (2,):
        raise FileFormatError(f"field {field!r} has shape {arr.shape[:-1]}, expected {shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _dims(obj: dict) -> Dims:
    try:
        return Dims(int(obj["dim_a"]), int(obj["dim_b"]))
    except KeyError as exc:
        raise FileFormatError(f"missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"invalid dimensions: {exc}") from exc


def operator_to_dict(op: BipartiteOperator) -> dict:
    return {"dim_a": op.dims.d_a, "dim_b": op.dims.d_b, "matrix": _pairs(op.matrix)}


def state_to_dict(state) -> dict:
    if isinstance(state, PureBipartiteState):
        return {"dim_a": state.dims.d_a, "dim_b": state.dims.d_b, "vector": _pairs(state.vector)}
    if isinstance(state, DensityOperator):
        return operator_to_dict(state.op)
    raise TypeError(f"cannot serialize {type(state).__name__}")


def operator_from_dict(obj: dict) -> BipartiteOperator:
    dims = _dims(obj)
    if "matrix" in obj:
        return BipartiteOperator(dims, _complex(obj["matrix"], (dims.total, dims.total), "matrix"))
    if "vector" in obj:
        return PureBipartiteState(dims, _complex(obj["vector"], (dims.total,), "vector")).projector()
    raise FileFormatError("expected a 'matrix' or 'vector' field")


def state_from_dict(obj: dict) -> PureBipartiteState | DensityOperator:
    dims = _dims(obj)
    if "vector" in obj:
        return PureBipartiteState(dims, _complex(obj["vector"], (dims.total,), "vector"))
    if "matrix" in obj:
        return DensityOperator(BipartiteOperator(dims, _complex(obj["matrix"], (dims.total, dims.total), "matrix")))
    raise FileFormatError("expected a 'matrix' or 'vector' field")


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=None, separators=(",", ":")) + "\n"


def _load_json(path) -> dict:
    text = Path(path).read_text() if str(path) != "-" else sys.stdin.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise FileFormatError(f"{path}: top-level JSON value must be an object")
    return obj


def load_operator(path) -> BipartiteOperator:
    return operator_from_dict(_load_json(path))


def load_state(path) -> PureBipartiteState | DensityOperator:
    return state_from_dict(_load_json(path))


def load_density(path) -> DensityOperator:
    return as_density(load_state(path))


def save(obj: dict, path) -> None:
    Path(path).write_text(dumps(obj))
