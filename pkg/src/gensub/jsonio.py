"""JSON interchange formats used across the package and by the CLI.

Matrices are stored as {"rows": r, "cols": c, "data": [[re, im], ...]} in
row-major order; parsing rejects length mismatches.  Model schemas:

* Partition        {"label": str, "elements": [matrix, ...]}
* PhaseSpaceModel  {"weights": [...], "values": [[[re, im], ...], ...]}
* LindbladModel    {"H": matrix, "jumps": [matrix, ...]}
* QuasiFreeModel   {"eps": [...], "gamma": matrix, "kappa": matrix,
                    "statistics": "fermi" | "bose"}
* PauliModel       {"rates": [[...]]}
* LieAlgebraModel  {"basis": [matrix, ...], "hCoeffs": [...],
                    "lCoeffs": [[...]]}   (structure constants are computed,
                    never part of the file)
"""

from __future__ import annotations

import json

import numpy as np

from .dynamics import LieAlgebraModel, LindbladModel, PauliModel, QuasiFreeModel
from .errors import ValidationError
from .partitions import Partition, PhaseSpaceModel


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValidationError("only matrices are serialized in this format")
    return {
        "rows": a.shape[0],
        "cols": a.shape[1],
        "data": [[float(x.real), float(x.imag)] for x in a.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1:
        raise ValidationError("matrix dimensions must be positive")
    if len(data) != rows * cols:
        raise ValidationError(
            f"matrix data length {len(data)} does not equal rows*cols = {rows * cols}"
        )
    flat = np.empty(rows * cols, dtype=complex)
    for i, entry in enumerate(data):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ValidationError(f"matrix entry {i} is not a [re, im] pair")
        flat[i] = complex(float(entry[0]), float(entry[1]))
    return flat.reshape(rows, cols)


def partition_to_json(v: Partition) -> dict:
    return {"label": v.label, "elements": [matrix_to_json(e) for e in v.elements]}


def partition_from_json(obj) -> Partition:
    return Partition(
        [matrix_from_json(e) for e in obj["elements"]],
        label=str(obj.get("label", "")),
    )


def phase_space_model_to_json(m: PhaseSpaceModel) -> dict:
    return {
        "weights": [float(w) for w in m.weights],
        "values": [
            [[float(z.real), float(z.imag)] for z in row] for row in m.values
        ],
    }


def phase_space_model_from_json(obj) -> PhaseSpaceModel:
    weights = [float(w) for w in obj["weights"]]
    values = np.array(
        [[complex(p[0], p[1]) for p in row] for row in obj["values"]], dtype=complex
    )
    return PhaseSpaceModel(points=tuple(range(len(weights))), weights=weights, values=values)


def lindblad_model_to_json(m: LindbladModel) -> dict:
    return {
        "H": matrix_to_json(m.hamiltonian),
        "jumps": [matrix_to_json(l) for l in m.jumps],
    }


def lindblad_model_from_json(obj) -> LindbladModel:
    return LindbladModel(
        hamiltonian=matrix_from_json(obj["H"]),
        jumps=tuple(matrix_from_json(l) for l in obj.get("jumps", [])),
    )


def quasifree_model_to_json(m: QuasiFreeModel) -> dict:
    return {
        "eps": [float(e) for e in m.eps],
        "gamma": matrix_to_json(m.gamma),
        "kappa": matrix_to_json(m.kappa),
        "statistics": m.statistics,
    }


def quasifree_model_from_json(obj) -> QuasiFreeModel:
    return QuasiFreeModel(
        eps=[float(e) for e in obj["eps"]],
        gamma=matrix_from_json(obj["gamma"]),
        kappa=matrix_from_json(obj["kappa"]),
        statistics=str(obj["statistics"]),
    )


def pauli_model_to_json(m: PauliModel) -> dict:
    return {"rates": [[float(x) for x in row] for row in m.rates]}


def pauli_model_from_json(obj) -> PauliModel:
    return PauliModel(rates=np.asarray(obj["rates"], dtype=float))


def lie_model_to_json(m: LieAlgebraModel) -> dict:
    return {
        "basis": [matrix_to_json(x) for x in m.basis],
        "hCoeffs": [float(h) for h in m.h_coeffs],
        "lCoeffs": [[float(c) for c in row] for row in m.l_coeffs],
    }


def lie_model_from_json(obj) -> LieAlgebraModel:
    return LieAlgebraModel(
        basis=[matrix_from_json(x) for x in obj["basis"]],
        h_coeffs=[float(h) for h in obj["hCoeffs"]],
        l_coeffs=np.asarray(obj.get("lCoeffs", []), dtype=float),
    )


#: dispatch table used by the CLI validator, keyed by a detecting field
MODEL_PARSERS = {
    "H": ("LindbladModel", lindblad_model_from_json),
    "gamma": ("QuasiFreeModel", quasifree_model_from_json),
    "rates": ("PauliModel", pauli_model_from_json),
    "basis": ("LieAlgebraModel", lie_model_from_json),
    "elements": ("Partition", partition_from_json),
    "weights": ("PhaseSpaceModel", phase_space_model_from_json),
    "rows": ("Matrix", matrix_from_json),
}


def detect_and_parse(obj):
    """Parse a JSON object into the model its fields identify.

    Returns (kind, parsed).  Detection order follows MODEL_PARSERS.
    """
    if not isinstance(obj, dict):
        raise ValidationError("top-level JSON value must be an object")
    for key, (kind, parser) in MODEL_PARSERS.items():
        if key in obj:
            return kind, parser(obj)
    raise ValidationError(
        f"unrecognized schema: keys {sorted(obj.keys())} match no known model"
    )


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(obj, path=None) -> str:
    """Deterministic serialization: sorted keys, fixed indentation."""
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
