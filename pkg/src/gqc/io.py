"""JSON file formats for matrices, pure states and Hamiltonians.

* matrix:      ``{"rows": n, "cols": m, "data": [[re, im], ...]}`` (row-major)
* pure state:  ``{"amplitudes": [[re, im], ...]}``
* Hamiltonian: ``{"diag": [e0, e1, ...]}`` or the matrix format
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .metrology import Hamiltonian
from .states import DensityMatrix, PureState


class FormatError(ValueError):
    """A file parsed as JSON (or failed to) but is not a valid document for its role."""


def _pairs(values) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"expected a list of [re, im] pairs: {exc}") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FormatError(f"expected a list of [re, im] pairs, got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def _to_pairs(values: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).ravel()]


def matrix_to_dict(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"rows": m.shape[0], "cols": m.shape[1], "data": _to_pairs(m)}


def matrix_from_dict(doc: dict) -> np.ndarray:
    try:
        rows, cols, data = int(doc["rows"]), int(doc["cols"]), doc["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"matrix document needs rows, cols and data: {exc}") from exc
    flat = _pairs(data)
    if rows < 1 or cols < 1 or flat.size != rows * cols:
        raise FormatError(f"matrix data has {flat.size} entries, expected {rows}x{cols}")
    return flat.reshape(rows, cols)


def state_to_dict(psi: PureState) -> dict:
    return {"amplitudes": _to_pairs(psi.amplitudes)}


def parse_json(text: str | bytes, source: str = "<input>"):
    """``json.loads`` that reports failures with a byte offset."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise FormatError(f"{source}: invalid JSON at byte offset {offset}: {exc.msg}") from exc


def load_json(path) -> object:
    return parse_json(Path(path).read_bytes(), str(path))


def state_from_doc(doc) -> PureState | DensityMatrix:
    """A pure state or a density matrix, depending on which keys are present."""
    if not isinstance(doc, dict):
        raise FormatError("state document must be a JSON object")
    if "amplitudes" in doc:
        return PureState(_pairs(doc["amplitudes"]))
    return DensityMatrix.from_matrix(matrix_from_dict(doc))


def hamiltonian_from_doc(doc) -> Hamiltonian:
    if not isinstance(doc, dict):
        raise FormatError("Hamiltonian document must be a JSON object")
    if "diag" in doc:
        try:
            energies = np.asarray(doc["diag"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"diag must be a list of real numbers: {exc}") from exc
        if energies.ndim != 1 or energies.size == 0:
            raise FormatError("diag must be a non-empty list of real numbers")
        return Hamiltonian.diagonal(energies)
    return Hamiltonian.from_matrix(matrix_from_dict(doc))


def hamiltonian_to_dict(h: Hamiltonian) -> dict:
    if h.is_diagonal:
        return {"diag": [float(e) for e in h.energies]}
    return matrix_to_dict(h.matrix)


def load_state(path):
    return state_from_doc(load_json(path))


def load_hamiltonian(path) -> Hamiltonian:
    return hamiltonian_from_doc(load_json(path))
