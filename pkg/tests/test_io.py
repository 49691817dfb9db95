import json

import numpy as np
import pytest

from gqc.io import (
    FormatError,
    hamiltonian_from_doc,
    hamiltonian_to_dict,
    matrix_from_dict,
    matrix_to_dict,
    parse_json,
    state_from_doc,
    state_to_dict,
)
from gqc.metrology import Hamiltonian
from gqc.states import DensityMatrix, PureState, random_haar_pure, random_mixed


def test_matrix_round_trip():
    m = random_mixed(3, 2, 0).array
    doc = json.loads(json.dumps(matrix_to_dict(m)))
    back = matrix_from_dict(doc)
    assert np.max(np.abs(back - m)) <= 1e-15 * np.max(np.abs(m))
    assert doc["rows"] == doc["cols"] == 3 and len(doc["data"]) == 9


def test_matrix_row_major():
    doc = {"rows": 1, "cols": 2, "data": [[1, 0], [0, 2]]}
    np.testing.assert_array_equal(matrix_from_dict(doc), [[1, 2j]])


def test_matrix_bad_shape():
    with pytest.raises(FormatError):
        matrix_from_dict({"rows": 2, "cols": 2, "data": [[1, 0]]})
    with pytest.raises(FormatError):
        matrix_from_dict({"rows": 2, "data": []})


def test_state_docs():
    psi = random_haar_pure(3, 1)
    back = state_from_doc(json.loads(json.dumps(state_to_dict(psi))))
    assert isinstance(back, PureState)
    np.testing.assert_allclose(back.amplitudes, psi.amplitudes, rtol=1e-15)
    rho = state_from_doc(matrix_to_dict(np.diag([0.25, 0.75])))
    assert isinstance(rho, DensityMatrix)


def test_hamiltonian_docs():
    h = hamiltonian_from_doc({"diag": [0.5, -0.5]})
    assert h.is_diagonal
    assert hamiltonian_to_dict(h) == {"diag": [0.5, -0.5]}
    full = hamiltonian_from_doc(matrix_to_dict([[0, 1], [1, 0]]))
    assert not full.is_diagonal
    assert isinstance(full, Hamiltonian)
    with pytest.raises(FormatError):
        hamiltonian_from_doc({"diag": []})


def test_parse_error_reports_byte_offset():
    with pytest.raises(FormatError, match="byte offset 15"):
        parse_json('{"amplitudes": ', "x.json")
    # multi-byte characters before the error count as bytes
    with pytest.raises(FormatError, match="byte offset 9"):
        parse_json('{"é": 1,,}')
