import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import solve_sylvester

from gqc import metrology
from gqc.linalg import random_hermitian, random_unitary
from gqc.metrology import (
    DimensionError,
    Hamiltonian,
    gqc_from_spectrum,
    gqc_mixed,
    gqc_pure,
    gqc_pure_alt,
    l1_coherence,
    qfi_from_spectrum,
    qfi_mixed,
    qfi_mixed_ordered,
    qfi_pure,
    qfi_pure_pairs,
    sld_qfi,
    verify_identity,
)
from gqc.states import (
    DensityMatrix,
    PureState,
    maximally_mixed,
    pure_to_density,
    random_haar_pure,
    random_mixed,
)

seeds = st.integers(0, 2**32 - 1)


def rel(a, b):
    return abs(a - b) / max(abs(a), 1e-12)


def sylvester_qfi(rho, h):
    """Independent SLD oracle for full-rank rho: solve rho L + L rho = 2 d rho directly."""
    r = rho.array
    drho = -1j * (h.matrix @ r - r @ h.matrix)
    sld = solve_sylvester(r, r, 2 * drho)
    return float(np.trace(r @ sld @ sld).real)


def noon_like(n):
    a = np.zeros(n + 1)
    a[0] = a[n] = 1
    return PureState.normalized(a), Hamiltonian.diagonal(np.arange(n + 1))


def mixed_plus_minus(p):
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    return DensityMatrix.from_matrix(p * np.outer(plus, plus) + (1 - p) * np.outer(minus, minus))


# ----------------------------------------------------------------- coherence


def test_coherence_examples(plus):
    assert l1_coherence(pure_to_density(PureState.basis(3, 0))) == 0
    assert l1_coherence(pure_to_density(plus)) == pytest.approx(1, abs=1e-12)
    bell = PureState.normalized([1, 0, 0, 1])
    assert l1_coherence(bell) == pytest.approx(1, abs=1e-12)


def test_coherence_in_hamiltonian_basis(plus):
    # |+> is an eigenstate of sigma_x, so it has no coherence in that energy basis
    h = Hamiltonian.from_matrix([[0, 1], [1, 0]])
    assert l1_coherence(plus, h) == pytest.approx(0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(dim=st.integers(2, 8), seed=seeds)
def test_coherence_bounds(dim, seed):
    rng = np.random.default_rng(seed)
    rho = random_mixed(dim, int(rng.integers(1, dim + 1)), rng)
    c = l1_coherence(rho)
    assert -1e-12 <= c <= dim - 1 + 1e-10
    assert c > 0  # Ginibre states are never diagonal
    diag = DensityMatrix.from_matrix(np.diag(np.diag(rho.array).real))
    assert l1_coherence(diag) == 0


def test_coherence_maximal_state_hits_bound():
    d = 5
    assert l1_coherence(PureState.normalized(np.ones(d))) == pytest.approx(d - 1, abs=1e-12)


# ----------------------------------------------------------------------- QFI


def test_qfi_pure_plus(plus, h_spin):
    assert qfi_pure(plus, h_spin) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("n", range(2, 11))
def test_qfi_pure_noon_like(n):
    psi, h = noon_like(n)
    assert qfi_pure(psi, h) == pytest.approx(n**2, rel=1e-12)


def test_qfi_pure_eigenstate_is_zero():
    h = Hamiltonian.diagonal([0.3, -1, 2])
    assert qfi_pure(PureState.basis(3, 1), h) == 0


def test_qfi_mixed_maximally_mixed():
    h = Hamiltonian.from_matrix(random_hermitian(4, np.random.default_rng(0)))
    assert qfi_mixed(maximally_mixed(4), h) == 0


def test_qfi_mixed_plus_minus_mixture(h_spin):
    rho = mixed_plus_minus(0.8)
    # (2p - 1)^2 from the Sylvester oracle, frozen
    assert sylvester_qfi(rho, h_spin) == pytest.approx(0.36, abs=1e-12)
    assert qfi_mixed(rho, h_spin) == pytest.approx(0.36, abs=1e-12)


def test_qfi_mixed_rank_one_matches_pure():
    psi = random_haar_pure(5, 42)
    h = Hamiltonian.from_matrix(random_hermitian(5, np.random.default_rng(43)))
    assert rel(qfi_pure(psi, h), qfi_mixed(pure_to_density(psi), h)) <= 1e-10


def test_qfi_summation_conventions_agree():
    rng = np.random.default_rng(5)
    for rank in (1, 3, 5):
        rho = random_mixed(5, rank, rng)
        h = Hamiltonian.from_matrix(random_hermitian(5, rng))
        assert rel(qfi_mixed(rho, h), qfi_mixed_ordered(rho, h)) <= 1e-12


def test_qfi_dimension_mismatch(plus):
    with pytest.raises(DimensionError):
        qfi_pure(plus, Hamiltonian.diagonal([0, 1, 2]))
    with pytest.raises(DimensionError):
        qfi_mixed(random_mixed(3, 2, 0), Hamiltonian.diagonal([0, 1]))


# ----------------------------------------------------------------------- SLD


def test_sld_commuting_case():
    rho = DensityMatrix.from_matrix(np.diag([0.5, 0.3, 0.2]))
    f, sld = sld_qfi(rho, Hamiltonian.diagonal([1, 2, 3]))
    assert f == 0
    assert np.all(sld.matrix.matrix == 0)


def test_sld_plus(plus, h_spin):
    f, sld = sld_qfi(plus, h_spin)
    assert f == pytest.approx(1, abs=1e-12)
    assert sld.residual <= 1e-12


def test_sld_matches_sylvester_oracle_full_rank():
    rng = np.random.default_rng(17)
    for _ in range(10):
        rho = random_mixed(4, 4, rng)
        h = Hamiltonian.from_matrix(random_hermitian(4, rng))
        assert rel(sylvester_qfi(rho, h), sld_qfi(rho, h)[0]) <= 1e-8
        assert rel(sylvester_qfi(rho, h), qfi_mixed(rho, h)) <= 1e-8


def test_sld_rank_two_agrees_with_eigen_sum():
    rho = random_mixed(4, 2, 2024)
    h = Hamiltonian.diagonal(np.random.default_rng(2025).uniform(-1, 1, 4))
    f, sld = sld_qfi(rho, h)
    assert rel(qfi_mixed(rho, h), f) <= 1e-8
    drho = -1j * (h.matrix @ rho.array - rho.array @ h.matrix)
    assert sld.residual <= 1e-9 * np.max(np.abs(drho))


# ----------------------------------------------------------------------- GQC


def test_gqc_two_level_formula():
    # M = 2|c_k c_l| |l_k - l_l| for a superposition of two energy levels
    ck, cl = 0.6, 0.8j
    a = np.zeros(4, dtype=complex)
    a[1], a[3] = ck, cl
    h = Hamiltonian.diagonal([0.0, -0.4, 5.0, 1.1])
    report = gqc_pure(PureState(a), h)
    assert report.gqc == pytest.approx(2 * abs(ck * cl) * 1.5, rel=1e-12)
    assert report.coherence_l1 == pytest.approx(2 * abs(ck * cl), rel=1e-12)


def test_gqc_pure_eigenstate():
    assert gqc_pure(PureState.basis(3, 2), Hamiltonian.diagonal([0, 1, 2])).gqc == 0


@pytest.mark.parametrize("n", range(1, 11))
def test_gqc_pure_noon_like(n):
    psi, h = noon_like(n)
    report = gqc_pure(psi, h)
    assert report.gqc == pytest.approx(n, rel=1e-12)
    nonzero = [p for p in report.pair_terms if p.m2 > 0]
    assert [(p.i, p.j) for p in nonzero] == [(0, n)]


def test_gqc_alt_three_level():
    psi = PureState.normalized([1, 1, 1])
    h = Hamiltonian.diagonal([0, 1, 2])
    assert gqc_pure_alt(psi, h) == pytest.approx(8 / 3, rel=1e-12)
    assert gqc_pure(psi, h).gqc == pytest.approx(math.sqrt(24) / 3, rel=1e-12)


def test_gqc_alt_single_pair_equals_gqc():
    psi = PureState.normalized([0.3, 0, 0.9j])
    h = Hamiltonian.diagonal([1, 7, -2])
    assert gqc_pure_alt(psi, h) == pytest.approx(gqc_pure(psi, h).gqc, rel=1e-12)
    # two-level system
    psi2 = random_haar_pure(2, 0)
    h2 = Hamiltonian.diagonal([0.2, -0.9])
    assert gqc_pure_alt(psi2, h2) == pytest.approx(gqc_pure(psi2, h2).gqc, rel=1e-12)


def test_gqc_mixed_rank_one_matches_pure():
    rho = random_mixed(5, 1, 77)
    h = Hamiltonian.diagonal(np.random.default_rng(78).uniform(-1, 1, 5))
    v = rho.spectrum.eigenvectors[:, -1]
    pure = gqc_pure(PureState.normalized(v), h)
    assert rel(pure.gqc, gqc_mixed(rho, h).gqc) <= 1e-10


def test_gqc_mixed_maximally_mixed():
    report = gqc_mixed(maximally_mixed(4), Hamiltonian.diagonal([0, 1, 2, 3]))
    assert report.gqc == 0
    assert all(p.m2 == 0 for p in report.pair_terms)


def test_gqc_mixed_rank_three_vs_sld():
    rho = random_mixed(5, 3, 314)
    h = Hamiltonian.diagonal(np.random.default_rng(315).uniform(-1, 1, 5))
    assert rel(sld_qfi(rho, h)[0], gqc_mixed(rho, h).gqc_squared) <= 1e-8


def test_gqc_mixed_qubit_plus_minus(h_spin):
    report = gqc_mixed(mixed_plus_minus(0.8), h_spin)
    assert report.gqc_squared == pytest.approx(0.36, abs=1e-12)
    # for a qubit, M = C |l_0 - l_1| with C the l1 coherence
    assert report.gqc == pytest.approx(report.coherence_l1 * 1.0, rel=1e-12)


def test_gqc_non_diagonal_hamiltonian_reports_basis():
    rng = np.random.default_rng(9)
    h = Hamiltonian.from_matrix(random_hermitian(4, rng))
    rho = random_mixed(4, 2, rng)
    report = gqc_mixed(rho, h)
    assert report.basis == "hamiltonian_eigenbasis"
    assert rel(qfi_mixed(rho, h), report.gqc_squared) <= 1e-8
    psi = random_haar_pure(4, rng)
    assert rel(qfi_pure(psi, h), gqc_pure(psi, h).gqc ** 2) <= 1e-10
    assert gqc_pure(psi, Hamiltonian.diagonal([0, 1, 2, 3])).basis == "storage"


def test_gqc_report_invariants_and_json():
    report = gqc_mixed(random_mixed(4, 3, 1), Hamiltonian.diagonal([0.1, -0.5, 0.9, 0.3]))
    assert report.violations() == []
    doc = report.to_dict()
    assert set(doc) == {"gqc", "gqc_squared", "coherence_l1", "basis", "pairs"}
    assert set(doc["pairs"][0]) == {"i", "j", "weight", "m2"}


def test_gqc_pairs_below_cutoff_are_excluded():
    rho = random_mixed(5, 2, 4)
    report = gqc_mixed(rho, Hamiltonian.diagonal([0, 1, 2, 3, 4]))
    # eigenvalues ascending: the three null eigenvectors only pair with the support
    assert all(p.weight > 1e-12 for p in report.pair_terms)
    assert len(report.pair_terms) == 10 - 3


def test_corrupted_summand_breaks_identity(corrupted_gqc):
    rho = random_mixed(4, 4, 0)
    h = Hamiltonian.diagonal([0.1, -0.5, 0.9, 0.3])
    report = gqc_mixed(rho, h)
    assert report.gqc_squared < 0
    assert "negative pair term" in report.violations()


# ---------------------------------------------------------------- properties


@settings(max_examples=100, deadline=None)
@given(dim=st.integers(2, 8), seed=seeds)
def test_pure_identity_and_pair_sum(dim, seed):
    rng = np.random.default_rng(seed)
    psi = random_haar_pure(dim, rng)
    energies = rng.uniform(-1, 1, dim)
    energies[rng.integers(dim)] = energies[0]  # force a degeneracy sometimes
    h = Hamiltonian.diagonal(energies)
    f = qfi_pure(psi, h)
    report = gqc_pure(psi, h)
    assert rel(f, report.gqc**2) <= 1e-10
    assert rel(f, qfi_pure_pairs(psi, h)) <= 1e-10
    assert report.violations() == []


@settings(max_examples=100, deadline=None)
@given(dim=st.integers(2, 6), seed=seeds)
def test_mixed_identity_three_routes(dim, seed):
    rng = np.random.default_rng(seed)
    rho = random_mixed(dim, int(rng.integers(1, dim + 1)), rng)
    h = Hamiltonian.diagonal(rng.uniform(-1, 1, dim))
    f = qfi_mixed(rho, h)
    report = gqc_mixed(rho, h)
    assert rel(f, report.gqc_squared) <= 1e-8
    assert rel(f, sld_qfi(rho, h)[0]) <= 1e-8
    assert all(p.m2 >= -1e-10 for p in report.pair_terms)


@settings(max_examples=100, deadline=None)
@given(dim=st.integers(2, 8), seed=seeds)
def test_alt_dominates(dim, seed):
    rng = np.random.default_rng(seed)
    psi = random_haar_pure(dim, rng)
    h = Hamiltonian.diagonal(rng.uniform(-1, 1, dim))
    alt = gqc_pure_alt(psi, h)
    report = gqc_pure(psi, h)
    assert alt >= report.gqc * (1 - 1e-12)
    nonzero = sum(p.m2 > 1e-15 for p in report.pair_terms)
    if nonzero > 1:
        assert alt > report.gqc


@settings(max_examples=50, deadline=None)
@given(seed=seeds, s=st.floats(0.01, 100))
def test_scale_covariance(seed, s):
    rng = np.random.default_rng(seed)
    rho = random_mixed(4, int(rng.integers(1, 5)), rng)
    h = Hamiltonian.diagonal(rng.uniform(-1, 1, 4))
    hs = h.scaled(s)
    assert rel(s**2 * qfi_mixed(rho, h), qfi_mixed(rho, hs)) <= 1e-10
    assert rel(s**2 * gqc_mixed(rho, h).gqc_squared, gqc_mixed(rho, hs).gqc_squared) <= 1e-10
    psi = random_haar_pure(4, rng)
    assert rel(s**2 * qfi_pure(psi, h), gqc_pure(psi, hs).gqc ** 2) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_degenerate_eigenbasis_rotation(seed):
    rng = np.random.default_rng(seed)
    p = np.array([0.35, 0.2, 0.2, 0.2, 0.05])
    v = random_unitary(5, rng)
    rotated = v.copy()
    rotated[:, 1:4] = v[:, 1:4] @ random_unitary(3, rng)
    h = Hamiltonian.diagonal(rng.uniform(-1, 1, 5))
    f0, f1 = qfi_from_spectrum(p, v, h), qfi_from_spectrum(p, rotated, h)
    assert rel(f0, f1) <= 1e-8
    m0 = gqc_from_spectrum(p, v, h).gqc_squared
    m1 = gqc_from_spectrum(p, rotated, h).gqc_squared
    assert rel(m0, m1) <= 1e-8
    rho = DensityMatrix.from_matrix((v * p) @ v.conj().T)
    assert rel(qfi_mixed(rho, h), f0) <= 1e-8


# ----------------------------------------------------------- verify_identity


def test_verify_pure_dim2():
    assert verify_identity(2, 100, seed=0, mode="pure").max_rel_dev <= 1e-10


def test_verify_mixed_dim6():
    summary = verify_identity(6, 100, seed=0, mode="mixed")
    assert summary.max_rel_dev <= 1e-8
    assert {r.rank for r in summary.records} == set(range(1, 7))


def test_verify_deterministic():
    a = verify_identity(3, 1, seed=5, mode="mixed")
    b = verify_identity(3, 1, seed=5, mode="mixed")
    assert a == b


def test_verify_trials_independent_of_count():
    a = verify_identity(4, 5, seed=9, mode="pure").records
    b = verify_identity(4, 10, seed=9, mode="pure").records
    assert a == b[:5]


def test_verify_rejects_bad_args():
    with pytest.raises(ValueError):
        verify_identity(1, 10)
    with pytest.raises(ValueError):
        verify_identity(3, 0)
    with pytest.raises(ValueError):
        verify_identity(3, 1, mode="bogus")


def test_verify_catches_corruption(corrupted_gqc):
    summary = verify_identity(4, 20, seed=0, mode="mixed")
    assert not summary.passed
    assert metrology.verify_identity(4, 20, seed=0, mode="pure").passed
