"""Coherence, quantum Fisher information and general quantum coherence (GQC).

Three independent routes to the QFI of ``rho`` under ``U = exp(-i H phi)``:

* ``qfi_mixed`` -- the eigen-sum ``4 sum_{i<j} (p_i-p_j)^2/(p_i+p_j) |<i|H|j>|^2``;
* ``sld_qfi`` -- ``Tr(rho L^2)`` with ``L`` the symmetric logarithmic derivative;
* ``gqc_mixed(...).gqc_squared`` -- the pairwise coherence construction.

For pure states ``qfi_pure`` is four times the variance of ``H``. All of them
agree to rounding error; ``verify_identity`` measures by how much.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import HermitianOperator, SpectralDecomposition, eigh, max_abs
from .states import (
    DensityMatrix,
    PureState,
    StateError,
    as_density,
    random_haar_pure,
    random_mixed,
    rng_from,
)

SUPPORT_CUTOFF = 1e-12
REL_DEV_FLOOR = 1e-12
DIAGONAL_TOL = 1e-12


class DimensionError(StateError):
    """State and Hamiltonian live in spaces of different dimension."""


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Parametrization generator with its energy basis precomputed.

    For a diagonal operator the energy basis is the storage basis in storage
    order, so pair indices in GQC reports are the indices the caller used.
    Otherwise it is the ascending eigenbasis from ``linalg.eigh``.
    """

    operator: HermitianOperator
    spectrum: SpectralDecomposition
    is_diagonal: bool

    @classmethod
    def from_matrix(cls, a) -> "Hamiltonian":
        op = a if isinstance(a, HermitianOperator) else HermitianOperator.from_matrix(a)
        m = op.matrix
        off = m - np.diag(np.diag(m))
        return cls(op, eigh(op), bool(max_abs(off) <= DIAGONAL_TOL))

    @classmethod
    def diagonal(cls, energies) -> "Hamiltonian":
        e = np.asarray(energies, dtype=float).reshape(-1)
        return cls.from_matrix(np.diag(e))

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    @property
    def dim(self) -> int:
        return self.operator.dim

    @property
    def energies(self) -> np.ndarray:
        if self.is_diagonal:
            return np.diag(self.matrix).real.copy()
        return np.array(self.spectrum.eigenvalues)

    @property
    def energy_basis(self) -> np.ndarray:
        """Columns are the energy eigenvectors, matching ``energies``."""
        if self.is_diagonal:
            return np.eye(self.dim, dtype=np.complex128)
        return np.array(self.spectrum.eigenvectors)

    @property
    def basis_label(self) -> str:
        return "storage" if self.is_diagonal else "hamiltonian_eigenbasis"

    def scaled(self, s: float) -> "Hamiltonian":
        return Hamiltonian.from_matrix(s * self.matrix)


def as_hamiltonian(h) -> Hamiltonian:
    return h if isinstance(h, Hamiltonian) else Hamiltonian.from_matrix(h)


def _check_dims(dim: int, h: Hamiltonian) -> None:
    if dim != h.dim:
        raise DimensionError(f"dimension mismatch: state is {dim}, Hamiltonian is {h.dim}")


@dataclass(frozen=True)
class PairTerm:
    """One ``i < j`` contribution to ``M^2``: ``weight * m2``."""

    i: int
    j: int
    weight: float
    m2: float


@dataclass(frozen=True)
class GqcReport:
    gqc: float
    gqc_squared: float
    pair_terms: tuple[PairTerm, ...]
    coherence_l1: float
    basis: str

    @classmethod
    def from_pairs(cls, pairs, coherence_l1: float, basis: str) -> "GqcReport":
        pairs = tuple(pairs)
        m2 = math.fsum(p.weight * p.m2 for p in pairs)
        return cls(math.sqrt(max(m2, 0.0)), m2, pairs, coherence_l1, basis)

    def violations(self, tol: float = 1e-10) -> list[str]:
        """Names of the report invariants that do not hold (empty when valid)."""
        out = []
        if abs(self.gqc_squared - self.gqc**2) > 1e-12 * max(1.0, self.gqc_squared):
            out.append("gqc_squared != gqc**2")
        total = math.fsum(p.weight * p.m2 for p in self.pair_terms)
        if abs(total - self.gqc_squared) > tol * max(1.0, abs(total)):
            out.append("gqc_squared != weighted pair sum")
        if any(p.m2 < -tol for p in self.pair_terms):
            out.append("negative pair term")
        return out

    def to_dict(self) -> dict:
        return {
            "gqc": self.gqc,
            "gqc_squared": self.gqc_squared,
            "coherence_l1": self.coherence_l1,
            "basis": self.basis,
            "pairs": [
                {"i": p.i, "j": p.j, "weight": p.weight, "m2": p.m2}
                for p in self.pair_terms
            ],
        }


@dataclass(frozen=True)
class SldOperator:
    matrix: HermitianOperator
    residual: float


# --------------------------------------------------------------------------- #
# coherence and QFI


def l1_coherence(rho, h=None) -> float:
    """Sum of off-diagonal magnitudes, in the energy basis of ``h`` if given."""
    m = as_density(rho).array
    if h is not None:
        h = as_hamiltonian(h)
        _check_dims(m.shape[0], h)
        w = h.energy_basis
        m = w.conj().T @ m @ w
    return _offdiag_l1(m)


def _offdiag_l1(m: np.ndarray) -> float:
    off = np.abs(m)
    np.fill_diagonal(off, 0.0)
    return math.fsum(off.ravel())


def qfi_pure(psi: PureState, h) -> float:
    h = as_hamiltonian(h)
    _check_dims(psi.dim, h)
    a = psi.amplitudes
    ha = h.matrix @ a
    mean = np.vdot(a, ha).real
    # <H^2> - <H>^2 written as |(H - <H>) psi|^2 to avoid cancellation
    centred = ha - mean * a
    return 4.0 * float(np.vdot(centred, centred).real)


def qfi_pure_pairs(psi: PureState, h) -> float:
    """Pure-state QFI as the pair sum ``sum_{i<j} 4|a_i|^2|a_j|^2 (l_i-l_j)^2``."""
    h = as_hamiltonian(h)
    _check_dims(psi.dim, h)
    w = np.abs(h.energy_basis.conj().T @ psi.amplitudes) ** 2
    lam = h.energies
    gap2 = (lam[:, None] - lam[None, :]) ** 2
    return float(2.0 * w @ gap2 @ w)


def _support(p: np.ndarray) -> np.ndarray:
    p = np.where(p < SUPPORT_CUTOFF * p.sum(), 0.0, p)
    return p


def qfi_from_spectrum(probs, vectors, h) -> float:
    """Eigen-sum QFI for an explicit decomposition ``rho = sum p_i |v_i><v_i|``."""
    h = as_hamiltonian(h)
    p = _support(np.asarray(probs, dtype=float))
    v = np.asarray(vectors)
    _check_dims(v.shape[0], h)
    hij = v.conj().T @ h.matrix @ v
    psum = p[:, None] + p[None, :]
    mask = np.triu(psum > SUPPORT_CUTOFF, k=1)
    dp2 = (p[:, None] - p[None, :]) ** 2
    terms = dp2[mask] / psum[mask] * np.abs(hij[mask]) ** 2
    return 4.0 * math.fsum(terms)


def qfi_mixed(rho, h) -> float:
    rho = as_density(rho)
    spec = rho.spectrum
    return qfi_from_spectrum(spec.eigenvalues, spec.eigenvectors, h)


def qfi_mixed_ordered(rho, h) -> float:
    """The same eigen-sum written over ordered pairs ``i != j`` with prefactor 2."""
    rho = as_density(rho)
    h = as_hamiltonian(h)
    _check_dims(rho.dim, h)
    p = _support(np.array(rho.spectrum.eigenvalues))
    v = rho.spectrum.eigenvectors
    hij = v.conj().T @ h.matrix @ v
    total = 0.0
    for i in range(len(p)):
        for j in range(len(p)):
            if i != j and p[i] + p[j] > SUPPORT_CUTOFF:
                total += (p[i] - p[j]) ** 2 / (p[i] + p[j]) * abs(hij[i, j]) ** 2
    return 2.0 * total


def sld_qfi(rho, h) -> tuple[float, SldOperator]:
    """QFI as ``Tr(rho L^2)`` with ``L`` solving ``d rho = (L rho + rho L) / 2``.

    ``d rho = -i [H, rho]`` is the derivative of ``U rho U^dagger`` at
    ``phi = 0``. The Lyapunov equation is solved entrywise in the eigenbasis
    of ``rho``; entries where ``p_k + p_l`` is below the support cutoff are set
    to zero.
    """
    rho = as_density(rho)
    h = as_hamiltonian(h)
    _check_dims(rho.dim, h)
    r = rho.array
    drho = -1j * (h.matrix @ r - r @ h.matrix)

    p = _support(np.array(rho.spectrum.eigenvalues))
    v = rho.spectrum.eigenvectors
    d_eig = v.conj().T @ drho @ v
    psum = p[:, None] + p[None, :]
    support = psum > SUPPORT_CUTOFF
    l_eig = np.zeros_like(d_eig)
    l_eig[support] = 2.0 * d_eig[support] / psum[support]
    sld = v @ l_eig @ v.conj().T
    sld = (sld + sld.conj().T) / 2

    residual = max_abs((sld @ r + r @ sld) / 2 - drho)
    f = float(np.trace(r @ sld @ sld).real)
    return f, SldOperator(HermitianOperator(sld, 0.0), residual)


# --------------------------------------------------------------------------- #
# general quantum coherence


def gqc_pure(psi: PureState, h) -> GqcReport:
    """GQC of a pure state: ``sqrt(sum_{i<j} 4 |a_i a_j|^2 (l_i - l_j)^2)``.

    Amplitudes ``a_i`` are taken in the energy basis of ``h``.
    """
    h = as_hamiltonian(h)
    _check_dims(psi.dim, h)
    a = h.energy_basis.conj().T @ psi.amplitudes
    lam = h.energies
    n = len(a)
    pairs = [
        PairTerm(i, j, 1.0, float(4 * abs(a[i] * a[j]) ** 2 * (lam[i] - lam[j]) ** 2))
        for i in range(n)
        for j in range(i + 1, n)
    ]
    c = _offdiag_l1(np.outer(a, a.conj()))
    return GqcReport.from_pairs(pairs, c, h.basis_label)


def gqc_pure_alt(psi: PureState, h) -> float:
    """Linear-sum variant ``sum_{i<j} 2 |a_i a_j| |l_i - l_j|``; never below ``gqc_pure``."""
    h = as_hamiltonian(h)
    _check_dims(psi.dim, h)
    a = np.abs(h.energy_basis.conj().T @ psi.amplitudes)
    lam = h.energies
    terms = 2 * np.outer(a, a) * np.abs(lam[:, None] - lam[None, :])
    return math.fsum(terms[np.triu_indices(len(a), k=1)])


def _pair_summand_sums(x: np.ndarray, gap2: np.ndarray) -> np.ndarray:
    """``sum_{k<l} -2 [conj(x_k) x_l + x_k conj(x_l)] (l_k - l_l)^2`` per column of ``x``.

    Column ``j`` of ``x`` holds ``x_k = conj(a_k^(i)) a_k^(j)`` for a fixed
    eigenvector ``i``. Relabelling ``k <-> l`` in the conjugate half of the
    bracket turns the ``k < l`` sum into ``x^dagger gap2 x`` (``gap2`` has a
    zero diagonal).
    """
    return -2.0 * np.sum(x.conj() * (gap2 @ x), axis=0).real


def gqc_from_spectrum(probs, vectors, h, *, coherence_l1: float | None = None) -> GqcReport:
    """Mixed-state GQC from an explicit decomposition ``rho = sum p_i |v_i><v_i|``.

    Per eigenpair ``i < j`` of ``rho``::

        M_ij^2 = ((p_i-p_j)/(p_i+p_j))^2 * sum_{k<l} -2[a_k^i a_l^i* a_k^j* a_l^j + c.c.](l_k-l_l)^2

    with ``a_k^i = <k|v_i>`` in the energy basis, and ``M^2 = sum (p_i+p_j) M_ij^2``.
    Pairs below the support cutoff are left out of the report.
    """
    h = as_hamiltonian(h)
    p = _support(np.asarray(probs, dtype=float))
    v = np.asarray(vectors)
    _check_dims(v.shape[0], h)
    amps = h.energy_basis.conj().T @ v
    lam = h.energies
    gap2 = (lam[:, None] - lam[None, :]) ** 2

    n = len(p)
    pairs = []
    for i in range(n - 1):
        js = np.arange(i + 1, n)
        psum = p[i] + p[js]
        keep = psum > SUPPORT_CUTOFF
        js, psum = js[keep], psum[keep]
        if js.size == 0:
            continue
        x = amps[:, [i]].conj() * amps[:, js]
        sums = _pair_summand_sums(x, gap2)
        ratio2 = ((p[i] - p[js]) / psum) ** 2
        for j, w, m2 in zip(js, psum, ratio2 * sums):
            pairs.append(PairTerm(i, int(j), float(w), float(m2)))

    if coherence_l1 is None:
        rho = (v * p) @ v.conj().T
        coherence_l1 = l1_coherence(DensityMatrix.from_matrix(rho / p.sum()), h)
    return GqcReport.from_pairs(pairs, coherence_l1, h.basis_label)


def gqc_mixed(rho, h) -> GqcReport:
    rho = as_density(rho)
    h = as_hamiltonian(h)
    _check_dims(rho.dim, h)
    spec = rho.spectrum
    return gqc_from_spectrum(
        spec.eigenvalues, spec.eigenvectors, h, coherence_l1=l1_coherence(rho, h)
    )


# --------------------------------------------------------------------------- #
# identity sweep


def relative_deviation(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), REL_DEV_FLOOR)


def random_diagonal_hamiltonian(dim: int, rng: np.random.Generator) -> Hamiltonian:
    return Hamiltonian.diagonal(rng.uniform(-1.0, 1.0, size=dim))


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    dim: int
    rank: int
    f_q: float
    m_squared: float
    rel_dev: float


@dataclass(frozen=True)
class IdentitySummary:
    mode: str
    dim: int
    seed: int
    records: tuple[TrialRecord, ...] = field(repr=False)

    @property
    def max_rel_dev(self) -> float:
        return max(r.rel_dev for r in self.records)

    @property
    def mean_rel_dev(self) -> float:
        return math.fsum(r.rel_dev for r in self.records) / len(self.records)

    @property
    def threshold(self) -> float:
        return IDENTITY_THRESHOLDS[self.mode]

    @property
    def passed(self) -> bool:
        # NaN compares false, so a broken route cannot pass.
        return bool(self.max_rel_dev <= self.threshold)


IDENTITY_THRESHOLDS = {"pure": 1e-10, "mixed": 1e-8}


def identity_trial(mode: str, dim: int, seed: int, trial: int, rank: int | None = None) -> TrialRecord:
    """One sample of the QFI = GQC^2 check, on the RNG stream ``(seed, trial)``."""
    rng = rng_from(seed, trial)
    h = random_diagonal_hamiltonian(dim, rng)
    if mode == "pure":
        psi = random_haar_pure(dim, rng)
        f = qfi_pure(psi, h)
        m2 = gqc_pure(psi, h).gqc ** 2
        return TrialRecord(trial, dim, 1, f, m2, relative_deviation(f, m2))
    if mode == "mixed":
        r = rank if rank is not None else 1 + trial % dim
        rho = random_mixed(dim, r, rng)
        f = qfi_mixed(rho, h)
        f_sld, _ = sld_qfi(rho, h)
        m2 = gqc_mixed(rho, h).gqc ** 2
        dev = max(relative_deviation(f, m2), relative_deviation(f, f_sld))
        return TrialRecord(trial, dim, r, f, m2, dev)
    raise ValueError(f"mode must be 'pure' or 'mixed', got {mode!r}")


def verify_identity(
    dim: int, trials: int, seed: int = 0, mode: str = "pure", rank: int | None = None
) -> IdentitySummary:
    """Sample random states and diagonal Hamiltonians and compare QFI with GQC^2.

    Hamiltonian energies are i.i.d. uniform on [-1, 1]. In mixed mode the rank
    cycles through ``1..dim`` unless ``rank`` is fixed, and the deviation also
    covers the SLD route.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    records = tuple(identity_trial(mode, dim, seed, t, rank) for t in range(trials))
    return IdentitySummary(mode, dim, int(seed), records)
