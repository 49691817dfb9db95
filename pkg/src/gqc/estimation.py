"""Monte-Carlo phase estimation, Pauli tomography and the two-photon replication.

The pipeline mirrors a metrology experiment: prepare ``rho``, imprint ``phi``
with ``exp(-i H phi)``, measure ``N_m`` times in a fixed basis, and estimate
``phi`` by maximum likelihood. Repeating this over many trials gives an
empirical standard deviation to hold against ``1/sqrt(N_m F_Q)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import kron, max_abs
from .metrology import Hamiltonian, as_hamiltonian, qfi_mixed
from .states import (
    DensityMatrix,
    PureState,
    StateError,
    as_density,
    evolve_unitary,
    pure_to_density,
    rng_from,
)

COMPLETENESS_TOL = 1e-10
PROB_TOL = 1e-12
FD_STEP = 1e-6
GRID_POINTS = 2001

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

# Columns are the +1 and -1 eigenvectors; outcome bit 0 means +1.
_PAULI_EIGVECS = {
    "X": np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2),
    "Y": np.array([[1, 1], [1j, -1j]], dtype=np.complex128) / np.sqrt(2),
    "Z": np.eye(2, dtype=np.complex128),
}


class EstimationError(ValueError):
    """The estimation problem is ill-posed (e.g. the measurement carries no information)."""


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """A projective (or coarse-grained projective) measurement."""

    projectors: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        projs = tuple(np.asarray(p, dtype=np.complex128) for p in self.projectors)
        if not projs:
            raise StateError("a measurement needs at least one outcome")
        dim = projs[0].shape[0]
        if any(p.shape != (dim, dim) for p in projs):
            raise StateError("projectors must be square and of equal dimension")
        if max_abs(sum(projs) - np.eye(dim)) > COMPLETENESS_TOL:
            raise StateError("projectors do not sum to the identity")
        for p in projs:
            if max_abs(p - p.conj().T) > COMPLETENESS_TOL or np.linalg.eigvalsh(p)[0] < -COMPLETENESS_TOL:
                raise StateError("every outcome operator must be Hermitian PSD")
        object.__setattr__(self, "projectors", projs)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(len(projs))))

    @classmethod
    def from_vectors(cls, vectors, labels: Sequence[str] = ()) -> "MeasurementBasis":
        """Rank-1 projectors onto the columns of an orthonormal ``vectors``."""
        v = np.asarray(vectors, dtype=np.complex128)
        return cls(tuple(np.outer(v[:, k], v[:, k].conj()) for k in range(v.shape[1])), tuple(labels))

    @classmethod
    def pauli(cls, setting: str) -> "MeasurementBasis":
        """Product eigenbasis of a Pauli string such as ``"Y"`` or ``"XZ"``.

        Outcomes are labelled by bit strings, bit ``q`` being 0 for the +1
        eigenvalue of qubit ``q``.
        """
        setting = setting.upper()
        if not setting or any(c not in _PAULI_EIGVECS for c in setting):
            raise StateError(f"invalid Pauli setting {setting!r}")
        v = np.ones((1, 1), dtype=np.complex128)
        for c in setting:
            v = np.kron(v, _PAULI_EIGVECS[c])
        labels = ["".join(b) for b in itertools.product("01", repeat=len(setting))]
        return cls.from_vectors(v, labels)

    @classmethod
    def eigenbasis(cls, h) -> "MeasurementBasis":
        return cls.from_vectors(as_hamiltonian(h).energy_basis)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]


def _normalize_probs(p: np.ndarray) -> np.ndarray:
    if np.any(p < -PROB_TOL):
        raise StateError(f"negative outcome probability {p.min()!r}")
    p = np.clip(p, 0.0, 1.0)
    return p / p.sum(axis=-1, keepdims=True)


def outcome_distribution(rho, basis: MeasurementBasis) -> np.ndarray:
    """Born-rule probabilities ``Tr(Pi_x rho)``."""
    rho = as_density(rho)
    if rho.dim != basis.dim:
        raise StateError(f"dimension mismatch: state is {rho.dim}, measurement is {basis.dim}")
    r = rho.array
    p = np.array([np.sum(pi.T * r).real for pi in basis.projectors])
    return _normalize_probs(p)


class _PhaseModel:
    """Outcome probabilities of ``U(phi) rho U(phi)^dagger``, vectorised over ``phi``."""

    def __init__(self, rho: DensityMatrix, h: Hamiltonian, basis: MeasurementBasis):
        if not rho.dim == h.dim == basis.dim:
            raise StateError("state, Hamiltonian and measurement dimensions differ")
        w = h.spectrum.eigenvectors
        lam = h.spectrum.eigenvalues
        self.rho_e = w.conj().T @ rho.array @ w
        self.proj_e = np.stack([w.conj().T @ p @ w for p in basis.projectors])
        self.gaps = lam[:, None] - lam[None, :]

    def probs(self, phi) -> np.ndarray:
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        rho_phi = self.rho_e[None] * np.exp(-1j * phi[:, None, None] * self.gaps[None])
        p = np.einsum("xlk,nkl->nx", self.proj_e, rho_phi).real
        return _normalize_probs(p)

    def period(self) -> float:
        """Smallest period compatible with all energy gaps (2 pi / smallest gap)."""
        g = np.abs(self.gaps[self.gaps > 0])
        g = g[np.abs(self.rho_e[self.gaps > 0]) > PROB_TOL] if g.size else g
        if g.size == 0:
            return math.inf
        return 2 * math.pi / float(g.min())


def classical_fisher(rho, h, basis: MeasurementBasis, phi: float) -> float:
    """Classical Fisher information of ``basis`` at ``phi``, by central differences."""
    model = _PhaseModel(as_density(rho), as_hamiltonian(h), basis)
    p0, p_plus, p_minus = model.probs([phi, phi + FD_STEP, phi - FD_STEP])
    dp = (p_plus - p_minus) / (2 * FD_STEP)
    keep = p0 >= PROB_TOL
    return math.fsum(dp[keep] ** 2 / p0[keep])


def _golden_max(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2


def identifiable_window(model: _PhaseModel, true_phi: float, points: int = GRID_POINTS) -> np.ndarray:
    """Grid of candidate phases on which the likelihood is single-branched.

    Start from one period centred on ``true_phi`` and shrink to the interval
    around it on which the most phase-sensitive outcome probability is
    strictly monotone; outside it the same data has a mirror-image solution.
    """
    period = model.period()
    if not math.isfinite(period):
        raise EstimationError("outcome probabilities do not depend on phi")
    grid = true_phi + np.linspace(-period / 2, period / 2, points)
    p = model.probs(grid)
    centre = points // 2
    slope = np.gradient(p, grid, axis=0)
    x = int(np.argmax(np.abs(slope[centre])))
    sign = np.sign(slope[centre, x])
    same = np.sign(slope[:, x]) == sign
    lo = centre
    while lo > 0 and same[lo - 1]:
        lo -= 1
    hi = centre
    while hi < points - 1 and same[hi + 1]:
        hi += 1
    return grid[lo : hi + 1]


def mle_phase(model: _PhaseModel, counts: np.ndarray, window: np.ndarray) -> float:
    """Maximum-likelihood phase on ``window``: grid search, then golden-section refinement."""
    seen = counts > 0
    c = counts[seen]

    def loglik(phi):
        p = model.probs(phi)[:, seen]
        return np.log(np.maximum(p, 1e-300)) @ c

    ll = loglik(window)
    k = int(np.argmax(ll))
    lo = window[max(k - 1, 0)]
    hi = window[min(k + 1, len(window) - 1)]
    return _golden_max(lambda t: float(loglik(t)[0]), lo, hi)


@dataclass(frozen=True)
class EstimationRun:
    true_phi: float
    shots: int
    trials: int
    estimates: np.ndarray = field(repr=False)
    empirical_std: float
    crlb: float
    classical_fisher: float
    quantum_fisher: float
    window: tuple[float, float]

    def summary(self) -> dict:
        return {
            "true_phi": self.true_phi,
            "shots": self.shots,
            "trials": self.trials,
            "mean_estimate": float(np.mean(self.estimates)),
            "empirical_std": self.empirical_std,
            "crlb": self.crlb,
            "std_over_crlb": self.empirical_std / self.crlb if self.crlb > 0 else math.inf,
            "classical_fisher": self.classical_fisher,
            "quantum_fisher": self.quantum_fisher,
        }


def run_estimation(
    rho, h, basis: MeasurementBasis, true_phi: float, shots: int, trials: int, seed=0
) -> EstimationRun:
    """Repeat ``trials`` independent ``shots``-sample experiments and MLE-estimate ``phi``.

    Trial ``t`` draws from the RNG stream ``(seed, t)``. Raises
    ``EstimationError`` if the measurement carries no information about
    ``phi`` at ``true_phi``.
    """
    if shots < 1 or trials < 1:
        raise ValueError("shots and trials must be positive")
    rho = as_density(rho)
    h = as_hamiltonian(h)
    f_q = qfi_mixed(rho, h)
    f_c = classical_fisher(rho, h, basis, true_phi)
    if f_c <= 1e-8 * max(f_q, 1.0):
        raise EstimationError(
            f"phi is not identifiable with this measurement (classical Fisher information {f_c:.3g})"
        )
    model = _PhaseModel(rho, h, basis)
    p_true = model.probs(true_phi)[0]
    window = identifiable_window(model, true_phi)

    estimates = np.empty(trials)
    for t in range(trials):
        counts = rng_from(seed, t).multinomial(shots, p_true)
        estimates[t] = mle_phase(model, counts, window)
    std = float(np.std(estimates, ddof=1)) if trials > 1 else 0.0
    crlb = 1.0 / math.sqrt(shots * f_q) if f_q > 0 else math.inf
    return EstimationRun(
        float(true_phi), shots, trials, estimates, std, crlb, f_c, f_q,
        (float(window[0]), float(window[-1])),
    )


# --------------------------------------------------------------------------- #
# tomography


@dataclass(frozen=True)
class TomographyResult:
    reconstructed: DensityMatrix
    shots_per_setting: int | None
    settings_count: int
    raw: np.ndarray = field(repr=False)


def _qubit_count(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise StateError(f"Pauli tomography needs dimension 2**k, got {dim}")
    return n


def pauli_operator(label: str) -> np.ndarray:
    m = np.ones((1, 1), dtype=np.complex128)
    for c in label:
        m = kron(m, PAULI[c])
    return m


def project_to_density(m: np.ndarray) -> DensityMatrix:
    """Nearest-in-spirit valid state: clip negative eigenvalues, renormalise the trace."""
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise StateError("reconstruction has no positive part")
    w /= w.sum()
    return DensityMatrix.from_matrix((v * w) @ v.conj().T)


def tomography(rho_true, shots_per_setting: int | None, seed=0) -> TomographyResult:
    """Simulated Pauli tomography with linear inversion.

    Every setting in ``{X, Y, Z}^n`` is measured ``shots_per_setting`` times
    (``None`` uses the exact probabilities). Each Pauli expectation is the
    average over all settings that agree with it on its non-identity qubits.
    Setting ``s`` samples from RNG stream ``(seed, s)``.
    """
    rho_true = as_density(rho_true)
    n = _qubit_count(rho_true.dim)
    settings = ["".join(s) for s in itertools.product("XYZ", repeat=n)]
    bits = np.array(list(itertools.product((0, 1), repeat=n)))
    signs = 1 - 2 * bits  # (outcomes, qubits)

    freqs = {}
    for k, s in enumerate(settings):
        p = outcome_distribution(rho_true, MeasurementBasis.pauli(s))
        if shots_per_setting is not None:
            p = rng_from(seed, k).multinomial(shots_per_setting, p) / shots_per_setting
        freqs[s] = p

    d = rho_true.dim
    est = np.zeros((d, d), dtype=np.complex128)
    for label in ("".join(t) for t in itertools.product("IXYZ", repeat=n)):
        active = [q for q, c in enumerate(label) if c != "I"]
        if not active:
            expval = 1.0
        else:
            eig = np.prod(signs[:, active], axis=1)
            vals = [
                freqs[s] @ eig
                for s in settings
                if all(s[q] == label[q] for q in active)
            ]
            expval = float(np.mean(vals))
        est += expval * pauli_operator(label)
    est /= d
    return TomographyResult(project_to_density(est), shots_per_setting, len(settings), est)


def trace_distance(a, b) -> float:
    diff = as_density(a).array - as_density(b).array
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


# --------------------------------------------------------------------------- #
# two-photon experiment


def experiment_probes() -> list[tuple[str, DensityMatrix, Hamiltonian]]:
    """The single-photon and Bell-pair probes with their generators."""
    sz = PAULI["Z"]
    i2 = PAULI["I"]
    plus = PureState.normalized([1, 1])
    bell = PureState.normalized([1, 0, 0, 1])
    h1 = Hamiltonian.from_matrix(sz / 2)
    h2 = Hamiltonian.from_matrix((kron(sz, i2) + kron(i2, sz)) / 2)
    return [
        ("qfi1", pure_to_density(plus), h1),
        ("qfi2", pure_to_density(bell), h2),
    ]


@dataclass(frozen=True)
class ExperimentReport:
    thetas: np.ndarray
    qfi1: np.ndarray
    qfi2: np.ndarray
    shots: int | None
    seed: int

    @property
    def f_q1_avg(self) -> float:
        return float(np.mean(self.qfi1))

    @property
    def f_q2_avg(self) -> float:
        return float(np.mean(self.qfi2))

    @property
    def ratio(self) -> float:
        return self.f_q2_avg / self.f_q1_avg

    def rows(self):
        for t, a, b in zip(self.thetas, self.qfi1, self.qfi2):
            yield float(t), float(a), float(b)

    def summary(self) -> dict:
        return {
            "f_q1_avg": self.f_q1_avg,
            "f_q2_avg": self.f_q2_avg,
            "ratio": self.ratio,
            "shots": self.shots if self.shots is not None else 0,
            "seed": self.seed,
        }


def replicate_experiment(shots_per_setting: int | None, theta_grid, seed=0) -> ExperimentReport:
    """QFI of the tomographically reconstructed output state at every ``theta``.

    ``shots_per_setting=None`` (or 0) uses exact probabilities. Grid point
    ``t`` of probe ``k`` draws from RNG stream ``(seed, t, k)``.
    """
    thetas = np.asarray(theta_grid, dtype=float).reshape(-1)
    if thetas.size == 0:
        raise ValueError("theta_grid must be non-empty")
    if shots_per_setting == 0:
        shots_per_setting = None
    probes = experiment_probes()
    out = np.empty((len(probes), thetas.size))
    for t, theta in enumerate(thetas):
        for k, (_, rho, h) in enumerate(probes):
            rho_theta = evolve_unitary(rho, h, theta)
            rec = tomography(rho_theta, shots_per_setting, seed=(seed, t, k))
            out[k, t] = qfi_mixed(rec.reconstructed, h)
    return ExperimentReport(thetas, out[0], out[1], shots_per_setting, int(seed))
