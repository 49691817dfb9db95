"""Probe states and seeded random-state generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    HermitianOperator,
    LinalgError,
    SpectralDecomposition,
    conjugate,
    eigh,
    unitary,
)

NORM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10


class StateError(ValueError):
    """Raised when a vector or matrix is not a valid quantum state."""


def rng_from(seed, *stream: int) -> np.random.Generator:
    """Generator for ``seed`` and an optional sub-stream index path.

    ``rng_from(7, 3)`` is the stream of trial 3 under top-level seed 7; it does
    not depend on how many other streams were drawn before it.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    path = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    return np.random.default_rng([*map(int, path), *map(int, stream)])


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if a.size == 0 or not np.all(np.isfinite(a)):
            raise StateError("amplitudes must be a non-empty finite vector")
        norm = float(np.vdot(a, a).real)
        if abs(norm - 1) > NORM_TOL:
            raise StateError(f"state is not normalized: <psi|psi> = {norm!r}")
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        a = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        return cls(a / np.linalg.norm(a))

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        a = np.zeros(dim, dtype=np.complex128)
        a[index] = 1
        return cls(a)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix together with its cached spectrum.

    Eigenvalues in ``[-PSD_TOL, 0)`` are floating-point debris: they are set to
    zero in ``spectrum`` and the raw minimum is kept in ``min_eigenvalue``.
    Anything more negative is rejected.
    """

    matrix: HermitianOperator
    trace_defect: float
    min_eigenvalue: float
    spectrum: SpectralDecomposition

    @classmethod
    def from_matrix(cls, a) -> "DensityMatrix":
        try:
            op = a if isinstance(a, HermitianOperator) else HermitianOperator.from_matrix(a)
        except LinalgError as exc:
            raise StateError(str(exc)) from exc
        trace = np.trace(op.matrix)
        trace_defect = float(abs(trace - 1))
        if trace_defect > TRACE_TOL:
            raise StateError(f"trace is {trace.real!r}, expected 1")
        spec = eigh(op)
        min_eig = float(spec.eigenvalues[0])
        if min_eig < -PSD_TOL:
            raise StateError(f"matrix is not positive semidefinite: eigenvalue {min_eig!r}")
        if min_eig < 0:
            p = np.clip(spec.eigenvalues, 0.0, None)
            p.flags.writeable = False
            spec = SpectralDecomposition(p, spec.eigenvectors)
        return cls(op, trace_defect, min_eig, spec)

    @property
    def array(self) -> np.ndarray:
        return self.matrix.matrix

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def purity(self) -> float:
        return float(np.sum(np.abs(self.array) ** 2))


def pure_to_density(psi: PureState) -> DensityMatrix:
    a = psi.amplitudes
    return DensityMatrix.from_matrix(np.outer(a, a.conj()))


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return pure_to_density(state)
    return DensityMatrix.from_matrix(state)


def evolve_unitary(rho: DensityMatrix, h, phi: float) -> DensityMatrix:
    """Apply ``U = exp(-i H phi)`` to ``rho`` and return ``U rho U^dagger``.

    ``h`` may be anything ``linalg.eigh`` accepts, a ``SpectralDecomposition``,
    or an object exposing one as ``.spectrum`` (``metrology.Hamiltonian``).
    """
    spec = getattr(h, "spectrum", h)
    if not isinstance(spec, SpectralDecomposition):
        spec = eigh(spec)
    if spec.eigenvectors.shape[0] != rho.dim:
        raise StateError(
            f"dimension mismatch: state is {rho.dim}, generator is {spec.eigenvectors.shape[0]}"
        )
    out = conjugate(rho.array, unitary(spec, phi))
    return DensityMatrix.from_matrix(out)


def random_haar_pure(dim: int, seed) -> PureState:
    """Haar-random pure state: a normalized standard complex Gaussian vector."""
    if dim < 2:
        raise StateError(f"dim must be >= 2, got {dim}")
    rng = rng_from(seed)
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(z / np.linalg.norm(z))


def random_mixed(dim: int, rank: int, seed) -> DensityMatrix:
    """Random density matrix ``G G^dagger / Tr(G G^dagger)`` from a dim x rank Ginibre ``G``."""
    if dim < 1 or not 1 <= rank <= dim:
        raise StateError(f"rank must lie in [1, {dim}], got {rank}")
    rng = rng_from(seed)
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return DensityMatrix.from_matrix(rho / np.trace(rho).real)


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix.from_matrix(np.eye(dim) / dim)
