"""Dense complex linear algebra shared by the rest of the package.

Matrices are plain ``numpy`` arrays. The two wrapper types here exist only to
carry validation results (hermiticity defect, spectral ordering) alongside the
array, and they freeze their arrays so they can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITICITY_RTOL = 1e-10
DEGENERACY_TOL = 1e-10


class LinalgError(ValueError):
    """Raised for malformed matrices: wrong shape, non-finite or non-Hermitian."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.flags.writeable = False
    return a


def as_complex_matrix(a, *, square: bool = False) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise LinalgError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise LinalgError("matrix has non-finite entries")
    return m


def max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclass(frozen=True)
class HermitianOperator:
    """A square matrix checked to be Hermitian up to a relative tolerance."""

    matrix: np.ndarray
    hermiticity_defect: float

    @classmethod
    def from_matrix(cls, a) -> "HermitianOperator":
        m = as_complex_matrix(a, square=True)
        defect = max_abs(m - m.conj().T)
        scale = max_abs(m)
        if defect > HERMITICITY_RTOL * scale:
            raise LinalgError(
                f"matrix is not Hermitian: defect {defect:.3e} vs scale {scale:.3e}"
            )
        # Store the exactly Hermitian part so downstream eigh sees a clean input.
        return cls(_frozen((m + m.conj().T) / 2), defect)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues with orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _hermitian(a) -> HermitianOperator:
    if isinstance(a, HermitianOperator):
        return a
    return HermitianOperator.from_matrix(a)


def eigh(a) -> SpectralDecomposition:
    """Hermitian eigendecomposition with a reproducible eigenvector convention.

    Every eigenvector is phase-fixed so that its largest-magnitude component
    (lowest index on ties) is real and positive. Inside a cluster of
    eigenvalues closer than ``DEGENERACY_TOL`` (relative to the largest entry
    of ``a``) the vectors are ordered by the index of that component.
    """
    op = _hermitian(a)
    w, v = np.linalg.eigh(op.matrix)
    v = np.array(v)

    lead = np.argmax(np.abs(v) > np.abs(v).max(axis=0) * (1 - 1e-12), axis=0)
    phases = v[lead, np.arange(v.shape[1])]
    v = v * (np.abs(phases) / phases)

    scale = max(max_abs(op.matrix), np.finfo(float).tiny)
    order = np.arange(len(w))
    start = 0
    for stop in range(1, len(w) + 1):
        if stop == len(w) or w[stop] - w[stop - 1] >= DEGENERACY_TOL * scale:
            if stop - start > 1:
                cluster = order[start:stop]
                order[start:stop] = cluster[np.argsort(lead[cluster], kind="stable")]
            start = stop
    w = w[order]
    v = v[:, order]

    w_frozen = np.array(w, dtype=float)
    w_frozen.flags.writeable = False
    return SpectralDecomposition(w_frozen, _frozen(v))


def kron(a, b) -> np.ndarray:
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def unitary(h, phi: float) -> np.ndarray:
    """``exp(-i H phi)`` computed from the spectrum of ``H``."""
    spec = h if isinstance(h, SpectralDecomposition) else eigh(h)
    v = spec.eigenvectors
    return (v * np.exp(-1j * spec.eigenvalues * phi)) @ v.conj().T


def conjugate(a: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Return ``U A U^dagger``."""
    return u @ a @ u.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a Ginibre matrix with the diagonal phase fix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
