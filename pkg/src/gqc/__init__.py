"""Quantum Fisher information and general quantum coherence (GQC) numerics."""

from .linalg import HermitianOperator, SpectralDecomposition, eigh, kron
from .metrology import (
    GqcReport,
    Hamiltonian,
    gqc_mixed,
    gqc_pure,
    gqc_pure_alt,
    l1_coherence,
    qfi_mixed,
    qfi_pure,
    sld_qfi,
    verify_identity,
)
from .states import (
    DensityMatrix,
    PureState,
    evolve_unitary,
    pure_to_density,
    random_haar_pure,
    random_mixed,
)

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "GqcReport",
    "Hamiltonian",
    "HermitianOperator",
    "PureState",
    "SpectralDecomposition",
    "eigh",
    "evolve_unitary",
    "gqc_mixed",
    "gqc_pure",
    "gqc_pure_alt",
    "kron",
    "l1_coherence",
    "pure_to_density",
    "qfi_mixed",
    "qfi_pure",
    "random_haar_pure",
    "random_mixed",
    "sld_qfi",
    "verify_identity",
]
