"""Digital and digital-analog simulation of small molecular models.

Qubits and orbitals are 1-indexed; bosonic modes are 0-indexed (mode 0 is the
fundamental cavity mode).
"""

from trotterchem.hilbert import (
    DenseOperator,
    HybridRegister,
    OpTerm,
    PauliTerm,
    StateVector,
    apply_gate,
    build_dense,
    exact_evolve,
    expectation,
    fidelity,
)

__all__ = [
    "DenseOperator",
    "HybridRegister",
    "OpTerm",
    "PauliTerm",
    "StateVector",
    "apply_gate",
    "build_dense",
    "exact_evolve",
    "expectation",
    "fidelity",
]

__version__ = "0.1.0"
