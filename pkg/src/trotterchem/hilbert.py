"""Dense state-vector engine over hybrid qubit / truncated-boson registers.

Conventions shared by every module in the package:

* The computational state ``|1>`` of a qubit means "orbital occupied" and is the
  +1 eigenstate of sigma^z, so ``(sigma^z + 1) / 2`` is the number operator.
  In the index basis (``|0>`` first) this gives ``Z = diag(-1, 1)``; ``X`` is
  the usual flip and ``Y`` is fixed by ``XY = iZ``.
* Basis indices are big-endian mixed radix: qubit 1 is the most significant
  factor, bosonic modes follow the qubits in declared order.
* All exponentials of Hermitian generators go through ``numpy.linalg.eigh``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Mapping, Sequence

import numpy as np

UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
IMAG_RESIDUE_TOL = 1e-8

PAULI: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "Z": np.array([[-1, 0], [0, 1]], dtype=complex),
}

#: sigma^+ maps |0> (empty) to |1> (occupied).
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)

for _m in PAULI.values():
    _m.setflags(write=False)
SIGMA_PLUS.setflags(write=False)


def annihilation(dim: int) -> np.ndarray:
    """Truncated bosonic lowering operator with ``<n|b|n+1> = sqrt(n+1)``."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def boson_matrix(op: str, dim: int) -> np.ndarray:
    b = annihilation(dim)
    if op == "b":
        return b
    if op == "bdag":
        return b.conj().T
    if op == "n":
        return np.diag(np.arange(dim, dtype=float)).astype(complex)
    if op == "x":
        return b + b.conj().T
    raise ValueError(f"unknown bosonic factor {op!r}; expected b, bdag, n or x")


@dataclass(frozen=True)
class HybridRegister:
    """Layout of ``n_qubits`` qubits followed by bosonic modes."""

    n_qubits: int
    mode_dims: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode_dims", tuple(int(d) for d in self.mode_dims))
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        if any(d < 1 for d in self.mode_dims):
            raise ValueError(f"every mode dimension must be >= 1, got {self.mode_dims}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * self.n_qubits + self.mode_dims

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def index(self, bits: str | Sequence[int], fock: Sequence[int] = ()) -> int:
        """Basis index of ``|bits> (x) |fock>``; ``bits`` is e.g. ``"1100"``."""
        digits = [int(b) for b in bits]
        fock = list(fock) or [0] * len(self.mode_dims)
        if len(digits) != self.n_qubits or len(fock) != len(self.mode_dims):
            raise ValueError("basis label does not match the register layout")
        return int(np.ravel_multi_index(tuple(digits + fock), self.dims))


@dataclass(frozen=True, eq=False)
class StateVector:
    register: HybridRegister
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.register.total_dim:
            raise ValueError(
                f"amplitude length {amps.shape[0]} != register dimension "
                f"{self.register.total_dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(
        cls, register: HybridRegister, bits: str | Sequence[int], fock: Sequence[int] = ()
    ) -> StateVector:
        amps = np.zeros(register.total_dim, dtype=complex)
        amps[register.index(bits, fock)] = 1.0
        return cls(register, amps)

    @classmethod
    def from_bits(cls, bits: str) -> StateVector:
        return cls.basis(HybridRegister(len(bits)), bits)

    @classmethod
    def normalized(cls, register: HybridRegister, amplitudes: np.ndarray) -> StateVector:
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(register, amps / np.linalg.norm(amps))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class DenseOperator:
    register: HybridRegister
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        dim = self.register.total_dim
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} != ({dim}, {dim})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        eye = np.eye(self.register.total_dim)
        return bool(np.max(np.abs(self.matrix.conj().T @ self.matrix - eye), initial=0.0) <= tol)

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.is_hermitian():
            raise ValueError("eigendecomposition requested for a non-Hermitian operator")
        # symmetrize away round-off below the Hermiticity tolerance
        return np.linalg.eigh((self.matrix + self.matrix.conj().T) / 2)

    def propagator(self, t: float) -> np.ndarray:
        """``exp(-i H t)`` as a dense matrix."""
        if t == 0:
            return np.eye(self.register.total_dim, dtype=complex)
        w, v = self.eigensystem
        return (v * np.exp(-1j * w * t)) @ v.conj().T

    def __add__(self, other: DenseOperator) -> DenseOperator:
        _check_same_register(self.register, other.register)
        return DenseOperator(self.register, self.matrix + other.matrix)

    def __sub__(self, other: DenseOperator) -> DenseOperator:
        _check_same_register(self.register, other.register)
        return DenseOperator(self.register, self.matrix - other.matrix)

    def scaled(self, factor: float) -> DenseOperator:
        return DenseOperator(self.register, factor * self.matrix)


@dataclass(frozen=True)
class PauliTerm:
    """Real-weighted Pauli string, e.g. ``PauliTerm(0.25, "XYYX")``."""

    coefficient: float
    axes: str

    def __post_init__(self) -> None:
        axes = self.axes.upper()
        if not axes or set(axes) - set("IXYZ"):
            raise ValueError(f"invalid Pauli string {self.axes!r}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    @property
    def is_identity(self) -> bool:
        return set(self.axes) == {"I"}

    def matrix(self) -> np.ndarray:
        return self.coefficient * reduce(np.kron, [PAULI[a] for a in self.axes])

    def to_op_term(self) -> OpTerm:
        return OpTerm(
            self.coefficient,
            paulis={q: a for q, a in enumerate(self.axes, start=1) if a != "I"},
        )


@dataclass(frozen=True)
class OpTerm:
    """One weighted product of Pauli factors (1-based qubits) and bosonic
    factors (0-based modes, each one of ``b``, ``bdag``, ``n``, ``x = b + bdag``).
    """

    coefficient: complex
    paulis: Mapping[int, str] = field(default_factory=dict)
    bosons: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not np.isfinite(self.coefficient):
            raise ValueError(f"non-finite coefficient {self.coefficient!r}")
        paulis = tuple(sorted((int(q), a.upper()) for q, a in dict(self.paulis).items()))
        bosons = tuple(sorted((int(m), op) for m, op in dict(self.bosons).items()))
        object.__setattr__(self, "paulis", paulis)
        object.__setattr__(self, "bosons", bosons)

    def factors(self, register: HybridRegister) -> list[np.ndarray]:
        mats = [PAULI["I"]] * register.n_qubits + [
            np.eye(d, dtype=complex) for d in register.mode_dims
        ]
        for q, axis in self.paulis:
            if not 1 <= q <= register.n_qubits:
                raise ValueError(f"term addresses qubit {q} outside 1..{register.n_qubits}")
            mats[q - 1] = PAULI[axis]
        for mode, op in self.bosons:
            if not 0 <= mode < len(register.mode_dims):
                raise ValueError(f"term addresses nonexistent mode {mode}")
            mats[register.n_qubits + mode] = boson_matrix(op, register.mode_dims[mode])
        return mats


def build_dense(terms: Sequence[OpTerm | PauliTerm], register: HybridRegister) -> DenseOperator:
    """Sum of dense tensor products; linear in the coefficients."""
    dim = register.total_dim
    out = np.zeros((dim, dim), dtype=complex)
    for term in terms:
        if isinstance(term, PauliTerm):
            if term.n_qubits != register.n_qubits:
                raise ValueError("Pauli string length does not match the register")
            term = term.to_op_term()
        mats = term.factors(register)
        out += term.coefficient * (reduce(np.kron, mats) if mats else np.ones((1, 1)))
    return DenseOperator(register, out)


def _check_same_register(a: HybridRegister, b: HybridRegister) -> None:
    if a != b:
        raise ValueError(f"register mismatch: {a} vs {b}")


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> None:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("expected a square matrix")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > tol:
        raise ValueError(f"matrix is not unitary (max deviation {err:.3e})")


def apply_gate(state: StateVector, targets: Sequence[int], u: np.ndarray) -> StateVector:
    """Apply ``u`` to the listed qubits (1-based, first target most significant)."""
    reg = state.register
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets {targets}")
    if any(not 1 <= t <= reg.n_qubits for t in targets):
        raise ValueError(f"targets {targets} outside qubits 1..{reg.n_qubits}")
    u = np.asarray(u, dtype=complex)
    k = len(targets)
    if u.shape != (2**k, 2**k):
        raise ValueError(f"gate of shape {u.shape} cannot act on {k} qubit(s)")
    check_unitary(u)

    axes = [t - 1 for t in targets]
    psi = state.amplitudes.reshape(reg.dims)
    psi = np.tensordot(u.reshape((2,) * (2 * k)), psi, axes=(list(range(k, 2 * k)), axes))
    psi = np.moveaxis(psi, list(range(k)), axes)
    return StateVector(reg, psi.reshape(-1))


def apply_matrix(state: StateVector, u: np.ndarray) -> StateVector:
    """Apply a full-register unitary matrix."""
    return StateVector(state.register, np.asarray(u) @ state.amplitudes)


def exact_evolve(h: DenseOperator, t: float, state: StateVector) -> StateVector:
    """``exp(-i H t) |state>`` through the eigendecomposition of ``H``."""
    if not np.isfinite(t):
        raise ValueError("evolution time must be finite")
    _check_same_register(h.register, state.register)
    if not h.is_hermitian():
        raise ValueError("exact_evolve requires a Hermitian operator")
    if t == 0:
        return state
    w, v = h.eigensystem
    return StateVector(state.register, v @ (np.exp(-1j * w * t) * (v.conj().T @ state.amplitudes)))


def expectation(state: StateVector, op: DenseOperator) -> float:
    _check_same_register(state.register, op.register)
    value = np.vdot(state.amplitudes, op.matrix @ state.amplitudes)
    if abs(value.imag) > IMAG_RESIDUE_TOL:
        raise ValueError(f"expectation has imaginary residue {value.imag:.3e}")
    return float(value.real)


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2``."""
    _check_same_register(a.register, b.register)
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))
