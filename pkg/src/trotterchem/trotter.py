"""Product-formula evolution (first-order and symmetric) and its error bounds."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from trotterchem.fermion_map import (
    ReducedCoefficients,
    SpinHamiltonian,
    build_h2_spin_hamiltonian,
    partition_h2_terms,
)
from trotterchem.hilbert import DenseOperator, StateVector, apply_matrix, exact_evolve, fidelity

SCHEMES = ("regular", "symmetric")


@dataclass(frozen=True)
class TrotterPlan:
    """``steps`` slices of ``time``; each group is exponentiated exactly."""

    groups: tuple[SpinHamiltonian, ...]
    steps: int
    time: float
    scheme: str = "regular"

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(self.groups))
        if not self.groups:
            raise ValueError("a Trotter plan needs at least one group")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not np.isfinite(self.time):
            raise ValueError("time must be finite")
        if len({g.n_qubits for g in self.groups}) != 1:
            raise ValueError("all groups must act on the same number of qubits")
        seen: set[str] = set()
        for g in self.groups:
            strings = {t.axes for t in g.terms}
            if strings & seen:
                raise ValueError(f"groups overlap on {sorted(strings & seen)}")
            seen |= strings

    @classmethod
    def for_h2(
        cls, h: SpinHamiltonian | ReducedCoefficients, steps: int, time: float, scheme: str = "regular"
    ) -> TrotterPlan:
        if isinstance(h, ReducedCoefficients):
            h = build_h2_spin_hamiltonian(h)
        return cls(partition_h2_terms(h), steps, time, scheme)

    @cached_property
    def dense_groups(self) -> tuple[DenseOperator, ...]:
        return tuple(g.to_dense() for g in self.groups)

    @cached_property
    def hamiltonian(self) -> DenseOperator:
        total = self.dense_groups[0]
        for g in self.dense_groups[1:]:
            total = total + g
        return total

    @property
    def dt(self) -> float:
        return self.time / self.steps

    def step_unitary(self) -> np.ndarray:
        """One slice of length ``time / steps`` as a dense matrix."""
        dt = self.dt
        if self.scheme == "regular":
            sequence = [(g, dt) for g in self.dense_groups]
        else:
            *outer, last = self.dense_groups
            sequence = [(g, dt / 2) for g in outer] + [(last, dt)] + [(g, dt / 2) for g in reversed(outer)]
        u = np.eye(self.hamiltonian.register.total_dim, dtype=complex)
        for g, tau in sequence:
            u = g.propagator(tau) @ u
        return u

    def unitary(self) -> np.ndarray:
        return np.linalg.matrix_power(self.step_unitary(), self.steps)


def h2_time_for_phase(c: ReducedCoefficients, theta: float) -> float:
    """Evolution time at which ``|h11| t = theta``.

    The sign of ``h11`` is dropped: the H2 Hamiltonian is real, so for a real
    initial state the overlaps at ``t`` and ``-t`` are complex conjugates.
    """
    if c.h11 == 0:
        raise ValueError("h11 = 0; the simulated phase does not fix a time")
    return theta / abs(c.h11)


def trotter_evolve(plan: TrotterPlan, state: StateVector) -> StateVector:
    u = plan.step_unitary()
    for _ in range(plan.steps):
        state = apply_matrix(state, u)
    return state


def _commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def error_constant(plan: TrotterPlan) -> float:
    """Prefactor ``C`` of the digital error: bound = C t^2 / l (regular) or C t^3 / l^2 (symmetric).

    Regular: ``C = ||sum_{i>j} [H_i, H_j]|| / 2``.  Symmetric: the second-order
    nested-commutator constant, ``||[B,[B,A]]||/12 + ||[A,[A,B]]||/24`` applied
    to each group ``A`` against the sum ``B`` of the groups after it.
    """
    mats = [g.matrix for g in plan.dense_groups]
    if plan.scheme == "regular":
        total = np.zeros_like(mats[0])
        for i in range(len(mats)):
            for j in range(i):
                total += _commutator(mats[i], mats[j])
        return _norm(total) / 2
    const = 0.0
    for i in range(len(mats) - 1):
        a = mats[i]
        b = sum(mats[i + 1 :])
        const += _norm(_commutator(b, _commutator(b, a))) / 12
        const += _norm(_commutator(a, _commutator(a, b))) / 24
    return const


def digital_error_bound(plan: TrotterPlan) -> float:
    c = error_constant(plan)
    t, l = abs(plan.time), plan.steps
    if plan.scheme == "regular":
        return c * t**2 / l
    return c * t**3 / l**2


def empirical_digital_error(
    plan: TrotterPlan, state: StateVector, observable: str = "exact-fidelity"
) -> float:
    """``1 - F(exact, trotterized)`` or, with ``observable="bound"``, the commutator bound."""
    if observable == "bound":
        return digital_error_bound(plan)
    if observable != "exact-fidelity":
        raise ValueError(f"observable must be 'exact-fidelity' or 'bound', got {observable!r}")
    exact = exact_evolve(plan.hamiltonian, plan.time, state)
    return max(0.0, 1.0 - fidelity(exact, trotter_evolve(plan, state)))
