"""Gate-level compilation of one H2 Trotter step onto a linear 4-qubit chip.

Every gate is ``exp(-i * angle * G)`` for a fixed Hermitian generator ``G``:

=========  ======================  ===========================================
kind       generator               role
=========  ======================  ===========================================
Z          sigma^z                 basis change, angle +/- pi/4
Y          sigma^y                 ZZ -> XX rebasing, angle +/- pi/4
R          sigma^z                 single-qubit part of the diagonal group
U_D        sigma^z                 rotation sandwiched between MS gates
ZZ         sigma^z sigma^z         two-qubit part of the diagonal group
XX         sigma^x sigma^x         rebased ZZ interaction
XXfixed    sigma^x sigma^x         angle +/- pi/4, from MS decomposition
MS         S_x^2 (4 qubits)        angle -/+ pi/8, i.e. exp(+/- i pi/8 S_x^2)
SWAP       (permutation)           routing
=========  ======================  ===========================================

Pipeline: ``compile_trotter_step`` (reference sequence) -> ``decompose_ms`` ->
``rebase_zz`` -> ``cancel_inverse_pairs`` -> ``route_linear``.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

from trotterchem.fermion_map import ReducedCoefficients, h2_term_weights
from trotterchem.hilbert import PAULI
from trotterchem.trotter import TrotterPlan, digital_error_bound, h2_time_for_phase

N_QUBITS = 4
PASS_TOL = 1e-8
ANGLE_TOL = 1e-12
#: logical qubit q sits on physical qubit DEFAULT_LAYOUT[q - 1]
DEFAULT_LAYOUT = (1, 2, 4, 3)

SINGLE_QUBIT_KINDS = frozenset({"Z", "Y", "R", "U_D"})
TWO_QUBIT_KINDS = frozenset({"ZZ", "XX", "XXfixed", "SWAP"})
KINDS = SINGLE_QUBIT_KINDS | TWO_QUBIT_KINDS | {"MS"}

_X, _Y, _Z = PAULI["X"], PAULI["Y"], PAULI["Z"]
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self) -> None:
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "angle", float(self.angle))
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        expected = 1 if self.kind in SINGLE_QUBIT_KINDS else 4 if self.kind == "MS" else 2
        if len(targets) != expected or len(set(targets)) != expected:
            raise ValueError(f"{self.kind} needs {expected} distinct targets, got {targets}")
        if not math.isfinite(self.angle):
            raise ValueError("gate angle must be finite")

    def inverse(self) -> Gate:
        if self.kind == "SWAP":
            return self
        return replace(self, angle=-self.angle)

    def is_inverse_of(self, other: Gate) -> bool:
        if self.kind != other.kind:
            return False
        if self.kind == "SWAP":
            return set(self.targets) == set(other.targets)
        same_support = self.targets == other.targets or (
            self.kind in ("ZZ", "XX", "XXfixed") and set(self.targets) == set(other.targets)
        )
        return same_support and abs(self.angle + other.angle) <= ANGLE_TOL

    def __str__(self) -> str:
        return f"{self.kind} {','.join(map(str, self.targets))} {self.angle:.17g}"


def _rotation(p: np.ndarray, angle: float) -> np.ndarray:
    # P^2 = I, so exp(-i a P) = cos a - i sin a P
    return math.cos(angle) * np.eye(p.shape[0]) - 1j * math.sin(angle) * p


def _ms_generator() -> np.ndarray:
    eye = PAULI["I"]
    sx = sum(
        reduce(np.kron, [_X if q == k else eye for q in range(N_QUBITS)]) for k in range(N_QUBITS)
    )
    return sx @ sx


_SX2 = _ms_generator()
_SX2_EIG = np.linalg.eigh(_SX2)


def gate_matrix(g: Gate) -> np.ndarray:
    """Dense matrix on ``g.targets`` (first target most significant)."""
    if g.kind in ("Z", "R", "U_D"):
        return _rotation(_Z, g.angle)
    if g.kind == "Y":
        return _rotation(_Y, g.angle)
    if g.kind == "ZZ":
        return _rotation(np.kron(_Z, _Z), g.angle)
    if g.kind in ("XX", "XXfixed"):
        return _rotation(np.kron(_X, _X), g.angle)
    if g.kind == "SWAP":
        return _SWAP.copy()
    if g.kind == "MS":
        w, v = _SX2_EIG
        return (v * np.exp(-1j * g.angle * w)) @ v.conj().T
    raise ValueError(f"unknown gate kind {g.kind!r}")


def embed(g: Gate, n: int = N_QUBITS) -> np.ndarray:
    """Full ``2^n`` matrix of a gate."""
    u = gate_matrix(g)
    k = len(g.targets)
    rest = [q for q in range(1, n + 1) if q not in g.targets]
    full = np.kron(u, np.eye(2 ** (n - k)))
    # full acts on (targets..., rest...); permute tensor axes back to 1..n
    order = list(g.targets) + rest
    perm = [order.index(q) for q in range(1, n + 1)]
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(perm + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list. ``routed`` marks targets as physical positions."""

    gates: tuple[Gate, ...] = ()
    n_qubits: int = N_QUBITS
    layout: tuple[int, ...] = DEFAULT_LAYOUT
    routed: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "layout", tuple(self.layout))
        if sorted(self.layout) != list(range(1, self.n_qubits + 1)):
            raise ValueError(f"layout {self.layout} is not a permutation of 1..{self.n_qubits}")
        for g in self.gates:
            if any(not 1 <= t <= self.n_qubits for t in g.targets):
                raise ValueError(f"gate {g} addresses a qubit outside 1..{self.n_qubits}")

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: Circuit) -> Circuit:
        return replace(self, gates=self.gates + other.gates)

    def with_gates(self, gates: Iterable[Gate]) -> Circuit:
        return replace(self, gates=tuple(gates))

    def unitary(self) -> np.ndarray:
        u = np.eye(2**self.n_qubits, dtype=complex)
        for g in self.gates:
            u = embed(g, self.n_qubits) @ u
        return u

    def logical_unitary(self) -> np.ndarray:
        """Unitary expressed on logical qubits (undoes the layout for routed circuits)."""
        u = self.unitary()
        if not self.routed:
            return u
        p = permutation_matrix(self.layout)
        return p.conj().T @ u @ p

    def to_text(self) -> str:
        return "".join(f"{g}\n" for g in self.gates)

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "layout": list(self.layout),
            "routed": self.routed,
            "gates": [{"kind": g.kind, "targets": list(g.targets), "angle": g.angle} for g in self.gates],
            "counts": count_gates(self).as_dict(),
        }

    @classmethod
    def from_text(cls, text: str, **kwargs) -> Circuit:
        gates = []
        for line in text.splitlines():
            if line.strip():
                kind, targets, angle = line.split()
                gates.append(Gate(kind, tuple(int(t) for t in targets.split(",")), float(angle)))
        return cls(tuple(gates), **kwargs)


def permutation_matrix(layout: Sequence[int]) -> np.ndarray:
    """Maps a logical basis state to the physical one: logical q -> physical layout[q-1]."""
    n = len(layout)
    dim = 2**n
    p = np.zeros((dim, dim))
    for idx in range(dim):
        bits = format(idx, f"0{n}b")
        phys = ["0"] * n
        for q, b in enumerate(bits):
            phys[layout[q] - 1] = b
        p[int("".join(phys), 2), idx] = 1
    return p


def align_phase(u: np.ndarray) -> np.ndarray:
    """Divide out the phase of the largest-magnitude element."""
    flat = u.reshape(-1)
    k = int(np.argmax(np.abs(flat)))
    return u * (abs(flat[k]) / flat[k])


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max-norm distance after global-phase alignment.

    ``b`` is aligned with the phase taken from ``a``'s largest element, so the
    two matrices share a reference entry.
    """
    flat_a = a.reshape(-1)
    k = int(np.argmax(np.abs(flat_a)))
    pa = flat_a[k] / abs(flat_a[k])
    fb = b.reshape(-1)[k]
    pb = fb / abs(fb) if abs(fb) > 0 else 1.0
    return float(np.max(np.abs(a / pa - b / pb)))


# --- phase tables -------------------------------------------------------------


def single_qubit_phases(c: ReducedCoefficients) -> tuple[float, float, float, float]:
    """Weights of sigma^z_j in the Hamiltonian (the printed phases phi_j divided by 8)."""
    return tuple(h2_term_weights(c)[:4])


ZZ_PAIRS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))


def zz_phases(c: ReducedCoefficients) -> dict[tuple[int, int], float]:
    """Weights of sigma^z_i sigma^z_j (the printed theta_ij divided by 8)."""
    return dict(zip(ZZ_PAIRS, h2_term_weights(c)[4:10]))


# four-body term -> (qubit carrying U_D, qubit carrying the Z basis change, sign)
# exp(-i a P) = Z_k(pi/4) MS^dag U_j(a) MS Z_k(-pi/4) (time order: Z~, MS, U, MS~, Z)
FOUR_BODY_BLOCKS = (
    ("XYYX", 2, 3, +1),
    ("XXYY", 4, 3, -1),
    ("YXXY", 4, 1, +1),
    ("YYXX", 2, 1, -1),
)

MS_ANGLE = -math.pi / 8  # MS = exp(+i pi/8 S_x^2)
QUARTER = math.pi / 4


def diagonal_section(c: ReducedCoefficients, tau: float) -> list[Gate]:
    gates = [Gate("R", (j,), phi * tau) for j, phi in enumerate(single_qubit_phases(c), start=1)]
    gates += [Gate("ZZ", pair, theta * tau) for pair, theta in zz_phases(c).items()]
    return gates


def four_body_section(c: ReducedCoefficients, tau: float) -> list[Gate]:
    alpha = c.hD / 4 * tau
    all_qubits = tuple(range(1, N_QUBITS + 1))
    gates: list[Gate] = []
    for _, j, k, sign in FOUR_BODY_BLOCKS:
        gates += [
            Gate("Z", (k,), -QUARTER),
            Gate("MS", all_qubits, MS_ANGLE),
            Gate("U_D", (j,), sign * alpha),
            Gate("MS", all_qubits, -MS_ANGLE),
            Gate("Z", (k,), QUARTER),
        ]
    return gates


def compile_trotter_step(c: ReducedCoefficients, tau: float) -> Circuit:
    """Reference sequence for ``exp(-i H_4body tau) exp(-i H_diag tau)``."""
    return Circuit(tuple(diagonal_section(c, tau) + four_body_section(c, tau)))


def compile_symmetric_step(c: ReducedCoefficients, tau: float) -> Circuit:
    """Reference sequence for ``exp(-i H_diag tau/2) exp(-i H_4body tau) exp(-i H_diag tau/2)``."""
    half = diagonal_section(c, tau / 2)
    return Circuit(tuple(half + four_body_section(c, tau) + half))


# --- passes -------------------------------------------------------------------


def decompose_ms(circ: Circuit) -> Circuit:
    """MS(a) -> product of exp(-2ia X_i X_j) over all pairs (global phase dropped)."""
    out: list[Gate] = []
    for g in circ.gates:
        if g.kind != "MS":
            out.append(g)
            continue
        for pair in itertools.combinations(g.targets, 2):
            out.append(Gate("XXfixed", pair, 2 * g.angle))
    return circ.with_gates(out)


def rebase_zz(circ: Circuit) -> Circuit:
    """ZZ(a) on (i, j) -> Y_i Y_j, XX(a), Y~_i Y~_j."""
    out: list[Gate] = []
    for g in circ.gates:
        if g.kind != "ZZ":
            out.append(g)
            continue
        i, j = g.targets
        out += [Gate("Y", (i,), QUARTER), Gate("Y", (j,), QUARTER)]
        out.append(Gate("XX", g.targets, g.angle))
        out += [Gate("Y", (i,), -QUARTER), Gate("Y", (j,), -QUARTER)]
    return circ.with_gates(out)


_DIAGONAL_KINDS = frozenset({"Z", "R", "U_D", "ZZ"})
_X_KINDS = frozenset({"XX", "XXfixed"})


@lru_cache(maxsize=4096)
def _commute(a: Gate, b: Gate) -> bool:
    if not set(a.targets) & set(b.targets):
        return True
    for family in (_DIAGONAL_KINDS, _X_KINDS):
        if a.kind in family and b.kind in family:
            return True
    support = sorted(set(a.targets) | set(b.targets))
    n = len(support)
    local = {q: i + 1 for i, q in enumerate(support)}
    ma = embed(replace(a, targets=tuple(local[t] for t in a.targets)), n)
    mb = embed(replace(b, targets=tuple(local[t] for t in b.targets)), n)
    return bool(np.max(np.abs(ma @ mb - mb @ ma)) <= ANGLE_TOL)


def cancel_inverse_pairs(circ: Circuit) -> Circuit:
    """Delete gate / inverse pairs separated only by gates that commute with them.

    Repeats until no pair is found.
    """
    gates = list(circ.gates)
    changed = True
    while changed:
        changed = False
        for i, g in enumerate(gates):
            for j in range(i + 1, len(gates)):
                h = gates[j]
                if h.is_inverse_of(g):
                    del gates[j]
                    del gates[i]
                    changed = True
                    break
                if not _commute(g, h):
                    break
            if changed:
                break
    return circ.with_gates(gates)


def rebase_and_cancel(circ: Circuit) -> Circuit:
    return cancel_inverse_pairs(rebase_zz(circ))


def route_linear(circ: Circuit) -> Circuit:
    """Place on the line 1-2-3-4 through ``circ.layout``.

    A gate whose physical qubits p < q are not neighbours gets the qubit at q
    walked down to p + 1 with SWAPs, which are undone right after the gate.
    """
    if circ.routed:
        return circ
    phys = {q: circ.layout[q - 1] for q in range(1, circ.n_qubits + 1)}
    out: list[Gate] = []
    for g in circ.gates:
        if g.kind == "MS":
            raise ValueError("decompose MS gates before routing")
        targets = tuple(phys[t] for t in g.targets)
        if len(targets) == 1 or abs(targets[0] - targets[1]) == 1:
            out.append(replace(g, targets=targets))
            continue
        lo, hi = sorted(targets)
        swaps = [Gate("SWAP", (p - 1, p)) for p in range(hi, lo + 1, -1)]
        moved = tuple(lo + 1 if t == hi else t for t in targets)
        out += swaps + [replace(g, targets=moved)] + swaps[::-1]
    return replace(circ, gates=tuple(out), routed=True)


def adjacency_violations(circ: Circuit) -> list[Gate]:
    return [g for g in circ.gates if len(g.targets) >= 2 and not (
        len(g.targets) == 2 and abs(g.targets[0] - g.targets[1]) == 1
    )]


STAGES = ("a", "b", "c", "d", "routed")


def compile_stages(c: ReducedCoefficients, tau: float, scheme: str = "regular") -> dict[str, Circuit]:
    """All intermediate circuits of the pipeline keyed by stage label.

    a: reference with MS gates; b: MS decomposed; c: ZZ rebased to XX;
    d: inverse pairs cancelled; routed: nearest-neighbour placement of d.
    """
    if scheme == "regular":
        a = compile_trotter_step(c, tau)
    elif scheme == "symmetric":
        a = compile_symmetric_step(c, tau)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    b = decompose_ms(a)
    c_ = rebase_zz(b)
    d = cancel_inverse_pairs(c_)
    return {"a": a, "b": b, "c": c_, "d": d, "routed": route_linear(d)}


def compile_optimized_step(c: ReducedCoefficients, tau: float, scheme: str = "regular") -> Circuit:
    return compile_stages(c, tau, scheme)["routed"]


# --- counting and error budget --------------------------------------------------


@dataclass(frozen=True)
class GateCounts:
    xx_two_qubit: int = 0
    swap: int = 0
    single_qubit: int = 0
    ms_multiqubit: int = 0
    zz_two_qubit: int = 0
    by_kind: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        for name in ("xx_two_qubit", "swap", "single_qubit", "ms_multiqubit", "zz_two_qubit"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def two_qubit(self) -> int:
        """Gates charged with the two-qubit error: XX-type, ZZ and SWAP."""
        return self.xx_two_qubit + self.zz_two_qubit + self.swap

    def as_dict(self) -> dict:
        return {
            "xx": self.xx_two_qubit,
            "swap": self.swap,
            "single": self.single_qubit,
            "ms": self.ms_multiqubit,
            "zz": self.zz_two_qubit,
            "by_kind": dict(sorted(self.by_kind.items())),
        }


def count_gates(circ: Circuit) -> GateCounts:
    kinds = Counter(g.kind for g in circ.gates)
    return GateCounts(
        xx_two_qubit=kinds["XX"] + kinds["XXfixed"],
        swap=kinds["SWAP"],
        single_qubit=sum(kinds[k] for k in SINGLE_QUBIT_KINDS),
        ms_multiqubit=kinds["MS"],
        zz_two_qubit=kinds["ZZ"],
        by_kind=dict(kinds),
    )


def total_upper_bound(digital: float, counts: GateCounts, steps: int, eps_2q: float) -> float:
    """Digital error plus ``eps_2q`` per two-qubit gate over ``steps`` slices."""
    if not 0.0 <= eps_2q <= 1.0:
        raise ValueError(f"eps_2q must lie in [0, 1], got {eps_2q}")
    return digital + steps * counts.two_qubit * eps_2q


@dataclass(frozen=True)
class ErrorBudget:
    eps_2q: float
    counts: GateCounts
    steps: int
    digital: float

    @property
    def experimental(self) -> float:
        return self.steps * self.counts.two_qubit * self.eps_2q

    @property
    def total(self) -> float:
        return total_upper_bound(self.digital, self.counts, self.steps, self.eps_2q)


def solve_crossing(
    d_reg: float, d_sym: float, n_reg: int, n_sym: int, steps: int
) -> float | None:
    """Gate error at which the two linear budgets meet, if positive.

    ``n_reg`` / ``n_sym`` are two-qubit gates per step.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    slope = steps * (n_sym - n_reg)
    if slope == 0:
        return None
    eps = (d_reg - d_sym) / slope
    return eps if eps > 0 else None


def find_crossing(steps: int, theta: float, c: ReducedCoefficients) -> float | None:
    """Crossing of the symmetric and regular total bounds for the H2 step."""
    t = h2_time_for_phase(c, theta)
    tau = t / steps
    d = {s: digital_error_bound(TrotterPlan.for_h2(c, steps, t, s)) for s in ("regular", "symmetric")}
    n = {s: count_gates(compile_optimized_step(c, tau, s)).two_qubit for s in ("regular", "symmetric")}
    return solve_crossing(d["regular"], d["symmetric"], n["regular"], n["symmetric"], steps)


def dumps_circuit_json(circ: Circuit) -> str:
    return json.dumps(circ.to_json(), indent=2) + "\n"
