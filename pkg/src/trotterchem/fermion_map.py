"""Jordan-Wigner encoding of second-quantized electronic Hamiltonians.

Pauli strings are plain ``str`` values over ``IXYZ`` (qubit 1 first); a
weighted string is a ``(complex weight, str)`` pair.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from trotterchem.hilbert import HERMITIAN_TOL, DenseOperator, HybridRegister, PauliTerm, build_dense

WeightedString = tuple[complex, str]

DROP_TOL = 1e-12
COMPLEX_RESIDUE_TOL = 1e-10
CLASS_AGREEMENT_TOL = 1e-10

# single-qubit products: (a, b) -> (phase, a*b)
_PAULI_PRODUCT: dict[tuple[str, str], tuple[complex, str]] = {}
for _a in "IXYZ":
    _PAULI_PRODUCT[("I", _a)] = (1, _a)
    _PAULI_PRODUCT[(_a, "I")] = (1, _a)
    _PAULI_PRODUCT[(_a, _a)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PAULI_PRODUCT[(_a, _b)] = (1j, _c)
    _PAULI_PRODUCT[(_b, _a)] = (-1j, _c)


class CoefficientClassError(ValueError):
    """Members of one integral symmetry class disagree."""

    def __init__(self, name: str, spread: float, members: Mapping[tuple[int, ...], float]):
        self.name = name
        self.spread = spread
        self.members = dict(members)
        listing = ", ".join(f"h{''.join(map(str, k))}={v:.12g}" for k, v in self.members.items())
        super().__init__(f"class {name} members disagree (spread {spread:.3e}): {listing}")


def pauli_multiply(a: WeightedString, b: WeightedString) -> WeightedString:
    wa, sa = a
    wb, sb = b
    if len(sa) != len(sb):
        raise ValueError(f"Pauli strings of different length: {sa!r}, {sb!r}")
    weight = complex(wa) * complex(wb)
    out = []
    for x, y in zip(sa, sb):
        phase, p = _PAULI_PRODUCT[(x, y)]
        weight *= phase
        out.append(p)
    return weight, "".join(out)


def jw_ladder(i: int, n: int, kind: str) -> tuple[WeightedString, WeightedString]:
    """Ladder operator of orbital ``i`` (1-based) as ``(1/2)(s_X) +/- (i/2)(s_Y)``.

    ``c_i^dag = Z_1 ... Z_{i-1} sigma^+_i`` with ``sigma^+ = (X + iY)/2``.
    """
    if not 1 <= i <= n:
        raise ValueError(f"orbital index {i} outside 1..{n}")
    if kind not in ("creation", "annihilation"):
        raise ValueError(f"kind must be 'creation' or 'annihilation', got {kind!r}")
    head = "Z" * (i - 1)
    tail = "I" * (n - i)
    sign = 1 if kind == "creation" else -1
    return (0.5, head + "X" + tail), (sign * 0.5j, head + "Y" + tail)


@dataclass(frozen=True)
class ElectronicIntegrals:
    """``h_ij`` and ``h_ijkl`` keyed by 1-based index tuples.

    The two-body term is read literally as ``(1/2) h_ijkl c_i^dag c_j^dag c_k c_l``.
    """

    n_orbitals: int
    one_body: Mapping[tuple[int, int], float] = field(default_factory=dict)
    two_body: Mapping[tuple[int, int, int, int], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        one = {tuple(int(x) for x in k): float(v) for k, v in dict(self.one_body).items()}
        two = {tuple(int(x) for x in k): float(v) for k, v in dict(self.two_body).items()}
        for key in itertools.chain(one, two):
            if any(not 1 <= x <= self.n_orbitals for x in key):
                raise ValueError(f"index {key} outside 1..{self.n_orbitals}")
        for key, v in itertools.chain(one.items(), two.items()):
            if not math.isfinite(v):
                raise ValueError(f"non-finite integral at {key}")
        object.__setattr__(self, "one_body", one)
        object.__setattr__(self, "two_body", two)

    def check_hermitian(self, tol: float = HERMITIAN_TOL) -> None:
        """Raise unless the operator sum is Hermitian.

        ``c_i^dag c_j^dag c_k c_l`` equals ``c_j^dag c_i^dag c_l c_k``, so two-body
        entries are pooled on that equivalence before comparing each pool with
        its adjoint ``(l, k, j, i)``.
        """
        for (i, j), v in self.one_body.items():
            w = self.one_body.get((j, i), 0.0)
            if abs(v - w) > tol:
                raise ValueError(f"h{i}{j} = {v} but h{j}{i} = {w}")

        def canon(key):
            i, j, k, l = key
            return min(key, (j, i, l, k))

        pooled: dict[tuple[int, ...], float] = {}
        for key, v in self.two_body.items():
            pooled[canon(key)] = pooled.get(canon(key), 0.0) + v
        for key, v in pooled.items():
            i, j, k, l = key
            w = pooled.get(canon((l, k, j, i)), 0.0)
            if abs(v - w) > tol:
                raise ValueError(f"two-body term {key} is not matched by its adjoint ({v} vs {w})")


@dataclass(frozen=True)
class ReducedCoefficients:
    """Diagonal one-body terms plus the four two-body classes of H2."""

    h11: float
    h22: float
    h33: float
    h44: float
    hA: float
    hB: float
    hC: float
    hD: float

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, v)

    @classmethod
    def zeros(cls) -> ReducedCoefficients:
        return cls(0, 0, 0, 0, 0, 0, 0, 0)

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 1.0) -> ReducedCoefficients:
        return cls(*rng.uniform(-scale, scale, size=8))

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    def to_integrals(self) -> ElectronicIntegrals:
        """The minimal integral set whose class read-off reproduces these values."""
        one = {(1, 1): self.h11, (2, 2): self.h22, (3, 3): self.h33, (4, 4): self.h44}
        two = {}
        for name, members in H2_CLASSES.items():
            for key in members:
                two[key] = getattr(self, name)
        return ElectronicIntegrals(4, one, two)


def _idx(*labels: str) -> tuple[tuple[int, int, int, int], ...]:
    return tuple(tuple(int(c) for c in s) for s in labels)


H2_CLASSES: dict[str, tuple[tuple[int, int, int, int], ...]] = {
    "hA": _idx("1221", "2112"),
    "hB": _idx("3443", "4334"),
    "hC": _idx("1331", "3113", "1441", "4114", "2332", "3223", "2442", "4224"),
    "hD": _idx("1243", "2134", "1423", "4132", "2314", "3241", "3421", "4312", "1313", "2424"),
}


@dataclass(frozen=True)
class SpinHamiltonian:
    """Ordered Pauli terms plus the identity component kept aside."""

    n_qubits: int
    terms: tuple[PauliTerm, ...] = ()
    scalar_offset: float = 0.0

    def __post_init__(self) -> None:
        terms = tuple(self.terms)
        for t in terms:
            if t.n_qubits != self.n_qubits:
                raise ValueError(f"term {t.axes!r} does not act on {self.n_qubits} qubits")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def register(self) -> HybridRegister:
        return HybridRegister(self.n_qubits)

    def coefficients(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for t in self.terms:
            out[t.axes] = out.get(t.axes, 0.0) + t.coefficient
        return out

    def to_dense(self, with_offset: bool = False) -> DenseOperator:
        op = build_dense(self.terms, self.register)
        if with_offset and self.scalar_offset:
            return DenseOperator(op.register, op.matrix + self.scalar_offset * np.eye(2**self.n_qubits))
        return op

    def subset(self, indices: Iterable[int]) -> SpinHamiltonian:
        return SpinHamiltonian(self.n_qubits, tuple(self.terms[i] for i in indices))


def _expand(factors: Sequence[tuple[WeightedString, WeightedString]], n: int):
    for choice in itertools.product(*factors):
        acc: WeightedString = (1.0, "I" * n)
        for ws in choice:
            acc = pauli_multiply(acc, ws)
        yield acc


def map_electronic_to_spin(ints: ElectronicIntegrals) -> SpinHamiltonian:
    """Jordan-Wigner image of ``sum h_ij c_i^dag c_j + 1/2 sum h_ijkl c_i^dag c_j^dag c_k c_l``."""
    ints.check_hermitian()
    n = ints.n_orbitals
    cdag = {i: jw_ladder(i, n, "creation") for i in range(1, n + 1)}
    c = {i: jw_ladder(i, n, "annihilation") for i in range(1, n + 1)}

    collected: dict[str, complex] = {}

    def add(weight: float, factors):
        for w, s in _expand(factors, n):
            collected[s] = collected.get(s, 0.0) + weight * w

    for (i, j), h in sorted(ints.one_body.items()):
        if h:
            add(h, [cdag[i], c[j]])
    for (i, j, k, l), h in sorted(ints.two_body.items()):
        if h:
            add(0.5 * h, [cdag[i], cdag[j], c[k], c[l]])

    identity = "I" * n
    offset = 0.0
    terms = []
    for s, w in collected.items():
        if abs(w.imag) > COMPLEX_RESIDUE_TOL:
            raise ValueError(f"complex residue {w.imag:.3e} on string {s}")
        if s == identity:
            offset = w.real
        elif abs(w) >= DROP_TOL:
            terms.append(PauliTerm(w.real, s))
    return SpinHamiltonian(n, tuple(terms), offset)


def derive_reduced_coeffs(ints: ElectronicIntegrals) -> ReducedCoefficients:
    if ints.n_orbitals != 4:
        raise ValueError(f"H2 reduction needs 4 spin orbitals, got {ints.n_orbitals}")
    values: dict[str, float] = {}
    for i in range(1, 5):
        if (i, i) not in ints.one_body:
            raise ValueError(f"missing one-body entry h{i}{i}")
        values[f"h{i}{i}"] = ints.one_body[(i, i)]
    for name, members in H2_CLASSES.items():
        missing = [m for m in members if m not in ints.two_body]
        if missing:
            raise ValueError(
                f"class {name} is missing " + ", ".join("h" + "".join(map(str, m)) for m in missing)
            )
        vals = {m: ints.two_body[m] for m in members}
        spread = max(vals.values()) - min(vals.values())
        scale = max(1.0, max(abs(v) for v in vals.values()))
        if spread > CLASS_AGREEMENT_TOL * scale:
            raise CoefficientClassError(name, spread, vals)
        values[name] = vals[members[0]]
    return ReducedCoefficients(**values)


H2_TERM_STRINGS: tuple[str, ...] = (
    "ZIII", "IZII", "IIZI", "IIIZ",
    "ZZII", "ZIZI", "ZIIZ", "IZZI", "IZIZ", "IIZZ",
    "XYYX", "YXXY", "XXYY", "YYXX",
)  # fmt: skip


def h2_term_weights(c: ReducedCoefficients) -> tuple[float, ...]:
    """Weights of the 14 H2 terms, in ``H2_TERM_STRINGS`` order."""
    common_a = 2 * c.hA + 4 * c.hC - c.hD
    common_b = 2 * c.hB + 4 * c.hC - c.hD
    return (
        (4 * c.h11 + common_a) / 8,
        (4 * c.h22 + common_a) / 8,
        (4 * c.h33 + common_b) / 8,
        (4 * c.h44 + common_b) / 8,
        2 * c.hA / 8,
        (2 * c.hC - c.hD) / 8,
        2 * c.hC / 8,
        2 * c.hC / 8,
        (2 * c.hC - c.hD) / 8,
        2 * c.hB / 8,
        c.hD / 4,
        c.hD / 4,
        -c.hD / 4,
        -c.hD / 4,
    )


def build_h2_spin_hamiltonian(c: ReducedCoefficients) -> SpinHamiltonian:
    """The closed-form 4-qubit H2 Hamiltonian; exactly-zero weights are omitted."""
    terms = tuple(
        PauliTerm(w, s) for s, w in zip(H2_TERM_STRINGS, h2_term_weights(c)) if w != 0.0
    )
    return SpinHamiltonian(4, terms)


def partition_h2_terms(h: SpinHamiltonian) -> tuple[SpinHamiltonian, SpinHamiltonian]:
    """Split into the diagonal group (Z-type terms) and the four-body group."""
    diag = [i for i, t in enumerate(h.terms) if set(t.axes) <= {"I", "Z"}]
    rest = [i for i, t in enumerate(h.terms) if i not in diag]
    groups = (h.subset(diag), h.subset(rest))
    for g in groups:
        mats = [t.matrix() for t in g.terms]
        for a, b in itertools.combinations(mats, 2):
            if np.max(np.abs(a @ b - b @ a)) > HERMITIAN_TOL:
                raise ValueError("terms inside a partition group do not commute")
    return groups


# --- model files -------------------------------------------------------------


def integrals_from_dict(doc: Mapping) -> ElectronicIntegrals:
    n = int(doc["n_orbitals"])
    one = {(int(i), int(j)): float(v) for i, j, v in doc.get("one_body", [])}
    two = {(int(i), int(j), int(k), int(l)): float(v) for i, j, k, l, v in doc.get("two_body", [])}
    return ElectronicIntegrals(n, one, two)


def integrals_to_dict(ints: ElectronicIntegrals) -> dict:
    return {
        "n_orbitals": ints.n_orbitals,
        "one_body": [[i, j, v] for (i, j), v in sorted(ints.one_body.items())],
        "two_body": [[*k, v] for k, v in sorted(ints.two_body.items())],
    }


def coefficients_from_dict(doc: Mapping) -> ReducedCoefficients:
    """Read a model document: either ``reduced`` or a full integral listing."""
    if "reduced" in doc:
        red = doc["reduced"]
        missing = [k for k in ReducedCoefficients.__dataclass_fields__ if k not in red]
        if missing:
            raise KeyError(f"reduced: missing {', '.join(missing)}")
        return ReducedCoefficients(**{k: red[k] for k in ReducedCoefficients.__dataclass_fields__})
    return derive_reduced_coeffs(integrals_from_dict(doc))


def load_model(path: str | Path) -> tuple[ReducedCoefficients, ElectronicIntegrals | None]:
    doc = json.loads(Path(path).read_text())
    ints = integrals_from_dict(doc) if "two_body" in doc else None
    return coefficients_from_dict(doc), ints
