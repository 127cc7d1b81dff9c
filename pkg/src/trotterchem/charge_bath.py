"""Three-site charge transfer coupled to a truncated multimode cavity.

Sites are encoded in qubits 1..3 (occupied = ``|1>``); cavity modes follow.
The digital-analog schedule alternates exact qubit-only blocks with analog
blocks in which one qubit at a time is coupled to the cavity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from trotterchem.fermion_map import jw_ladder
from trotterchem.hilbert import (
    PAULI,
    DenseOperator,
    HybridRegister,
    OpTerm,
    StateVector,
    apply_matrix,
    boson_matrix,
    build_dense,
    expectation,
)

N_SITES = 3
MAX_EXACT_DIM = 2048


@dataclass(frozen=True, eq=False)
class ChargeBathModel:
    site_energies: tuple[float, ...]
    hopping: float
    mode_freqs: tuple[float, ...]
    couplings: np.ndarray  # shape (modes, sites)

    def __post_init__(self) -> None:
        eps = tuple(float(e) for e in self.site_energies)
        freqs = tuple(float(w) for w in self.mode_freqs)
        lam = np.array(self.couplings, dtype=float)
        if len(eps) != N_SITES:
            raise ValueError(f"expected {N_SITES} site energies, got {len(eps)}")
        if not freqs or any(w <= 0 for w in freqs):
            raise ValueError("mode frequencies must be positive and at least one mode is needed")
        if lam.shape != (len(freqs), N_SITES):
            raise ValueError(f"coupling matrix shape {lam.shape} != ({len(freqs)}, {N_SITES})")
        if not (np.all(np.isfinite(lam)) and math.isfinite(self.hopping)):
            raise ValueError("non-finite model parameter")
        lam.setflags(write=False)
        object.__setattr__(self, "site_energies", eps)
        object.__setattr__(self, "mode_freqs", freqs)
        object.__setattr__(self, "couplings", lam)
        object.__setattr__(self, "hopping", float(self.hopping))

    @property
    def n_modes(self) -> int:
        return len(self.mode_freqs)


@dataclass(frozen=True)
class CavitySpec:
    g0: float
    n_modes: int
    truncation: int
    beta: tuple[float, ...] = (1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if self.truncation < 2:
            raise ValueError("truncation must keep at least 2 Fock levels")
        if self.n_modes < 1:
            raise ValueError("at least one cavity mode is required")
        if len(self.beta) != N_SITES or any(not 0.0 <= b <= 1.0 for b in self.beta):
            raise ValueError("beta needs one multiplier in [0, 1] per qubit")


def cavity_couplings(spec: CavitySpec) -> np.ndarray:
    """``lambda[i, j] = beta_j * g0 * sqrt(i + 1)`` with mode 0 the fundamental."""
    modes = np.sqrt(np.arange(1, spec.n_modes + 1, dtype=float))
    return spec.g0 * np.outer(modes, spec.beta)


def register_for(model: ChargeBathModel, truncation: int | Sequence[int]) -> HybridRegister:
    dims = [truncation] * model.n_modes if isinstance(truncation, int) else list(truncation)
    if len(dims) != model.n_modes:
        raise ValueError("one truncation per mode is required")
    return HybridRegister(N_SITES, tuple(dims))


# --- Hamiltonian pieces ----------------------------------------------------------


def site_terms(model: ChargeBathModel) -> list[OpTerm]:
    return [OpTerm(e / 2, paulis={j: "Z"}) for j, e in enumerate(model.site_energies, start=1)]


def exchange_terms(model: ChargeBathModel) -> list[OpTerm]:
    v = model.hopping
    return [
        OpTerm(-v / 2, paulis={j: a, j + 1: a}) for j in range(1, N_SITES) for a in ("X", "Y")
    ]


def cavity_terms(model: ChargeBathModel, share: float = 1.0) -> list[OpTerm]:
    return [OpTerm(share * w, bosons={i: "n"}) for i, w in enumerate(model.mode_freqs)]


def qubit_cavity_terms(model: ChargeBathModel, site: int) -> list[OpTerm]:
    lam = model.couplings
    return [
        OpTerm(lam[i, site - 1] / 2, paulis={site: "Z"}, bosons={i: "x"})
        for i in range(model.n_modes)
        if lam[i, site - 1] != 0
    ]


def drive_terms(model: ChargeBathModel) -> list[OpTerm]:
    lam = model.couplings
    return [
        OpTerm(lam[i].sum() / 2, bosons={i: "x"}) for i in range(model.n_modes) if lam[i].sum() != 0
    ]


def map_charge_bath_to_spin(model: ChargeBathModel) -> list[OpTerm]:
    """Spin-boson form of the model (constant ``sum eps_j / 2`` omitted)."""
    terms = site_terms(model) + exchange_terms(model) + cavity_terms(model)
    for j in range(1, N_SITES + 1):
        terms += qubit_cavity_terms(model, j)
    return terms + drive_terms(model)


def scalar_offset(model: ChargeBathModel) -> float:
    return sum(model.site_energies) / 2


def fermionic_dense(model: ChargeBathModel, register: HybridRegister) -> DenseOperator:
    """The model built from Jordan-Wigner fermion matrices, constant included.

    Independent of the Pauli-term route above: occupation numbers, hopping and
    couplings are assembled from ``c^dag`` / ``c`` matrices.
    """
    n = N_SITES
    qdim = 2**n
    mdims = register.mode_dims

    def qubit_op(ws_pair):
        return sum(w * reduce(np.kron, [PAULI[a] for a in s]) for w, s in ws_pair)

    cdag = [qubit_op(jw_ladder(j, n, "creation")) for j in range(1, n + 1)]
    c = [m.conj().T for m in cdag]
    mode_eye = np.eye(int(np.prod(mdims)), dtype=complex)

    def mode_op(i, op):
        mats = [np.eye(d, dtype=complex) for d in mdims]
        mats[i] = boson_matrix(op, mdims[i])
        return reduce(np.kron, mats)

    h = np.zeros((register.total_dim,) * 2, dtype=complex)
    for j in range(n):
        h += model.site_energies[j] * np.kron(cdag[j] @ c[j], mode_eye)
    for j in range(n - 1):
        hop = cdag[j] @ c[j + 1]
        h += model.hopping * np.kron(hop + hop.conj().T, mode_eye)
    for i, w in enumerate(model.mode_freqs):
        h += w * np.kron(np.eye(qdim), mode_op(i, "n"))
        for j in range(n):
            h += model.couplings[i, j] * np.kron(cdag[j] @ c[j], mode_op(i, "x"))
    return DenseOperator(register, h)


def hamiltonian(model: ChargeBathModel, register: HybridRegister) -> DenseOperator:
    return build_dense(map_charge_bath_to_spin(model), register)


# --- digital-analog schedule --------------------------------------------------------


@dataclass(frozen=True)
class Block:
    name: str
    kind: str  # "digital" | "analog" | "drive"
    terms: tuple[OpTerm, ...]


@dataclass(frozen=True, eq=False)
class DigitalAnalogSchedule:
    model: ChargeBathModel
    register: HybridRegister
    steps: int
    time: float
    blocks: tuple[Block, ...] = field(default=())

    @property
    def dt(self) -> float:
        return self.time / self.steps

    @cached_property
    def block_generators(self) -> tuple[DenseOperator, ...]:
        return tuple(build_dense(b.terms, self.register) for b in self.blocks)

    def step_unitary(self) -> np.ndarray:
        u = np.eye(self.register.total_dim, dtype=complex)
        for g in self.block_generators:
            u = g.propagator(self.dt) @ u
        return u

    def generator_sum(self) -> DenseOperator:
        """Sum of the block generators; one step applies ``dt`` times this."""
        total = np.zeros((self.register.total_dim,) * 2, dtype=complex)
        for g in self.block_generators:
            total += g.matrix
        return DenseOperator(self.register, total)


def build_da_schedule(
    model: ChargeBathModel, register: HybridRegister, steps: int, time: float
) -> DigitalAnalogSchedule:
    """Per step: the qubit-only block (site energies and exchange together),
    one analog block per qubit (1, 2, 3) carrying a third of the cavity energy,
    then the cavity drive.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if register.n_qubits != N_SITES or len(register.mode_dims) != model.n_modes:
        raise ValueError("register does not match the model")
    blocks = [Block("qubits", "digital", tuple(site_terms(model) + exchange_terms(model)))]
    for j in range(1, N_SITES + 1):
        terms = cavity_terms(model, share=1 / N_SITES) + qubit_cavity_terms(model, j)
        blocks.append(Block(f"cavity-q{j}", "analog", tuple(terms)))
    blocks.append(Block("drive", "drive", tuple(drive_terms(model))))
    return DigitalAnalogSchedule(model, register, steps, time, tuple(blocks))


def da_evolve(sched: DigitalAnalogSchedule, state: StateVector) -> StateVector:
    if state.register != sched.register:
        raise ValueError(f"state register {state.register} != schedule register {sched.register}")
    u = sched.step_unitary()
    for _ in range(sched.steps):
        state = apply_matrix(state, u)
    return state


def site_populations(state: StateVector) -> tuple[float, float, float]:
    """``P_j = <(sigma^z_j + 1) / 2>`` for the three site qubits."""
    reg = state.register
    if reg.n_qubits != N_SITES:
        raise ValueError(f"expected a {N_SITES}-qubit hybrid register, got {reg.n_qubits} qubits")
    probs = np.abs(state.amplitudes.reshape(reg.dims)) ** 2
    out = []
    for j in range(N_SITES):
        axes = tuple(a for a in range(len(reg.dims)) if a != j)
        out.append(float(np.clip(probs.sum(axis=axes)[1], 0.0, 1.0)))
    return tuple(out)


def number_operator(register: HybridRegister, site: int) -> DenseOperator:
    return build_dense([OpTerm(0.5, paulis={site: "Z"}), OpTerm(0.5)], register)


def total_occupation(state: StateVector) -> float:
    return sum(expectation(state, number_operator(state.register, j)) for j in range(1, N_SITES + 1))


def top_level_population(state: StateVector) -> float:
    """Largest probability found in the highest kept Fock level of any mode."""
    reg = state.register
    probs = np.abs(state.amplitudes.reshape(reg.dims)) ** 2
    worst = 0.0
    for i in range(len(reg.mode_dims)):
        ax = reg.n_qubits + i
        worst = max(worst, float(np.take(probs, -1, axis=ax).sum()))
    return worst


# --- model files -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BathFile:
    model: ChargeBathModel
    truncation: int
    cavity: CavitySpec | None = None


def model_from_dict(doc: Mapping) -> BathFile:
    sites = doc["sites"]
    hopping = doc["hopping"]
    modes = doc["modes"]
    cavity = None
    if "lambda" in doc:
        lam = np.array(doc["lambda"], dtype=float)
        truncation = int(doc.get("truncation", 6))
    elif "cavity" in doc:
        cav = doc["cavity"]
        cavity = CavitySpec(
            g0=float(cav["g0"]),
            n_modes=int(cav.get("n_modes", len(modes))),
            truncation=int(cav["truncation"]),
            beta=tuple(cav.get("beta", (1.0, 1.0, 1.0))),
        )
        if cavity.n_modes != len(modes):
            raise ValueError(f"cavity.n_modes = {cavity.n_modes} but {len(modes)} mode frequencies given")
        lam = cavity_couplings(cavity)
        truncation = cavity.truncation
    else:
        raise KeyError("lambda or cavity")
    return BathFile(ChargeBathModel(tuple(sites), hopping, tuple(modes), lam), truncation, cavity)


def load_bath_model(path: str | Path) -> BathFile:
    return model_from_dict(json.loads(Path(path).read_text()))
