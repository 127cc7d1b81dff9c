from __future__ import annotations

import itertools
from functools import reduce

import numpy as np
import pytest

from trotterchem.charge_bath import load_bath_model
from trotterchem.cli import fixture_path
from trotterchem.fermion_map import ReducedCoefficients, load_model

# Written out here so the oracles do not share matrices with the package.
# Index basis |0>, |1>; |1> is the occupied, sigma^z = +1 state.
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SZ = np.diag([-1.0, 1.0]).astype(complex)
ID = np.eye(2, dtype=complex)
LOCAL = {"I": ID, "X": SX, "Y": SY, "Z": SZ}


def kron_string(s: str) -> np.ndarray:
    return reduce(np.kron, [LOCAL[a] for a in s])


def occupation_annihilators(n: int) -> list[np.ndarray]:
    """``c_i`` built in the occupation basis by counting occupied modes to the left."""
    dim = 2**n
    ops = []
    for i in range(n):
        m = np.zeros((dim, dim))
        for idx in range(dim):
            bits = [(idx >> (n - 1 - k)) & 1 for k in range(n)]
            if bits[i]:
                sign = (-1) ** sum(bits[:i])
                new = idx ^ (1 << (n - 1 - i))
                m[new, idx] = sign
        ops.append(m.astype(complex))
    return ops


def h2_dense_by_bits(c: ReducedCoefficients) -> np.ndarray:
    """Closed-form H2 Hamiltonian: diagonal from bit arithmetic, four-body by kron."""
    h = np.zeros((16, 16), dtype=complex)
    phi = [
        4 * c.h11 + 2 * c.hA + 4 * c.hC - c.hD,
        4 * c.h22 + 2 * c.hA + 4 * c.hC - c.hD,
        4 * c.h33 + 2 * c.hB + 4 * c.hC - c.hD,
        4 * c.h44 + 2 * c.hB + 4 * c.hC - c.hD,
    ]
    theta = {
        (0, 1): 2 * c.hA,
        (0, 2): 2 * c.hC - c.hD,
        (0, 3): 2 * c.hC,
        (1, 2): 2 * c.hC,
        (1, 3): 2 * c.hC - c.hD,
        (2, 3): 2 * c.hB,
    }
    for idx in range(16):
        z = [2 * ((idx >> (3 - k)) & 1) - 1 for k in range(4)]
        e = sum(p * zi for p, zi in zip(phi, z))
        e += sum(th * z[i] * z[j] for (i, j), th in theta.items())
        h[idx, idx] = e / 8
    four = kron_string("XYYX") + kron_string("YXXY") - kron_string("XXYY") - kron_string("YYXX")
    return h + 2 * c.hD / 8 * four


def traceless(m: np.ndarray) -> np.ndarray:
    return m - np.trace(m) / m.shape[0] * np.eye(m.shape[0])


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


@pytest.fixture(scope="session")
def h2_model():
    return load_model(fixture_path("h2_sto3g.json"))


@pytest.fixture(scope="session")
def coeffs(h2_model) -> ReducedCoefficients:
    return h2_model[0]


@pytest.fixture(scope="session")
def integrals(h2_model):
    return h2_model[1]


@pytest.fixture(scope="session")
def bath():
    return load_bath_model(fixture_path("charge_bath_fixture.json"))


@pytest.fixture
def rng():
    return np.random.default_rng(20161016)


def pairs(n: int):
    return itertools.product(range(n), repeat=2)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    lines = test_acceptance.verdict_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
