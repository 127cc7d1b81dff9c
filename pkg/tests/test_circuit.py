import math

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import SX, SZ, kron_string
from trotterchem.circuit import (
    STAGES,
    Circuit,
    ErrorBudget,
    Gate,
    GateCounts,
    adjacency_violations,
    cancel_inverse_pairs,
    compile_optimized_step,
    compile_stages,
    compile_trotter_step,
    count_gates,
    decompose_ms,
    embed,
    find_crossing,
    gate_matrix,
    phase_distance,
    rebase_and_cancel,
    route_linear,
    solve_crossing,
    total_upper_bound,
)
from trotterchem.fermion_map import ReducedCoefficients
from trotterchem.trotter import TrotterPlan, digital_error_bound, h2_time_for_phase

THETA = 2.0
CROSSINGS = {
    2: 0.0055087229589611932,
    3: 0.0025958595051035378,
    4: 0.0015016660875609611,
}


def step_reference(c, tau, scheme="regular"):
    return TrotterPlan.for_h2(c, 1, tau, scheme).unitary()


def test_gate_matrices():
    np.testing.assert_array_equal(
        gate_matrix(Gate("SWAP", (1, 2))), [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]
    )
    # index basis (|0>, |1>) with sigma^z = diag(-1, 1)
    z = gate_matrix(Gate("Z", (1,), math.pi / 4))
    np.testing.assert_allclose(z, np.diag(np.exp(-1j * math.pi / 4 * np.array([-1, 1]))), atol=1e-15)
    hA, tau = 1.0, 1.0
    zz = gate_matrix(Gate("ZZ", (1, 2), 2 * hA / 8 * tau))
    np.testing.assert_allclose(zz, expm(-1j * 0.25 * np.kron(SZ, SZ)), atol=1e-14)
    xx = gate_matrix(Gate("XX", (1, 2), 0.3))
    np.testing.assert_allclose(xx, expm(-0.3j * np.kron(SX, SX)), atol=1e-14)
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 2))
    with pytest.raises(ValueError):
        Gate("XX", (1, 1))


def test_every_kind_is_unitary():
    gates = [Gate(k, (1,), 0.37) for k in ("Z", "Y", "R", "U_D")]
    gates += [Gate(k, (2, 3), -0.8) for k in ("ZZ", "XX", "XXfixed", "SWAP")]
    gates.append(Gate("MS", (1, 2, 3, 4), math.pi / 8))
    for g in gates:
        u = embed(g)
        assert np.max(np.abs(u.conj().T @ u - np.eye(16))) < 1e-10
        assert np.max(np.abs(embed(g.inverse()) @ u - np.eye(16))) < 1e-12


def test_embed_places_targets():
    g = Gate("ZZ", (3, 1), 0.2)
    ref = expm(-0.2j * kron_string("ZIZI"))
    np.testing.assert_allclose(embed(g), ref, atol=1e-14)


@pytest.mark.parametrize("alpha", [0.1, 0.7])
def test_four_body_blocks(alpha):
    blocks = {"XYYX": (2, 3), "XXYY": (4, 3), "YXXY": (4, 1), "YYXX": (2, 1)}
    ms = (1, 2, 3, 4)
    for axes, (j, k) in blocks.items():
        circ = Circuit((
            Gate("Z", (k,), -math.pi / 4),
            Gate("MS", ms, -math.pi / 8),
            Gate("U_D", (j,), alpha),
            Gate("MS", ms, math.pi / 8),
            Gate("Z", (k,), math.pi / 4),
        ))
        assert phase_distance(circ.unitary(), expm(-1j * alpha * kron_string(axes))) < 1e-12, axes


def test_zero_coefficients_give_identity():
    u = compile_trotter_step(ReducedCoefficients.zeros(), 0.4).unitary()
    assert phase_distance(u, np.eye(16)) < 1e-12


def test_reference_step_on_fixture(coeffs):
    tau = h2_time_for_phase(coeffs, 0.1)
    u = compile_trotter_step(coeffs, tau).unitary()
    assert phase_distance(u, step_reference(coeffs, tau)) < 1e-8


@pytest.mark.parametrize("scheme", ["regular", "symmetric"])
def test_all_stages_match_trotter_step(coeffs, rng, scheme):
    sets = [coeffs] + [ReducedCoefficients.random(rng) for _ in range(20)]
    for c in sets:
        tau = rng.uniform(0.05, 1.5)
        ref = step_reference(c, tau, scheme)
        for name, circ in compile_stages(c, tau, scheme).items():
            assert phase_distance(circ.logical_unitary(), ref) < 1e-8, name


def test_decompose_ms():
    plain = Circuit((Gate("R", (1,), 0.3), Gate("XX", (1, 2), 0.1)))
    assert decompose_ms(plain) == plain
    one = Circuit((Gate("MS", (1, 2, 3, 4), -math.pi / 8),))
    out = decompose_ms(one)
    assert count_gates(out).xx_two_qubit == 6 and len(out) == 6
    assert phase_distance(out.unitary(), one.unitary()) < 1e-12
    pair = Circuit(one.gates + (one.gates[0].inverse(),))
    assert len(cancel_inverse_pairs(decompose_ms(pair))) == 0


def test_rebase_conjugation():
    circ = Circuit((Gate("ZZ", (2, 4), 0.45),))
    rebased = rebase_and_cancel(circ)
    assert [g.kind for g in rebased.gates].count("XX") == 1
    assert phase_distance(rebased.unitary(), circ.unitary()) < 1e-12


def test_cancel_examples_and_idempotence(coeffs):
    g = Gate("XX", (1, 3), 0.2)
    assert len(cancel_inverse_pairs(Circuit((g, g.inverse())))) == 0
    # separated by a commuting gate
    assert len(cancel_inverse_pairs(Circuit((g, Gate("R", (2,), 0.4), g.inverse())))) == 1
    # a non-commuting gate in between blocks the cancellation
    blocked = Circuit((g, Gate("R", (1,), 0.4), g.inverse()))
    assert len(cancel_inverse_pairs(blocked)) == 3
    stages = compile_stages(coeffs, 0.3)
    once = cancel_inverse_pairs(stages["c"])
    assert cancel_inverse_pairs(once) == once
    assert count_gates(stages["d"]).two_qubit < count_gates(stages["b"]).two_qubit
    assert len(stages["d"]) <= len(stages["c"])


def test_routing_examples():
    adjacent = Circuit((Gate("XX", (1, 2), 0.3), Gate("R", (3,), 0.1)), layout=(1, 2, 3, 4))
    assert route_linear(adjacent).gates == adjacent.gates
    far = Circuit((Gate("XX", (1, 4), 0.3),))
    routed = route_linear(far)
    assert [str(g) for g in routed.gates] == ["SWAP 2,3 0", "XX 1,2 0.29999999999999999", "SWAP 2,3 0"]
    assert phase_distance(routed.logical_unitary(), far.unitary()) < 1e-12
    with pytest.raises(ValueError):
        route_linear(Circuit((Gate("MS", (1, 2, 3, 4), 0.1),)))


def test_routed_step_structure(coeffs):
    routed = compile_optimized_step(coeffs, 0.3)
    assert routed.routed
    assert adjacency_violations(routed) == []
    naive = route_linear(Circuit(compile_stages(coeffs, 0.3)["d"].gates, layout=(1, 2, 3, 4)))
    assert count_gates(naive).swap == 28 > count_gates(routed).swap == 24


def test_gate_count_regression(coeffs):
    tau = h2_time_for_phase(coeffs, THETA) / 2
    counts = count_gates(compile_optimized_step(coeffs, tau))
    assert (counts.xx_two_qubit, counts.swap, counts.single_qubit, counts.ms_multiqubit) == (24, 24, 20, 0)
    assert counts.by_kind == {"XXfixed": 18, "XX": 6, "SWAP": 24, "R": 4, "U_D": 4, "Z": 4, "Y": 8}
    sym = count_gates(compile_optimized_step(coeffs, tau, "symmetric"))
    assert sym.two_qubit == 62
    assert count_gates(Circuit()) == GateCounts()


def test_budget_examples():
    counts = GateCounts(xx_two_qubit=24, swap=24)
    assert total_upper_bound(0.1, counts, 2, 1e-3) == pytest.approx(0.196)
    assert total_upper_bound(0.3, counts, 5, 0.0) == 0.3
    with pytest.raises(ValueError):
        total_upper_bound(0.1, counts, 2, 1.5)
    budget = ErrorBudget(1e-3, counts, 2, 0.1)
    assert budget.total == pytest.approx(budget.digital + budget.experimental)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 2.0, 7.0])
def test_budget_linearity(alpha):
    counts = GateCounts(xx_two_qubit=24, swap=24)
    eps = 1.0 / 1024
    base = total_upper_bound(0.125, counts, 3, 0.0)
    lhs = total_upper_bound(0.125, counts, 3, alpha * eps) - base
    rhs = alpha * (total_upper_bound(0.125, counts, 3, eps) - base)
    assert lhs == rhs


def test_solve_crossing_examples():
    assert solve_crossing(0.2, 0.1, 1, 2, 1) == pytest.approx(0.1)
    assert solve_crossing(0.1, 0.2, 1, 2, 1) is None
    assert solve_crossing(0.1, 0.1, 3, 3, 2) is None


@pytest.mark.parametrize("steps", [2, 3, 4])
def test_fixture_crossings(coeffs, steps):
    eps = find_crossing(steps, THETA, coeffs)
    assert eps == pytest.approx(CROSSINGS[steps], rel=1e-9)
    t = h2_time_for_phase(coeffs, THETA)
    counts = {s: count_gates(compile_optimized_step(coeffs, t / steps, s)) for s in ("regular", "symmetric")}
    digital = {s: digital_error_bound(TrotterPlan.for_h2(coeffs, steps, t, s)) for s in counts}

    def total(s, e):
        return total_upper_bound(digital[s], counts[s], steps, e)

    assert total("symmetric", eps / 2) < total("regular", eps / 2)
    assert total("symmetric", eps * 2) > total("regular", eps * 2)
    # at a 1% two-qubit error the shorter regular circuit wins
    assert total("regular", 1e-2) < total("symmetric", 1e-2)


def test_text_round_trip(coeffs):
    circ = compile_optimized_step(coeffs, 0.37)
    again = Circuit.from_text(circ.to_text(), layout=circ.layout, routed=True)
    assert again == circ
    doc = circ.to_json()
    assert doc["counts"]["xx"] == 24 and len(doc["gates"]) == len(circ)


def test_stage_labels():
    assert STAGES == ("a", "b", "c", "d", "routed")
