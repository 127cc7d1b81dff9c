"""Command-line experiment runner.

    trotterchem h2-evolve    --model h2.json --out run/
    trotterchem h2-compile   --model h2.json --out run/ [--stage a|b|c|d|routed]
    trotterchem error-bounds --model h2.json --out run/
    trotterchem charge-bath  --model bath.json --out run/ [--fock-sweep]

Exit codes: 0 ok, 2 input error, 3 config error, 4 self-check failure,
5 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from functools import reduce
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from trotterchem import charge_bath as cb
from trotterchem import circuit as cc
from trotterchem.fermion_map import (
    H2_TERM_STRINGS,
    ReducedCoefficients,
    build_h2_spin_hamiltonian,
    derive_reduced_coeffs,
    jw_ladder,
    load_model,
    map_electronic_to_spin,
)
from trotterchem.hilbert import PAULI, StateVector, build_dense, exact_evolve, expectation, fidelity
from trotterchem.trotter import (
    TrotterPlan,
    digital_error_bound,
    empirical_digital_error,
    h2_time_for_phase,
    trotter_evolve,
)

log = logging.getLogger("trotterchem")

EXIT_INPUT, EXIT_CONFIG, EXIT_SELFCHECK, EXIT_RESOURCE = 2, 3, 4, 5
INITIAL_H2_STATE = "1100"
HARDWARE_EPS = 1e-2


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("trotterchem") / "data" / name))


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n")


def n_workers() -> int:
    env = os.environ.get("TROTTERCHEM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError(EXIT_CONFIG, f"TROTTERCHEM_THREADS={env!r} is not an integer")
    return min(8, os.cpu_count() or 1)


def parallel_map(fn: Callable, items: Sequence) -> list:
    workers = n_workers()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- argument handling ----------------------------------------------------------------


def parse_int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", type=Path, help="model file (JSON); defaults to the bundled fixture")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized self-checks")
    common.add_argument("--verify", action="store_true", help="run oracle cross-checks inline")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="trotterchem", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("h2-evolve", parents=[common], help="fidelity and term energies vs phase")
    p.add_argument("--theta-max", type=float, default=2.0)
    p.add_argument("--theta-step", type=float, default=0.05)
    p.add_argument("--steps", type=parse_int_list, default=[1, 2, 3])
    p.add_argument("--scheme", choices=("regular", "symmetric"), default="regular")

    p = sub.add_parser("h2-compile", parents=[common], help="compile one Trotter step to gates")
    p.add_argument("--stage", choices=cc.STAGES, default="routed")
    p.add_argument("--scheme", choices=("regular", "symmetric"), default="regular")
    p.add_argument("--theta", type=float, default=2.0, help="simulated phase |h11| t")
    p.add_argument("--steps", type=parse_int_list, default=[1], help="Trotter steps (first value used)")

    p = sub.add_parser("error-bounds", parents=[common], help="digital + two-qubit error budgets")
    p.add_argument("--theta", type=float, default=2.0)
    p.add_argument("--steps", type=parse_int_list, default=[2, 3, 4])
    p.add_argument("--eps-min", type=float, default=1e-4)
    p.add_argument("--eps-max", type=float, default=1e-1)
    p.add_argument("--eps-points", type=int, default=31)
    p.add_argument("--scheme", choices=("regular", "symmetric", "both"), default="both")
    p.add_argument(
        "--digital",
        choices=("bound", "empirical"),
        default="bound",
        help="digital error from the commutator bound or from the measured infidelity",
    )

    p = sub.add_parser("charge-bath", parents=[common], help="electron transfer through a cavity bath")
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--t-step", type=float, default=0.5)
    p.add_argument("--steps", type=parse_int_list, default=[4, 8, 16])
    p.add_argument("--fock-sweep", action="store_true", help="also tabulate truncation d -> d+2")
    return parser


def phase_grid(theta_max: float, theta_step: float) -> list[float]:
    if not np.isfinite(theta_max) or theta_max < 0:
        raise CliError(EXIT_CONFIG, f"--theta-max must be >= 0, got {theta_max}")
    if theta_max == 0:
        return [0.0]
    if not theta_step > 0:
        raise CliError(EXIT_CONFIG, f"--theta-step must be > 0, got {theta_step}")
    n = int(round(theta_max / theta_step))
    return [k * theta_step for k in range(n + 1)]


def check_steps(steps: Sequence[int]) -> list[int]:
    if not steps or any(s < 1 for s in steps):
        raise CliError(EXIT_CONFIG, f"--steps must be a non-empty list of positive integers, got {steps}")
    return sorted(set(steps))


def load_h2(args) -> tuple[ReducedCoefficients, object]:
    path = args.model or fixture_path("h2_sto3g.json")
    try:
        return load_model(path)
    except FileNotFoundError:
        raise CliError(EXIT_INPUT, f"cannot read model file {path}")
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_INPUT, f"{path}: invalid JSON ({exc})")
    except KeyError as exc:
        raise CliError(EXIT_INPUT, f"{path}: missing field {exc.args[0]}")
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}")


def load_bath(args) -> cb.BathFile:
    path = args.model or fixture_path("charge_bath_fixture.json")
    try:
        return cb.load_bath_model(path)
    except FileNotFoundError:
        raise CliError(EXIT_INPUT, f"cannot read model file {path}")
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_INPUT, f"{path}: invalid JSON ({exc})")
    except KeyError as exc:
        raise CliError(EXIT_INPUT, f"{path}: missing field {exc.args[0]}")
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}")


def phase_time(c: ReducedCoefficients, theta: float) -> float:
    try:
        return h2_time_for_phase(c, theta)
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None


def require(ok: bool, what: str) -> None:
    if not ok:
        raise CliError(EXIT_SELFCHECK, f"self-check failed: {what}")
    log.info("check passed: %s", what)


# --- h2-evolve ------------------------------------------------------------------------


def verify_h2_model(c: ReducedCoefficients, ints) -> None:
    n = 4
    cdag = [
        sum(w * reduce(np.kron, [PAULI[a] for a in s]) for w, s in jw_ladder(i, n, "creation"))
        for i in range(1, n + 1)
    ]
    worst = 0.0
    for i in range(n):
        for j in range(n):
            ci = cdag[i].conj().T
            acomm = ci @ cdag[j] + cdag[j] @ ci
            worst = max(worst, np.max(np.abs(acomm - (i == j) * np.eye(16))))
            worst = max(worst, np.max(np.abs(ci @ cdag[j].conj().T + cdag[j].conj().T @ ci)))
    require(worst <= 1e-12, "Jordan-Wigner anticommutation relations")
    if ints is not None:
        a = map_electronic_to_spin(ints).to_dense().matrix
        b = build_h2_spin_hamiltonian(derive_reduced_coeffs(ints)).to_dense().matrix
        require(np.max(np.abs(a - b)) <= 1e-10, "generic mapping equals closed-form H2 Hamiltonian")
    plan = TrotterPlan((build_h2_spin_hamiltonian(c),), 3, 1.0)
    psi = StateVector.from_bits(INITIAL_H2_STATE)
    require(
        fidelity(trotter_evolve(plan, psi), exact_evolve(plan.hamiltonian, 1.0, psi)) > 1 - 1e-10,
        "single-group Trotter plan reproduces exact evolution",
    )


def run_h2_evolve(args) -> int:
    c, ints = load_h2(args)
    thetas = phase_grid(args.theta_max, args.theta_step)
    steps = check_steps(args.steps)
    if args.verify:
        verify_h2_model(c, ints)

    ham = build_h2_spin_hamiltonian(c)
    psi0 = StateVector.from_bits(INITIAL_H2_STATE)
    observables = [(t.axes, build_dense([t], ham.register)) for t in ham.terms]
    dense_h = ham.to_dense()

    def point(theta: float):
        t = phase_time(c, theta)
        states = {0: exact_evolve(dense_h, t, psi0)}
        for l in steps:
            states[l] = trotter_evolve(TrotterPlan.for_h2(ham, l, t, args.scheme), psi0)
        fid = [(theta, l, fidelity(states[0], s)) for l, s in states.items()]
        exps = [(theta, l, name, expectation(s, op)) for l, s in states.items() for name, op in observables]
        return fid, exps

    results = parallel_map(point, thetas)
    fid_rows = sorted((r for f, _ in results for r in f), key=lambda r: (r[0], r[1]))
    order = {s: i for i, s in enumerate(H2_TERM_STRINGS)}
    exp_rows = sorted((r for _, e in results for r in e), key=lambda r: (r[0], r[1], order[r[2]]))

    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / "fidelity.csv", ("theta", "l", "F"), fid_rows)
    write_csv(args.out / "expectations.csv", ("theta", "l", "observable_name", "value"), exp_rows)
    write_json(
        args.out / "run_summary.json",
        {
            "command": "h2-evolve",
            "coefficients": c.as_dict(),
            "initial_state": INITIAL_H2_STATE,
            "scheme": args.scheme,
            "steps": steps,
            "theta_points": len(thetas),
            "final_fidelity": {str(l): f for th, l, f in fid_rows if th == thetas[-1]},
        },
    )
    return 0


# --- h2-compile -----------------------------------------------------------------------


def self_check_circuit(circ: cc.Circuit, c: ReducedCoefficients, tau: float, scheme: str) -> float:
    ref = TrotterPlan.for_h2(c, 1, tau, scheme).step_unitary()
    return cc.phase_distance(ref, circ.logical_unitary())


def run_h2_compile(args) -> int:
    c, _ = load_h2(args)
    steps = check_steps(args.steps)[0] if args.steps else 1
    if not np.isfinite(args.theta):
        raise CliError(EXIT_CONFIG, "--theta must be finite")
    tau = phase_time(c, args.theta) / steps
    stages = cc.compile_stages(c, tau, args.scheme)
    circ = stages[args.stage]

    dist = self_check_circuit(circ, c, tau, args.scheme)
    require(dist < cc.PASS_TOL, f"stage {args.stage} unitary matches the Trotter step (distance {dist:.2e})")
    if args.stage == "routed":
        require(not cc.adjacency_violations(circ), "all two-qubit gates act on neighbouring qubits")
    if args.verify:
        rng = np.random.default_rng(args.seed)
        for k in range(20):
            rc = ReducedCoefficients.random(rng)
            for name, other in cc.compile_stages(rc, tau, args.scheme).items():
                d = self_check_circuit(other, rc, tau, args.scheme)
                require(d < cc.PASS_TOL, f"random set {k}, stage {name} (distance {d:.2e})")

    counts = cc.count_gates(circ)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "circuit.txt").write_text(circ.to_text())
    write_json(args.out / "circuit.json", circ.to_json())
    write_json(
        args.out / "counts.json",
        {
            "stage": args.stage,
            "scheme": args.scheme,
            "tau": tau,
            "counts": counts.as_dict(),
            "self_check_distance": dist,
        },
    )
    print(json.dumps({"xx": counts.xx_two_qubit, "swap": counts.swap, "single": counts.single_qubit}))
    return 0


# --- error-bounds ---------------------------------------------------------------------


def run_error_bounds(args) -> int:
    c, _ = load_h2(args)
    steps = check_steps(args.steps)
    if not (0 <= args.eps_min <= args.eps_max <= 1) or args.eps_points < 1:
        raise CliError(EXIT_CONFIG, "need 0 <= --eps-min <= --eps-max <= 1 and --eps-points >= 1")
    if args.eps_points == 1 or args.eps_min == args.eps_max:
        eps_grid = [args.eps_min]
    elif args.eps_min > 0:
        eps_grid = list(np.geomspace(args.eps_min, args.eps_max, args.eps_points))
    else:
        eps_grid = list(np.linspace(args.eps_min, args.eps_max, args.eps_points))
    schemes = ("regular", "symmetric") if args.scheme == "both" else (args.scheme,)
    t = phase_time(c, args.theta)
    psi0 = StateVector.from_bits(INITIAL_H2_STATE)

    def digital_for(job):
        l, scheme = job
        plan = TrotterPlan.for_h2(c, l, t, scheme)
        bound = digital_error_bound(plan)
        measured = empirical_digital_error(plan, psi0)
        counts = cc.count_gates(cc.compile_optimized_step(c, t / l, scheme))
        return (l, scheme), bound, measured, counts

    jobs = [(l, s) for l in steps for s in schemes]
    table = {key: (b, m, n) for key, b, m, n in parallel_map(digital_for, jobs)}
    if args.verify:
        for (l, s), (b, m, _) in sorted(table.items()):
            require(m <= b, f"bound dominates measured infidelity (l={l}, {s})")

    rows = []
    for (l, s), (bound, measured, counts) in sorted(table.items()):
        digital = bound if args.digital == "bound" else measured
        for eps in eps_grid:
            budget = cc.ErrorBudget(eps, counts, l, digital)
            rows.append((eps, l, s, digital, budget.experimental, budget.total))
    rows.sort(key=lambda r: (r[1], r[2], r[0]))

    crossings = []
    regime = {}
    if set(schemes) == {"regular", "symmetric"}:
        for l in steps:
            (br, mr, nr), (bs, ms, ns) = table[(l, "regular")], table[(l, "symmetric")]
            dr, ds = (br, bs) if args.digital == "bound" else (mr, ms)
            star = cc.solve_crossing(dr, ds, nr.two_qubit, ns.two_qubit, l)
            crossings.append((l, "" if star is None else star))
            at_hw = {
                s: cc.total_upper_bound(d, n, l, HARDWARE_EPS)
                for s, d, n in (("regular", dr, nr), ("symmetric", ds, ns))
            }
            regime[str(l)] = min(at_hw, key=at_hw.get)

    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / "bounds.csv", ("eps", "l", "scheme", "digital", "experimental", "total"), rows)
    write_csv(args.out / "crossings.csv", ("l", "eps_star"), crossings)
    write_json(
        args.out / "run_summary.json",
        {
            "command": "error-bounds",
            "theta": args.theta,
            "time": t,
            "digital_source": args.digital,
            "two_qubit_per_step": {f"{s}": table[(steps[0], s)][2].two_qubit for s in schemes},
            "crossings": {str(l): e for l, e in crossings},
            "better_scheme_at_eps_1e-2": regime,
        },
    )
    return 0


# --- charge-bath ----------------------------------------------------------------------


def run_charge_bath(args) -> int:
    bath = load_bath(args)
    model = bath.model
    steps = check_steps(args.steps)
    times = phase_grid(args.t_max, args.t_step)
    truncations = [bath.truncation, bath.truncation + 2] if args.fock_sweep else [bath.truncation]
    for d in truncations:
        dim = cb.register_for(model, d).total_dim
        if dim > cb.MAX_EXACT_DIM:
            raise CliError(
                EXIT_RESOURCE, f"register dimension {dim} exceeds the exact-oracle limit {cb.MAX_EXACT_DIM}"
            )

    reg = cb.register_for(model, bath.truncation)
    h = cb.hamiltonian(model, reg)
    psi0 = StateVector.basis(reg, "100")
    if args.verify:
        f = cb.fermionic_dense(model, reg).matrix - h.matrix
        f -= np.trace(f) / reg.total_dim * np.eye(reg.total_dim)
        require(np.max(np.abs(f)) <= 1e-10, "fermionic and spin-boson Hamiltonians agree")

    def point(t: float):
        exact = exact_evolve(h, t, psi0)
        out = [(t, 0, *cb.site_populations(exact), 1.0)]
        for l in steps:
            s = cb.da_evolve(cb.build_da_schedule(model, reg, l, t), psi0)
            out.append((t, l, *cb.site_populations(s), fidelity(exact, s)))
            if args.verify:
                require(abs(cb.total_occupation(s) - 1.0) <= 1e-10, f"electron number conserved (t={t}, l={l})")
        return out

    rows = sorted((r for chunk in parallel_map(point, times) for r in chunk), key=lambda r: (r[0], r[1]))
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / "populations.csv", ("t", "l", "P1", "P2", "P3", "fidelity_vs_exact"), rows)

    summary = {
        "command": "charge-bath",
        "register_dims": list(reg.dims),
        "steps": steps,
        "time_points": len(times),
    }
    if args.fock_sweep:
        sweep = []
        base = {}
        for d in truncations:
            r = cb.register_for(model, d)
            hd = cb.hamiltonian(model, r)
            p0 = StateVector.basis(r, "100")
            for t in times:
                st = exact_evolve(hd, t, p0)
                pops = cb.site_populations(st)
                ref = base.setdefault(t, pops)
                change = max(abs(a - b) for a, b in zip(pops, ref))
                sweep.append((d, t, *pops, cb.top_level_population(st), change))
        write_csv(
            args.out / "fock_sweep.csv",
            ("truncation", "t", "P1", "P2", "P3", "top_level_population", "max_change_vs_first"),
            sweep,
        )
        summary["fock_sweep_max_change"] = max(r[-1] for r in sweep)
    write_json(args.out / "run_summary.json", summary)
    return 0


COMMANDS = {
    "h2-evolve": run_h2_evolve,
    "h2-compile": run_h2_compile,
    "error-bounds": run_error_bounds,
    "charge-bath": run_charge_bath,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports bad flags with status 2; those are configuration errors here
        return EXIT_CONFIG if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"trotterchem {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
