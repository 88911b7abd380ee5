"""Command-line front end: run, trace, cost, gen.

Problem files are JSON; complex numbers are two-element [re, im] arrays
everywhere, matrices are nested lists of rows of such pairs. Exit codes:
0 success, 1 fidelity below threshold, 2 parse or validation failure (the
diagnostic names the violated invariant).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import entcost, groupform, locc, qcore, wang
from .errors import QRemoteError
from .qcore import StateVector

FIDELITY_TOL = 1e-9


# --- JSON wire format --------------------------------------------------------

def pair_to_complex(pair) -> complex:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ValueError(f"complex numbers are [re, im] pairs, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def vector_from_json(obj) -> np.ndarray:
    return np.array([pair_to_complex(p) for p in obj], dtype=complex)


def matrix_from_json(obj) -> np.ndarray:
    return np.array([[pair_to_complex(p) for p in row] for row in obj], dtype=complex)


def complex_to_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def vector_to_json(vec) -> list:
    return [complex_to_pair(z) for z in np.asarray(vec).reshape(-1)]


def matrix_to_json(mat) -> list:
    return [[complex_to_pair(z) for z in row] for row in np.asarray(mat)]


# --- problem files -----------------------------------------------------------

class Problem:
    def __init__(self, kind, runner, expected, output_factor, meta, describe):
        self.kind = kind
        self.run = runner                 # () -> list of branches
        self.expected = expected          # expected output amplitudes
        self.output_factor = output_factor
        self.meta = meta                  # parsed payload for trace/cost
        self.describe = describe          # header string


def _input_state(doc: dict, dim: int, override: str | None) -> StateVector:
    if override is not None:
        return StateVector(vector_from_json(json.loads(override)), (dim,))
    if "input" in doc:
        return StateVector(vector_from_json(doc["input"]), (dim,))
    return qcore.ket(0, dim)


def load_problem(path: str, input_override: str | None = None) -> Problem:
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    kind = doc.get("kind")
    if kind == "wang":
        dim = int(doc["dim"])
        blocks = [matrix_from_json(b) for b in doc["blocks"]]
        partition = wang.validate_partition(blocks)
        if partition.dim != dim:
            raise ValueError(f"declared dim {dim} does not match blocks ({partition.dim})")
        if "phases" in doc:
            phases = wang.Phases(vector_from_json(doc["phases"]))
        else:
            phases = wang.Phases(np.ones(partition.n))
        state = _input_state(doc, dim, input_override)
        expected = wang.assemble(partition, phases) @ state.amplitudes
        return Problem(
            kind="wang",
            runner=lambda: wang.run_wang(partition, phases, state),
            expected=expected,
            output_factor=0,
            meta={"partition": partition, "phases": phases, "input": state},
            describe=f"kind: wang  dim={dim}  blocks={partition.n}",
        )
    if kind == "group":
        order = int(doc["order"])
        group = groupform.finite_group(doc["cayley"], names=doc.get("names"))
        if group.order != order:
            raise ValueError(f"declared order {order} does not match the Cayley table")
        matrices = [matrix_from_json(m) for m in doc["matrices"]]
        mu = matrix_from_json(doc["mu"]) if "mu" in doc else None
        rep = groupform.projective_rep(group, matrices, mu=mu)
        coefficients = vector_from_json(doc["coefficients"])
        state = _input_state(doc, rep.dim, input_override)
        expected = groupform.assemble(rep, coefficients) @ state.amplitudes
        meta = {"rep": rep, "coefficients": coefficients, "input": state}
        if "blocks" in doc:
            meta["decomposition"] = groupform.block_decomposition(
                rep, [int(d) for d in doc["blocks"]]
            )
        return Problem(
            kind="group",
            runner=lambda: groupform.run_group_protocol(rep, coefficients, state),
            expected=expected,
            output_factor=0,
            meta=meta,
            describe=f"kind: group  |G|={order}  dim={rep.dim}",
        )
    if kind == "bqst":
        dim = int(doc["dim"])
        unitary = matrix_from_json(doc["unitary"])
        if unitary.shape != (dim, dim):
            raise ValueError(f"unitary shape {unitary.shape} does not match dim {dim}")
        state = _input_state(doc, dim, input_override)
        expected = np.asarray(unitary, dtype=complex) @ state.amplitudes
        return Problem(
            kind="bqst",
            runner=lambda: entcost.bqst_teleport(unitary, state)[0],
            expected=expected,
            output_factor=4,
            meta={"unitary": unitary, "input": state, "dim": dim},
            describe=f"kind: bqst  dim={dim}",
        )
    raise ValueError(f"unknown problem kind {kind!r}; expected wang, group, or bqst")


def _branch_outcomes(kind: str, branch) -> list[tuple[str, int]]:
    if kind == "wang":
        return [("l", branch.l), ("m", branch.m)]
    if kind == "group":
        return [("g", branch.g), ("h", branch.h)]
    return list(zip(("p", "q", "r", "s"), branch.outcomes))


# --- run ----------------------------------------------------------------------

def cmd_run(args) -> int:
    problem = load_problem(args.file, args.input)
    threshold = 1.0 - args.tol
    branches = problem.run()
    rows = []
    for branch in branches:
        fid = qcore.factor_overlap(branch.state, problem.expected, problem.output_factor)
        rows.append((_branch_outcomes(problem.kind, branch), branch.probability, fid))
    min_fid = min(fid for _, _, fid in rows)
    ok = min_fid >= threshold
    first_transcript = locc.transcript_lines(branches[0].transcript)

    if args.json:
        doc = {
            "kind": problem.kind,
            "branches": [
                {
                    "outcomes": dict(outs),
                    "probability": prob,
                    "fidelity": fid,
                }
                for outs, prob, fid in rows
            ],
            "min_fidelity": min_fid,
            "threshold": threshold,
            "ok": ok,
            "transcript_first_branch": first_transcript,
        }
        print(json.dumps(doc, indent=2))
    else:
        print(problem.describe)
        print(f"branches: {len(rows)}")
        for outs, prob, fid in rows:
            label = " ".join(f"{k}={v}" for k, v in outs)
            print(f"branch {label}  p={prob:.10f}  fidelity={fid:.12f}")
        print(f"min fidelity: {min_fid:.12f}  (threshold {threshold:.10f})")
        print("transcript of first branch:")
        for line in first_transcript:
            print(f"  {line}")
        print("result: OK" if ok else "result: FIDELITY FAILURE")
    return 0 if ok else 1


# --- trace ----------------------------------------------------------------------

def _phase_label(numerator: int, denominator: int) -> str:
    """exp(i*pi * numerator/denominator) as text, empty for phase 0."""
    frac = Fraction(numerator, denominator)
    if frac == 0:
        return ""
    if frac.denominator == 1:
        return f"exp({frac.numerator}i*pi)*"
    return f"exp({frac.numerator}i*pi/{frac.denominator})*"


def _cell_label(actual: np.ndarray, expected: np.ndarray, label: str) -> str:
    """Label the cell symbolically when it matches the expected vector exactly."""
    if np.abs(actual - expected).max() <= 1e-10:
        if np.abs(expected).max() <= 1e-10:
            return "."
        return label
    if np.abs(actual).max() <= 1e-10:
        return "."
    return "[" + " ".join(f"{z.real:+.4f}{z.imag:+.4f}i" for z in actual) + "]"


def _print_table(row_labels, col_count, cells) -> None:
    header = ["a\\b"] + [str(c) for c in range(col_count)]
    table = [header] + [
        [str(lab)] + list(row) for lab, row in zip(row_labels, cells)
    ]
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    for row in table:
        print("  " + "  ".join(cell.ljust(w) for cell, w in zip(row, widths)))


def cmd_trace(args) -> int:
    problem = load_problem(args.file, args.input)
    if problem.kind != "wang":
        raise ValueError("trace supports wang problems only")
    partition = problem.meta["partition"]
    phases = problem.meta["phases"]
    state = problem.meta["input"]
    n = partition.n
    if n > 6:
        raise ValueError(f"trace supports up to 6 blocks, got {n}")
    try:
        l, m = (int(x) for x in args.branch.split(","))
    except Exception as exc:
        raise ValueError(f"--branch must be 'l,m', got {args.branch!r}") from exc
    if not (0 <= l < n and 0 <= m < n):
        raise ValueError(f"branch ({l},{m}) out of range for {n} outcomes")

    stages = wang.trace_branch(partition, phases, state, l, m)
    projs = wang.projectors(partition)
    proj_psi = [p @ state.amplitudes for p in projs]
    c = phases.values
    root = f"sqrt({n})"

    print(f"trace: wang  dim={partition.dim}  blocks={n}  branch l={l}, m={m}")
    print(f"input |psi> = {_vec_text(state.amplitudes)}")

    # initial: resource diagonal over (a, b)
    print(f"\nstep 0: initial state |psi> (x) sum_k |k>|k>/{root}")
    grid0 = stages[0].state.amplitudes.reshape(partition.dim, n, n)
    cells = [
        [
            _cell_label(
                grid0[:, r, col],
                (state.amplitudes / math.sqrt(n)) if r == col else np.zeros(partition.dim),
                f"|psi>/{root}",
            )
            for col in range(n)
        ]
        for r in range(n)
    ]
    _print_table(range(n), n, cells)

    print(f"\nstep 1: Alice applies the controlled shift P = sum_i P_i (x) X^i")
    grid1 = stages[1].state.amplitudes.reshape(partition.dim, n, n)
    cells = [
        [
            _cell_label(
                grid1[:, r, col],
                proj_psi[(col - r) % n] / math.sqrt(n),
                f"P{(col - r) % n}|psi>/{root}",
            )
            for col in range(n)
        ]
        for r in range(n)
    ]
    _print_table(range(n), n, cells)

    print(f"\nstep 2: Alice measures a -> {l}; Bob applies X^{l}")
    grid2 = stages[2].state.amplitudes.reshape(partition.dim, n, n)
    cells = [
        [
            _cell_label(grid2[:, l, col], proj_psi[col], f"P{col}|psi>")
            for col in range(n)
        ]
    ]
    _print_table([l], n, cells)

    print("\nstep 3: Bob applies the phase gate C = diag(c_i)")
    grid3 = stages[3].state.amplitudes.reshape(partition.dim, n, n)
    cells = [
        [
            _cell_label(grid3[:, l, col], c[col] * proj_psi[col], f"c{col}*P{col}|psi>")
            for col in range(n)
        ]
    ]
    _print_table([l], n, cells)

    print(f"\nstep 4: Bob applies F and measures b -> {m}")
    expected4 = sum(
        np.exp(2j * np.pi * m * j / n) * c[j] * proj_psi[j] for j in range(n)
    )
    terms = []
    for j in range(n):
        if np.abs(proj_psi[j]).max() <= 1e-12:
            continue
        terms.append(f"{_phase_label(2 * m * j, n)}c{j}*P{j}|psi>")
    actual4 = stages[4].state.amplitudes.reshape(partition.dim, n, n)[:, l, m]
    label4 = " + ".join(terms) if terms else "0"
    print(f"  A register: {_cell_label(actual4, expected4, label4)}")
    print(f"  numeric: {_vec_text(actual4)}")

    print(f"\nstep 5: Alice applies the recovery R_{m}")
    final = stages[5].state.amplitudes.reshape(partition.dim, n, n)[:, l, m]
    expected5 = wang.assemble(partition, phases) @ state.amplitudes
    print(f"  A register: {_cell_label(final, expected5, 'U|psi> = sum_i c_i A_i |psi>')}")
    print(f"  numeric: {_vec_text(final)}")
    fid = float(abs(np.vdot(expected5, final)))
    print(f"  fidelity vs direct application: {fid:.12f}")

    branch = next(
        b for b in wang.run_wang(partition, phases, state) if (b.l, b.m) == (l, m)
    )
    print("\ntranscript:")
    for line in locc.transcript_lines(branch.transcript):
        print(f"  {line}")
    return 0


def _vec_text(vec: np.ndarray) -> str:
    return "[" + ", ".join(f"{z.real:+.6f}{z.imag:+.6f}i" for z in vec) + "]"


# --- cost ----------------------------------------------------------------------

def cmd_cost(args) -> int:
    problem = load_problem(args.file, args.input)
    if problem.kind == "wang":
        partition = problem.meta["partition"]
        blocks = partition.blocks
        dim = partition.dim
        protocol = "wang"
    elif problem.kind == "group":
        rep = problem.meta["rep"]
        blocks = rep.matrices
        dim = rep.dim
        protocol = "group"
    else:
        raise ValueError("cost supports wang and group problems only")

    comparison = entcost.compare_costs(blocks, dim, protocol=protocol)
    n = len(blocks)
    verdicts = [
        entcost.feasibility_test(entcost.FeasibilityInstance(tuple(blocks), d))
        for d in range(1, n + 1)
    ]
    if args.json:
        doc = {
            "rows": [r.to_dict() for r in comparison.rows],
            "wang_saves": comparison.wang_saves,
            "feasibility": [
                {
                    "d": d,
                    "feasible": v.feasible,
                    "operator_rank": v.operator_rank,
                    "certificate": v.certificate,
                    "maximal_entanglement_required": v.maximal_entanglement_required,
                }
                for d, v in zip(range(1, n + 1), verdicts)
            ],
        }
        print(json.dumps(doc, indent=2))
    else:
        print(entcost.render_cost_table(comparison.rows))
        saves = "yes" if comparison.wang_saves else "no"
        print(f"strict ebit saving over bqst: {saves}")
        print("\nfeasibility by resource Schmidt rank d:")
        for d, v in zip(range(1, n + 1), verdicts):
            status = "feasible" if v.feasible else "infeasible"
            print(f"  d={d}: {status} -- {v.certificate}")
        print(f"maximal entanglement required: {verdicts[0].maximal_entanglement_required}")
    return 0


# --- gen -------------------------------------------------------------------------

def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    partition = wang.random_partition(args.dim, args.blocks, rng)
    phases = wang.random_phases(partition.n, rng)
    doc = {
        "kind": "wang",
        "dim": partition.dim,
        "blocks": [matrix_to_json(b) for b in partition.blocks],
        "phases": vector_to_json(phases.values),
    }
    text = json.dumps(doc, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)
    return 0


# --- entry -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qremote",
        description="Run and audit remote-implementation protocols from JSON problem files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run all measurement branches and report fidelities")
    run.add_argument("file")
    run.add_argument("--json", action="store_true", help="machine-readable output")
    run.add_argument("--input", default=None, help="input state as JSON [re,im] pairs")
    run.add_argument("--tol", type=float, default=FIDELITY_TOL,
                     help="fidelity failure threshold is 1 - tol")
    run.set_defaults(func=cmd_run)

    trace = sub.add_parser("trace", help="step-by-step state tables for one branch")
    trace.add_argument("file")
    trace.add_argument("--branch", default="0,0", help="measurement outcomes 'l,m'")
    trace.add_argument("--input", default=None, help="input state as JSON [re,im] pairs")
    trace.set_defaults(func=cmd_trace)

    cost = sub.add_parser("cost", help="entanglement cost table and feasibility verdicts")
    cost.add_argument("file")
    cost.add_argument("--json", action="store_true", help="machine-readable output")
    cost.add_argument("--input", default=None, help="input state as JSON [re,im] pairs")
    cost.set_defaults(func=cmd_cost)

    gen = sub.add_parser("gen", help="generate a random wang problem file")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--dim", type=int, default=4)
    gen.add_argument("--blocks", type=int, default=3)
    gen.add_argument("--out", default=None, help="write to a file instead of stdout")
    gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QRemoteError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
