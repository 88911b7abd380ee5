"""Remote implementation of block-structured operations U = sum_i c_i A_i.

The operation class: blocks A_i with A_i^dag A_j = 0 for i != j and
sum_i A_i^dag A_i = I, combined with unimodular coefficients c_i known only
to Bob. Alice's side of the protocol (the controlled shift P and the
recovery R_m) is built from the block structure alone; the coefficient
vector lives in a separate Bob-side object so that ignorance is enforced by
construction, not convention.

Each block factors as A_i = sum_j |v_j^(i)><u_j^(i)| over two full
orthonormal systems {u}, {v}; the per-block singular vectors drive both P
(projectors onto the u-spans) and R_m (u -> v exchange with outcome-dependent
phases).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import locc, qcore
from .errors import (
    DimensionMismatch,
    IncompleteBlocks,
    NonUnitary,
    OverlappingBlocks,
)
from .locc import ALICE, BOB, Branch, ConditionalStep, LocalStep, MeasureStep, Program
from .qcore import StateVector


@dataclass(frozen=True)
class BlockPartition:
    """Validated block structure {A_i}: the public half of the operation."""

    blocks: tuple[np.ndarray, ...]
    u: tuple[np.ndarray, ...]       # columns u_j^(i), per block
    v: tuple[np.ndarray, ...]       # columns v_j^(i), per block
    ranks: tuple[int, ...]
    dim: int

    @property
    def n(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class Phases:
    """Bob's private coefficient vector, one unimodular scalar per block."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).reshape(-1)
        if np.abs(np.abs(vals) - 1.0).max() > qcore.NORM_TOL:
            raise ValueError("coefficients must have modulus 1")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class WangStepSet:
    """The five branch operators for outcomes (l, m); all unitary."""

    controlled_shift: np.ndarray   # P on (A, a)
    shift_correction: np.ndarray   # X^l on b
    phase_gate: np.ndarray         # C on b
    fourier: np.ndarray            # F on b
    recovery: np.ndarray           # R_m on A


def validate_partition(blocks) -> BlockPartition:
    """Check the operation-class conditions and extract per-block {u, v} bases.

    Raises OverlappingBlocks if any A_i^dag A_j != 0 (i != j) and
    IncompleteBlocks if sum_i A_i^dag A_i != I. The singular bases returned
    are whatever the SVD produces; any valid pair of systems works, so no
    canonical choice is attempted, but the extracted structure is re-checked
    against the blocks before use.
    """
    mats = tuple(np.asarray(b, dtype=complex) for b in blocks)
    if not mats:
        raise IncompleteBlocks("a partition needs at least one block")
    dim = mats[0].shape[0]
    for i, b in enumerate(mats):
        if b.ndim != 2 or b.shape != (dim, dim):
            raise DimensionMismatch(
                f"block {i} has shape {b.shape}, expected ({dim}, {dim})"
            )
    for i in range(len(mats)):
        for j in range(len(mats)):
            if i == j:
                continue
            overlap = np.abs(mats[i].conj().T @ mats[j]).max()
            if overlap > qcore.NORM_TOL:
                raise OverlappingBlocks(
                    f"blocks {i} and {j} overlap: max |A_i^dag A_j| = {overlap:.3e}"
                )
    gram = sum(b.conj().T @ b for b in mats)
    dev = np.abs(gram - np.eye(dim)).max()
    if dev > qcore.NORM_TOL:
        raise IncompleteBlocks(
            f"sum A_i^dag A_i deviates from identity by {dev:.3e}"
        )

    u_sets, v_sets, ranks = [], [], []
    for i, b in enumerate(mats):
        w, s, vh = np.linalg.svd(b)
        r = int(np.count_nonzero(s > qcore.RANK_TOL))
        if r and np.abs(s[:r] - 1.0).max() > 1e-8:
            raise IncompleteBlocks(
                f"block {i} has singular values {s[:r]} != 1; "
                "it cannot belong to a unitary combination"
            )
        u_sets.append(vh[:r].conj().T)
        v_sets.append(w[:, :r])
        ranks.append(r)
    if sum(ranks) != dim:
        raise IncompleteBlocks(
            f"block ranks {tuple(ranks)} do not sum to the dimension {dim}"
        )
    for i, b in enumerate(mats):
        rebuilt = v_sets[i] @ u_sets[i].conj().T
        if np.abs(rebuilt - b).max() > 1e-8:
            raise IncompleteBlocks(f"block {i} does not match its singular form")
    return BlockPartition(mats, tuple(u_sets), tuple(v_sets), tuple(ranks), dim)


def diagonal_partition(dim: int) -> BlockPartition:
    """Rank-1 blocks |i><i|: the diagonal-operation special case."""
    eye = np.eye(dim, dtype=complex)
    return validate_partition([np.outer(eye[:, i], eye[:, i]) for i in range(dim)])


def partition_from_bases(u_basis: np.ndarray, v_basis: np.ndarray, sizes) -> BlockPartition:
    """Build blocks A_i = sum_{j in group i} |v_j><u_j| from two orthonormal bases."""
    u_basis = np.asarray(u_basis, dtype=complex)
    v_basis = np.asarray(v_basis, dtype=complex)
    dim = u_basis.shape[0]
    if sum(sizes) != dim:
        raise DimensionMismatch(f"group sizes {tuple(sizes)} must sum to {dim}")
    blocks, start = [], 0
    for size in sizes:
        cols = slice(start, start + size)
        blocks.append(v_basis[:, cols] @ u_basis[:, cols].conj().T)
        start += size
    return validate_partition(blocks)


def random_partition(dim: int, n_blocks: int, rng: np.random.Generator) -> BlockPartition:
    """Random valid partition: random bases split into n_blocks groups."""
    if not 1 <= n_blocks <= dim:
        raise DimensionMismatch(f"need 1 <= blocks <= dim, got {n_blocks} at dim {dim}")
    cuts = np.sort(rng.choice(np.arange(1, dim), size=n_blocks - 1, replace=False))
    sizes = np.diff(np.concatenate(([0], cuts, [dim])))
    return partition_from_bases(
        qcore.random_unitary(dim, rng), qcore.random_unitary(dim, rng), sizes
    )


def random_phases(n: int, rng: np.random.Generator) -> Phases:
    return Phases(np.exp(2j * np.pi * rng.uniform(size=n)))


def projectors(p: BlockPartition) -> list[np.ndarray]:
    """P_i = sum_j |u_j^(i)><u_j^(i)|, the projectors onto the u-spans."""
    return [u @ u.conj().T for u in p.u]


def assemble(p: BlockPartition, phases: Phases) -> np.ndarray:
    """Direct matrix sum_i c_i A_i (the operation the protocol must reproduce)."""
    if len(phases) != p.n:
        raise DimensionMismatch(f"{len(phases)} coefficients for {p.n} blocks")
    total = sum(c * b for c, b in zip(phases.values, p.blocks))
    if not qcore.is_unitary(total):
        raise NonUnitary("sum c_i A_i is not unitary")
    return total


def controlled_shift(p: BlockPartition) -> np.ndarray:
    """P = sum_i P_i (x) X^i on (A, a): shifts the ancilla by the block index."""
    shift = qcore.shift_matrix(p.n)
    power = np.eye(p.n, dtype=complex)
    total = np.zeros((p.dim * p.n, p.dim * p.n), dtype=complex)
    for proj in projectors(p):
        total += np.kron(proj, power)
        power = shift @ power
    return total


def phase_gate(phases: Phases) -> np.ndarray:
    """Bob's C = diag(c_0 .. c_{N-1})."""
    return np.diag(phases.values)


def recovery(p: BlockPartition, m: int) -> np.ndarray:
    """R_m = sum_j e^{-2 pi i m j / N} sum_k |v_k^(j)><u_k^(j)|."""
    total = np.zeros((p.dim, p.dim), dtype=complex)
    for j in range(p.n):
        phase = np.exp(-2j * np.pi * m * j / p.n)
        total += phase * (p.v[j] @ p.u[j].conj().T)
    return total


def build_steps(p: BlockPartition, phases: Phases, l: int, m: int) -> WangStepSet:
    """All five branch operators for measurement outcomes (l, m)."""
    if len(phases) != p.n:
        raise DimensionMismatch(f"{len(phases)} coefficients for {p.n} blocks")
    steps = WangStepSet(
        controlled_shift=controlled_shift(p),
        shift_correction=np.linalg.matrix_power(qcore.shift_matrix(p.n), l),
        phase_gate=phase_gate(phases),
        fourier=qcore.fourier_matrix(p.n),
        recovery=recovery(p, m),
    )
    for name, op in (
        ("P", steps.controlled_shift),
        ("X^l", steps.shift_correction),
        ("C", steps.phase_gate),
        ("F", steps.fourier),
        ("R_m", steps.recovery),
    ):
        if not qcore.is_unitary(op):
            raise NonUnitary(f"step operator {name} failed the unitarity check")
    return steps


def wang_program(p: BlockPartition, phases: Phases) -> Program:
    """The five-step program on registers (A, a, b) = (Alice, Alice, Bob)."""
    if len(phases) != p.n:
        raise DimensionMismatch(f"{len(phases)} coefficients for {p.n} blocks")
    shift = qcore.shift_matrix(p.n)
    return Program(
        owners=locc.PROTOCOL_OWNERS,
        steps=(
            LocalStep(ALICE, "P", controlled_shift(p), (0, 1)),
            MeasureStep(ALICE, 1, "l", send_to=BOB),
            ConditionalStep(
                BOB, "X^l", lambda l: np.linalg.matrix_power(shift, l), (2,), "l"
            ),
            LocalStep(BOB, "C", phase_gate(phases), (2,)),
            LocalStep(BOB, "F", qcore.fourier_matrix(p.n), (2,)),
            MeasureStep(BOB, 2, "m", send_to=ALICE),
            ConditionalStep(ALICE, "R_m", lambda m: recovery(p, m), (0,), "m"),
        ),
    )


@dataclass(frozen=True)
class WangBranch:
    l: int
    m: int
    probability: float
    transcript: locc.Transcript
    state: StateVector             # full (A, a, b) register state
    output: StateVector            # the A register, disentangled


def _wrap_branch(branch: Branch) -> WangBranch:
    return WangBranch(
        l=branch.transcript.outcome("l"),
        m=branch.transcript.outcome("m"),
        probability=branch.transcript.probability,
        transcript=branch.transcript,
        state=branch.state,
        output=qcore.factor_state(branch.state, 0),
    )


def run_wang(p: BlockPartition, phases: Phases, input_state: StateVector) -> list[WangBranch]:
    """Execute the protocol over every (l, m) branch.

    Each branch ends with the A register holding sum_i c_i A_i applied to the
    input, up to a global phase, and both resource registers in basis states.
    """
    if input_state.dim != p.dim:
        raise DimensionMismatch(
            f"input dimension {input_state.dim} does not match blocks ({p.dim})"
        )
    initial = qcore.tensor(input_state, locc.maximally_entangled(p.n).to_state())
    branches = locc.run_protocol(wang_program(p, phases), initial)
    return [_wrap_branch(b) for b in branches]


@dataclass(frozen=True)
class TraceStage:
    name: str
    state: StateVector


def trace_branch(
    p: BlockPartition, phases: Phases, input_state: StateVector, l: int, m: int
) -> list[TraceStage]:
    """States after each protocol step, conditioned on outcomes (l, m).

    Stage order: initial, controlled shift, measurement of a plus Bob's X^l,
    phase gate, Fourier plus measurement of b, recovery. Measured stages are
    renormalized, so stage states match the branch states of run_wang.
    """
    steps = build_steps(p, phases, l, m)
    state = qcore.tensor(input_state, locc.maximally_entangled(p.n).to_state())
    stages = [TraceStage("initial", state)]

    state = qcore.apply_local(steps.controlled_shift, state, (0, 1))
    stages.append(TraceStage("controlled shift", state))

    state = _pick_outcome(state, 1, l)
    state = qcore.apply_local(steps.shift_correction, state, (2,))
    stages.append(TraceStage(f"measure a={l}, correct X^{l}", state))

    state = qcore.apply_local(steps.phase_gate, state, (2,))
    stages.append(TraceStage("phase gate", state))

    state = qcore.apply_local(steps.fourier, state, (2,))
    state = _pick_outcome(state, 2, m)
    stages.append(TraceStage(f"fourier, measure b={m}", state))

    state = qcore.apply_local(steps.recovery, state, (0,))
    stages.append(TraceStage("recovery", state))
    return stages


def _pick_outcome(state: StateVector, target: int, outcome: int) -> StateVector:
    for branch in qcore.measure_computational(state, target):
        if branch.outcome == outcome:
            return branch.post_state
    raise ValueError(f"outcome {outcome} on factor {target} has vanishing probability")


# --- remote implementation of arbitrary unitaries --------------------------

@dataclass(frozen=True)
class RemoteSvdProgram:
    """Three-stage split U = post . diag(d) . pre with unimodular diagonal d.

    pre and post are published to Alice; the diagonal entries d stay with Bob
    and are implemented remotely through the diagonal-block protocol.
    """

    pre: np.ndarray
    post: np.ndarray
    diagonal: np.ndarray
    partition: BlockPartition
    phases: Phases


def svd_remote(unitary: np.ndarray, p_diag: BlockPartition | None = None) -> RemoteSvdProgram:
    """Split a unitary for remote implementation of its diagonal factor.

    Singular values of a unitary are all 1; the singular-vector phase freedom
    is folded into the diagonal factor so that the published matrices carry
    no coefficient information (for an already-diagonal input they reduce to
    the identity).
    """
    u_mat = np.asarray(unitary, dtype=complex)
    if not qcore.is_unitary(u_mat):
        raise NonUnitary("svd_remote needs a unitary input")
    dim = u_mat.shape[0]
    w, s, vh = np.linalg.svd(u_mat)
    # all singular values are 1, so the triplet order is arbitrary; align each
    # right vector with its dominant column so a diagonal input stays diagonal
    order = np.argsort(np.abs(vh).argmax(axis=1), kind="stable")
    w, s, vh = w[:, order], s[order], vh[order, :]
    # fold the leading-entry phase of each singular vector into the diagonal
    w_lead = w[np.abs(w).argmax(axis=0), np.arange(dim)]
    w_phase = w_lead / np.abs(w_lead)
    vh_lead = vh[np.arange(dim), np.abs(vh).argmax(axis=1)]
    vh_phase = vh_lead / np.abs(vh_lead)
    post = w / w_phase
    pre = vh / vh_phase[:, None]
    diag = w_phase * s * vh_phase
    if np.abs(np.abs(diag) - 1.0).max() > qcore.NORM_TOL:
        raise NonUnitary("diagonal factor is not unimodular")
    partition = p_diag if p_diag is not None else diagonal_partition(dim)
    return RemoteSvdProgram(
        pre=pre,
        post=post,
        diagonal=diag,
        partition=partition,
        phases=Phases(diag),
    )


@dataclass(frozen=True)
class SvdRemoteBranch:
    l: int
    m: int
    probability: float
    transcript: locc.Transcript
    output: StateVector


def run_svd_remote(program: RemoteSvdProgram, input_state: StateVector) -> list[SvdRemoteBranch]:
    """local pre, remote diagonal, local post; one result per (l, m) branch."""
    mid = qcore.apply_local(program.pre, input_state, (0,))
    results = []
    for branch in run_wang(program.partition, program.phases, mid):
        out = qcore.apply_local(program.post, branch.output, (0,))
        results.append(
            SvdRemoteBranch(branch.l, branch.m, branch.probability, branch.transcript, out)
        )
    return results
