"""Branch-enumerated simulation of the fast and slow LOCC protocols for
controlled-Abelian-group and double-group bipartite unitaries, the
symmetrized double-group variant, and the Hilbert-space extension /
projector-compression circuits.

Measurement is never sampled: every outcome pair (l, m) is projected
exactly, so protocol correctness is an equality assertion per branch.

Subsystem ordering convention for the global state: A (x) a (x) b (x) B,
i.e. a 4-axis tensor of shape (d_A, N, N, d_B). All index arithmetic in this
module is written against that single convention.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .groups import (
    AbelianCycleStructure,
    FactorSystem,
    FiniteGroupTable,
    character_table,
    group_shift_matrix,
    weighted_inner,
)
from .hadamard import TCPair, certify_structure, verify_exchange, z_row_gate
from .linalg import (
    DEFAULT_TOL,
    PermutationCertificate,
    equal_up_to_global_phase,
    is_unitary,
)


class InvalidSpec(ValueError):
    pass


class InvalidRepresentation(ValueError):
    pass


class ProtocolViolation(RuntimeError):
    def __init__(self, message: str, l: int = -1, m: int = -1):
        super().__init__(message)
        self.l = l
        self.m = m


def apply_op(state: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Apply a matrix to the given tensor axes of a state (in axis order)."""
    axes = list(axes)
    dims = [state.shape[ax] for ax in axes]
    opt = np.asarray(op, dtype=complex).reshape(dims + dims)
    k = len(dims)
    moved = np.tensordot(opt, state, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(moved, list(range(k)), axes)


@dataclass
class BranchTranscript:
    """One measurement branch (l, m) of a protocol run."""

    l: int
    m: int
    probability: float
    phase: float  # global phase theta with  final = e^{i theta} * target(input)
    state: np.ndarray  # normalized final AB state, flattened
    correction: str = ""


# ---------------------------------------------------------------------------
# Controlled-Abelian-group specs


@dataclass
class ControlledUnitarySpec:
    """U = sum_{k in S} P_k (x) V_k with the V_k drawn from an ordinary
    representation of an Abelian cycle-product group.

    ``subset`` lists group-element indices; ``unitaries[i]`` is the d_B
    unitary attached to subset[i]. ``projectors[i]`` defaults to the rank-1
    projector |i><i| on a d_A = len(subset) space. ``full_rep``, when given,
    supplies V(g) for every group element; otherwise it is reconstructed by
    joint diagonalization and irreducible-label matching.
    """

    cycles: AbelianCycleStructure
    subset: Tuple[int, ...]
    unitaries: List[np.ndarray]
    projectors: Optional[List[np.ndarray]] = None
    full_rep: Optional[Dict[int, np.ndarray]] = None
    _cached_full: Optional[List[np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        self.subset = tuple(int(k) for k in self.subset)
        self.unitaries = [np.asarray(v, dtype=complex) for v in self.unitaries]
        if len(self.subset) != len(self.unitaries):
            raise InvalidSpec("subset and unitaries must have equal length")
        if len(set(self.subset)) != len(self.subset):
            raise InvalidSpec("subset contains duplicate group elements")
        n = self.cycles.order
        if any(not 0 <= k < n for k in self.subset):
            raise InvalidSpec("subset element out of range for the group order")
        if self.projectors is not None:
            self.projectors = [np.asarray(p, dtype=complex) for p in self.projectors]

    @property
    def d_B(self) -> int:
        return self.unitaries[0].shape[0]

    @property
    def d_A(self) -> int:
        if self.projectors is not None:
            return self.projectors[0].shape[0]
        return len(self.subset)

    def projector(self, i: int) -> np.ndarray:
        if self.projectors is not None:
            return self.projectors[i]
        p = np.zeros((self.d_A, self.d_A), dtype=complex)
        p[i, i] = 1.0
        return p

    def validate(self, tol: float = DEFAULT_TOL) -> None:
        for i, v in enumerate(self.unitaries):
            if not is_unitary(v, max(tol, 1e-8)):
                raise InvalidSpec(f"V for subset position {i} is not unitary")
        # representation consistency on the subset, where closed
        pos = {k: i for i, k in enumerate(self.subset)}
        for j, k in itertools.product(self.subset, repeat=2):
            jk = self.cycles.add(j, k)
            if jk in pos:
                res = np.max(
                    np.abs(
                        self.unitaries[pos[j]] @ self.unitaries[pos[k]]
                        - self.unitaries[pos[jk]]
                    )
                )
                if res > max(tol, 1e-8):
                    raise InvalidSpec(
                        f"V_j V_k != V_(j+k) for j={j}, k={k} (residual {res:.3e})"
                    )
        if self.projectors is not None:
            total = np.zeros((self.d_A, self.d_A), dtype=complex)
            for i, p in enumerate(self.projectors):
                if np.max(np.abs(p @ p - p)) > max(tol, 1e-8) or np.max(np.abs(p - p.conj().T)) > max(tol, 1e-8):
                    raise InvalidSpec(f"projector {i} is not an orthogonal projector")
                total = total + p
            for i in range(len(self.projectors)):
                for j in range(i + 1, len(self.projectors)):
                    if np.max(np.abs(self.projectors[i] @ self.projectors[j])) > max(tol, 1e-8):
                        raise InvalidSpec(f"projectors {i} and {j} are not orthogonal")
            if np.max(np.abs(total - np.eye(self.d_A))) > max(tol, 1e-8):
                raise InvalidSpec("projectors do not sum to the identity")

    # -- representation extension ------------------------------------------

    def full_representation(self, tol: float = 1e-8) -> List[np.ndarray]:
        """V(g) for every group element, extending the stored subset."""
        if self._cached_full is not None:
            return self._cached_full
        n = self.cycles.order
        if self.full_rep is not None:
            full = [np.asarray(self.full_rep[g], dtype=complex) for g in range(n)]
        else:
            w = _joint_eigenbasis(self.unitaries, tol)
            diags = np.array([np.diag(w.conj().T @ v @ w) for v in self.unitaries])
            labels = match_irrep_labels(self.cycles, self.subset, diags, tol)
            full = []
            for g in range(n):
                phases = np.array(
                    [
                        np.exp(2j * np.pi * weighted_inner(self.cycles, q, g))
                        for q in labels
                    ]
                )
                full.append(w @ np.diag(phases) @ w.conj().T)
        for i, k in enumerate(self.subset):
            if np.max(np.abs(full[k] - self.unitaries[i])) > max(tol, 1e-6):
                raise InvalidRepresentation(
                    f"extended representation disagrees with V at element {k}"
                )
        self._cached_full = full
        return full


def _joint_eigenbasis(mats: Sequence[np.ndarray], tol: float = 1e-8) -> np.ndarray:
    """Common eigenbasis of a family of commuting normal matrices."""
    d = mats[0].shape[0]
    if all(np.max(np.abs(m - np.diag(np.diag(m)))) <= tol for m in mats):
        return np.eye(d, dtype=complex)
    rng = np.random.default_rng(176400)
    for _ in range(50):
        h = np.zeros((d, d), dtype=complex)
        for m in mats:
            h += rng.normal() * (m + m.conj().T) + rng.normal() * 1j * (m - m.conj().T)
        _, w = np.linalg.eigh(h)
        if all(
            np.max(np.abs(w.conj().T @ m @ w - np.diag(np.diag(w.conj().T @ m @ w)))) <= tol
            for m in mats
        ):
            return w
    raise InvalidRepresentation("failed to find a joint eigenbasis; do the V_k commute?")


def match_irrep_labels(
    cycles: AbelianCycleStructure,
    subset: Sequence[int],
    diags: np.ndarray,
    tol: float = 1e-8,
) -> List[int]:
    """For each diagonal position b, the (lexicographically smallest) group
    element q whose one-dimensional representation matches the observed
    diagonal sequence over the subset."""
    n = cycles.order
    labels = []
    for b in range(diags.shape[1]):
        found = None
        for q in range(n):
            expect = np.array(
                [np.exp(2j * np.pi * weighted_inner(cycles, q, k)) for k in subset]
            )
            if np.max(np.abs(expect - diags[:, b])) <= max(tol, 1e-6):
                found = q
                break
        if found is None:
            raise InvalidRepresentation(
                f"diagonal sequence at position {b} matches no irreducible label"
            )
        labels.append(found)
    return labels


# ---------------------------------------------------------------------------
# Double-group specs


@dataclass
class DoubleGroupSpec:
    """U = sum_f c(f) U(f) (x) V(f) with {U(f) (x) V(f)} a projective
    representation carrying the stored factor system."""

    group: FiniteGroupTable
    u_ops: List[np.ndarray]
    v_ops: List[np.ndarray]
    coeffs: np.ndarray
    factor: FactorSystem
    tc: Optional[TCPair] = None

    def __post_init__(self):
        self.u_ops = [np.asarray(u, dtype=complex) for u in self.u_ops]
        self.v_ops = [np.asarray(v, dtype=complex) for v in self.v_ops]
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        n = self.group.order
        if not (len(self.u_ops) == len(self.v_ops) == len(self.coeffs) == n):
            raise InvalidSpec("operators and coefficients must cover every group element")

    @property
    def d_A(self) -> int:
        return self.u_ops[0].shape[0]

    @property
    def d_B(self) -> int:
        return self.v_ops[0].shape[0]

    def gamma(self, f: int) -> np.ndarray:
        return np.kron(self.u_ops[f], self.v_ops[f])

    def validate(self, tol: float = 1e-8) -> None:
        lam = self.factor.table
        n = self.group.order
        for g in range(n):
            for h in range(n):
                gh = self.group.mul(g, h)
                res = np.max(np.abs(self.gamma(g) @ self.gamma(h) - lam[g, h] * self.gamma(gh)))
                if res > tol:
                    raise InvalidSpec(
                        f"Gamma is not a projective representation at ({g},{h}): residual {res:.3e}"
                    )


# ---------------------------------------------------------------------------
# Targets and costs


def target_unitary(spec, tol: float = DEFAULT_TOL) -> np.ndarray:
    """The full bipartite unitary a spec describes; raises InvalidSpec when
    the sum fails to be unitary."""
    if isinstance(spec, ControlledUnitarySpec):
        u = np.zeros((spec.d_A * spec.d_B, spec.d_A * spec.d_B), dtype=complex)
        for i in range(len(spec.subset)):
            u += np.kron(spec.projector(i), spec.unitaries[i])
    elif isinstance(spec, DoubleGroupSpec):
        u = np.zeros((spec.d_A * spec.d_B, spec.d_A * spec.d_B), dtype=complex)
        for f in range(spec.group.order):
            u += spec.coeffs[f] * spec.gamma(f)
    else:
        raise TypeError(f"unsupported spec type {type(spec)!r}")
    if not is_unitary(u, max(tol, 1e-8)):
        raise InvalidSpec("spec does not describe a unitary operator")
    return u


def entanglement_cost(spec) -> float:
    """Resource cost in ebits: log2 of the order of the backing group."""
    if isinstance(spec, ControlledUnitarySpec):
        return float(np.log2(spec.cycles.order))
    if isinstance(spec, DoubleGroupSpec):
        return float(np.log2(spec.group.order))
    raise TypeError(f"unsupported spec type {type(spec)!r}")


def resource_state(n: int) -> np.ndarray:
    """|Phi> = sum_j |j>_a |j>_b / sqrt(N) as an (N, N) amplitude array."""
    return np.eye(n, dtype=complex) / np.sqrt(n)


# ---------------------------------------------------------------------------
# Controlled-group protocol simulations


def _prepare(spec_dA, spec_dB, n, input_state, b_weights=None) -> np.ndarray:
    psi = np.asarray(input_state, dtype=complex).reshape(spec_dA, spec_dB)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise InvalidSpec(f"input state is not normalized (norm {norm:.6f})")
    state = np.zeros((spec_dA, n, n, spec_dB), dtype=complex)
    for j in range(n):
        w = 1.0 if b_weights is None else b_weights[j]
        state[:, j, j, :] = w * psi / np.sqrt(n)
    return state


def _controlled_shift_op(spec: ControlledUnitarySpec) -> np.ndarray:
    """Sum_k P_k (x) X^{s_k} on A (x) a, shifting the ancilla by the group
    element labelling Alice's subspace."""
    n = spec.cycles.order
    op = np.zeros((spec.d_A * n, spec.d_A * n), dtype=complex)
    for i, k in enumerate(spec.subset):
        op += np.kron(spec.projector(i), group_shift_matrix(spec.cycles, k))
    return op


def _z_m_on_A(spec: ControlledUnitarySpec, m: int) -> np.ndarray:
    """Alice's correction sum_k exp(-2 pi i (k . m)) P_k (weighted inner)."""
    op = np.zeros((spec.d_A, spec.d_A), dtype=complex)
    for i, k in enumerate(spec.subset):
        op += np.exp(-2j * np.pi * weighted_inner(spec.cycles, k, m)) * spec.projector(i)
    return op


def _controlled_v_op(cycles_order: int, v_full: Sequence[np.ndarray]) -> np.ndarray:
    d_b = v_full[0].shape[0]
    op = np.zeros((cycles_order * d_b, cycles_order * d_b), dtype=complex)
    for j in range(cycles_order):
        proj = np.zeros((cycles_order, cycles_order), dtype=complex)
        proj[j, j] = 1.0
        op += np.kron(proj, v_full[j])
    return op


def _finish_branch(
    branch: np.ndarray,
    expected: np.ndarray,
    l: int,
    m: int,
    correction: str,
    tol: float,
    transcripts: List[BranchTranscript],
    check: bool,
) -> None:
    prob = float(np.vdot(branch, branch).real)
    if prob <= 1e-12:
        transcripts.append(
            BranchTranscript(l=l, m=m, probability=prob, phase=0.0, state=branch.flatten(), correction=correction)
        )
        return
    normalized = branch / np.sqrt(prob)
    theta = equal_up_to_global_phase(normalized, expected, max(tol, 1e-8))
    if theta is None and check:
        raise ProtocolViolation(
            f"branch (l={l}, m={m}) does not reproduce the target up to a phase", l, m
        )
    transcripts.append(
        BranchTranscript(
            l=l,
            m=m,
            probability=prob,
            phase=float(theta) if theta is not None else float("nan"),
            state=normalized.flatten(),
            correction=correction,
        )
    )


def simulate_fast_controlled(
    spec: ControlledUnitarySpec,
    input_state,
    tol: float = DEFAULT_TOL,
    check: bool = True,
) -> List[BranchTranscript]:
    """Single-round protocol: Alice's control-shift and measurement commute
    with Bob's controlled gate, Fourier gate and measurement; corrections are
    V_l^dag on B and the weighted diagonal Z_m on A."""
    n = spec.cycles.order
    v_full = spec.full_representation()
    state = _prepare(spec.d_A, spec.d_B, n, input_state)
    state = apply_op(state, _controlled_shift_op(spec), (0, 1))
    state = apply_op(state, _controlled_v_op(n, v_full), (2, 3))
    f_gate = character_table(spec.cycles) / np.sqrt(n)
    state = apply_op(state, f_gate, (2,))

    target = target_unitary(spec)
    psi = np.asarray(input_state, dtype=complex).reshape(-1)
    expected = (target @ psi).reshape(spec.d_A, spec.d_B)

    transcripts: List[BranchTranscript] = []
    for l in range(n):
        for m in range(n):
            branch = _z_m_on_A(spec, m) @ state[:, l, m, :] @ v_full[l].conj()
            _finish_branch(
                branch, expected, l, m, f"V({l})^dag on B; Z_{m} on A", tol, transcripts, check
            )
    return transcripts


def simulate_slow_controlled(
    spec: ControlledUnitarySpec,
    input_state,
    tol: float = DEFAULT_TOL,
    check: bool = True,
) -> List[BranchTranscript]:
    """Two-round oracle: Bob waits for l, inserts the shift X^l before his
    controlled gate, and Alice finishes with Z_m. Branch phases are exactly
    zero here, which makes this the reference for the fast variant."""
    n = spec.cycles.order
    v_full = spec.full_representation()
    state = _prepare(spec.d_A, spec.d_B, n, input_state)
    state = apply_op(state, _controlled_shift_op(spec), (0, 1))

    f_gate = character_table(spec.cycles) / np.sqrt(n)
    cv = _controlled_v_op(n, v_full)

    target = target_unitary(spec)
    psi = np.asarray(input_state, dtype=complex).reshape(-1)
    expected = (target @ psi).reshape(spec.d_A, spec.d_B)

    transcripts: List[BranchTranscript] = []
    for l in range(n):
        st = state[:, l, :, :]
        st = apply_op(st, group_shift_matrix(spec.cycles, l), (1,))
        st = apply_op(st, cv, (1, 2))
        st = apply_op(st, f_gate, (1,))
        for m in range(n):
            branch = _z_m_on_A(spec, m) @ st[:, m, :]
            _finish_branch(branch, expected, l, m, f"Z_{m} on A", tol, transcripts, check)
    return transcripts


# ---------------------------------------------------------------------------
# Double-group protocol simulations


def _controlled_rep_op(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Sum_f |f><f| (x) op(f) on ancilla (x) system."""
    n = len(ops)
    d = ops[0].shape[0]
    out = np.zeros((n * d, n * d), dtype=complex)
    for f in range(n):
        proj = np.zeros((n, n), dtype=complex)
        proj[f, f] = 1.0
        out += np.kron(proj, ops[f])
    return out


def correction_map(certificates: Sequence[PermutationCertificate], l: int, m: int) -> int:
    """Group element g for the final corrections: the row index of the
    nonzero entry in column m of the certified permutation for outcome l."""
    return certificates[l].row_of_column(m)


def simulate_fast_double(
    spec: DoubleGroupSpec,
    input_state,
    tol: float = DEFAULT_TOL,
    check: bool = True,
) -> List[BranchTranscript]:
    """Simultaneous-round protocol: both parties apply their controlled gates and
    basis changes (T on a, C on b), measure simultaneously, and correct with
    U(g)^dag (x) V(g)^dag where g is read off the exchange certificates."""
    if spec.tc is None:
        raise InvalidSpec("fast double-group simulation needs a TC pair on the spec")
    certs = verify_exchange(spec.tc, max(tol, 1e-8))
    n = spec.group.order
    state = _prepare(spec.d_A, spec.d_B, n, input_state)
    state = apply_op(state, _controlled_rep_op(spec.u_ops), (1, 0))
    state = apply_op(state, _controlled_rep_op(spec.v_ops), (2, 3))
    state = apply_op(state, spec.tc.T, (1,))
    state = apply_op(state, spec.tc.C, (2,))

    target = target_unitary(spec)
    psi = np.asarray(input_state, dtype=complex).reshape(-1)
    expected = (target @ psi).reshape(spec.d_A, spec.d_B)

    transcripts: List[BranchTranscript] = []
    for l in range(n):
        for m in range(n):
            g = correction_map(certs, l, m)
            branch = spec.u_ops[g].conj().T @ state[:, l, m, :] @ spec.v_ops[g].conj()
            _finish_branch(
                branch, expected, l, m, f"U({g})^dag (x) V({g})^dag", tol, transcripts, check
            )
    return transcripts


def simulate_slow_double(
    spec: DoubleGroupSpec,
    input_state,
    tol: float = DEFAULT_TOL,
    check: bool = True,
) -> List[BranchTranscript]:
    """Two-round oracle: Bob's Z_l undoes the phases of Alice's T row by
    row, so no group structure in T or C is needed; corrections are
    U(m)^dag (x) V(m)^dag."""
    if spec.tc is None:
        raise InvalidSpec("slow double-group simulation needs a TC pair on the spec")
    n = spec.group.order
    that = spec.tc.that
    state = _prepare(spec.d_A, spec.d_B, n, input_state)
    state = apply_op(state, _controlled_rep_op(spec.u_ops), (1, 0))
    state = apply_op(state, _controlled_rep_op(spec.v_ops), (2, 3))
    state = apply_op(state, spec.tc.T, (1,))

    target = target_unitary(spec)
    psi = np.asarray(input_state, dtype=complex).reshape(-1)
    expected = (target @ psi).reshape(spec.d_A, spec.d_B)

    transcripts: List[BranchTranscript] = []
    for l in range(n):
        st = state[:, l, :, :]
        st = apply_op(st, z_row_gate(that, l), (1,))
        st = apply_op(st, spec.tc.C, (1,))
        for m in range(n):
            branch = spec.u_ops[m].conj().T @ st[:, m, :] @ spec.v_ops[m].conj()
            _finish_branch(
                branch, expected, l, m, f"U({m})^dag (x) V({m})^dag", tol, transcripts, check
            )
    return transcripts


def simulate_symmetrized(
    spec: DoubleGroupSpec,
    input_state,
    tol: float = DEFAULT_TOL,
    check: bool = True,
) -> List[BranchTranscript]:
    """Symmetrized fast protocol: Bob's gate is T instead of C, the resource
    is (I (x) D)|Phi>, and the correction element is re-routed through the
    permutation P of the C = P T D decomposition."""
    if spec.tc is None:
        raise InvalidSpec("symmetrized simulation needs a TC pair on the spec")
    report = certify_structure(spec.tc.that, spec.tc.C, max(tol, 1e-8))
    certs = report.certificates
    n = spec.group.order
    state = _prepare(spec.d_A, spec.d_B, n, input_state, b_weights=report.D)
    state = apply_op(state, _controlled_rep_op(spec.u_ops), (1, 0))
    state = apply_op(state, _controlled_rep_op(spec.v_ops), (2, 3))
    state = apply_op(state, spec.tc.T, (1,))
    state = apply_op(state, spec.tc.T, (2,))

    target = target_unitary(spec)
    psi = np.asarray(input_state, dtype=complex).reshape(-1)
    expected = (target @ psi).reshape(spec.d_A, spec.d_B)

    transcripts: List[BranchTranscript] = []
    for l in range(n):
        for m in range(n):
            # outcome m of the T measurement corresponds to outcome j of the
            # C-gate protocol, with j the row of the nonzero entry in column
            # m of P
            j = report.P.row_of_column(m)
            g = correction_map(certs, l, j)
            branch = spec.u_ops[g].conj().T @ state[:, l, m, :] @ spec.v_ops[g].conj()
            _finish_branch(
                branch, expected, l, m, f"U({g})^dag (x) V({g})^dag", tol, transcripts, check
            )
    return transcripts


def check_branch_probabilities(transcripts: Sequence[BranchTranscript], tol: float = 1e-10) -> bool:
    return abs(sum(t.probability for t in transcripts) - 1.0) <= tol


def max_branch_residual(
    transcripts: Sequence[BranchTranscript], target: np.ndarray, input_state
) -> float:
    """Largest per-branch max-norm deviation from the phase-aligned target."""
    psi = np.asarray(input_state, dtype=complex).reshape(-1)
    expected = target @ psi
    worst = 0.0
    for t in transcripts:
        if t.probability <= 1e-12:
            continue
        worst = max(worst, float(np.max(np.abs(t.state - np.exp(1j * t.phase) * expected))))
    return worst


# ---------------------------------------------------------------------------
# Hilbert-space extension and projector compression


@dataclass
class EmbeddingMap:
    """Isometry realizing either the space extension (inputs relocated into a
    larger control space) or the projector compression (higher-rank control
    blocks flattened to rank one)."""

    mode: str  # "extension" | "compression"
    isometry: np.ndarray  # (d_Aprime * d_Eprime) x d_A
    d_A: int
    d_Aprime: int
    d_Eprime: int

    def check_isometry(self, tol: float = DEFAULT_TOL) -> bool:
        v = self.isometry
        return np.max(np.abs(v.conj().T @ v - np.eye(self.d_A))) <= max(tol, 1e-10)


def embed_unitary(
    u: np.ndarray,
    d_a: int,
    d_b: int,
    r_block: np.ndarray,
    tol: float = 1e-10,
) -> Tuple[EmbeddingMap, float]:
    """Run the extension circuit: transfer Alice's input into a larger space,
    apply U' = U_0 (+) R there, and transfer back. Returns the map and the
    max-norm residual of (V^dag (x) I) U' (V (x) I) against u."""
    u = np.asarray(u, dtype=complex)
    r_block = np.asarray(r_block, dtype=complex)
    if u.shape != (d_a * d_b, d_a * d_b):
        raise InvalidSpec(f"unitary of shape {u.shape} does not match d_A={d_a}, d_B={d_b}")
    if r_block.shape[0] % d_b != 0:
        raise InvalidSpec("R block dimension is not a multiple of d_B")
    d_r = r_block.shape[0] // d_b
    d_eprime = d_a + d_r

    # isometry |k>_A -> |0>_A' |k>_E' with a one-dimensional A'
    v = np.zeros((d_eprime, d_a), dtype=complex)
    v[:d_a, :] = np.eye(d_a)

    uprime = np.zeros((d_eprime * d_b, d_eprime * d_b), dtype=complex)
    uprime[: d_a * d_b, : d_a * d_b] = u
    uprime[d_a * d_b :, d_a * d_b :] = r_block
    if not is_unitary(uprime, 1e-8):
        raise InvalidSpec("U' = U (+) R is not unitary; check the R block")

    vb = np.kron(v, np.eye(d_b))
    composite = vb.conj().T @ uprime @ vb
    residual = float(np.max(np.abs(composite - u)))
    emb = EmbeddingMap(mode="extension", isometry=v, d_A=d_a, d_Aprime=1, d_Eprime=d_eprime)
    if not emb.check_isometry(tol):
        raise InvalidSpec("embedding map is not an isometry")
    return emb, residual


def compress_controlled(
    spec: ControlledUnitarySpec, tol: float = 1e-10
) -> Tuple[ControlledUnitarySpec, EmbeddingMap, float]:
    """Flatten higher-rank control projectors to rank one on a larger control
    register: |k,r>_A -> |r>_A' |k>_E', then control on E' alone. Returns the
    rank-one spec, the embedding and the circuit-identity residual."""
    if spec.projectors is None:
        compressed = ControlledUnitarySpec(
            cycles=spec.cycles,
            subset=spec.subset,
            unitaries=[v.copy() for v in spec.unitaries],
            full_rep=spec.full_rep,
        )
        n_s = len(spec.subset)
        identity = EmbeddingMap(
            mode="compression",
            isometry=np.eye(n_s, dtype=complex),
            d_A=n_s,
            d_Aprime=1,
            d_Eprime=n_s,
        )
        return compressed, identity, 0.0

    spec.validate()
    d_a, d_b = spec.d_A, spec.d_B
    n_s = len(spec.subset)
    bases = []
    for i in range(n_s):
        vals, vecs = np.linalg.eigh(spec.projector(i))
        support = vecs[:, vals > 0.5]
        bases.append(support)
    max_rank = max(b.shape[1] for b in bases)
    d_aprime, d_eprime = max_rank, n_s

    v = np.zeros((d_aprime * d_eprime, d_a), dtype=complex)
    for k_pos, b in enumerate(bases):
        for r in range(b.shape[1]):
            # output basis index for |r>_A' |k>_E'
            v[r * d_eprime + k_pos, :] += b[:, r].conj()
    emb = EmbeddingMap(
        mode="compression", isometry=v, d_A=d_a, d_Aprime=d_aprime, d_Eprime=d_eprime
    )
    if not emb.check_isometry(tol):
        raise InvalidSpec("compression map is not an isometry")

    compressed = ControlledUnitarySpec(
        cycles=spec.cycles,
        subset=spec.subset,
        unitaries=[u.copy() for u in spec.unitaries],
        full_rep=spec.full_rep,
    )
    uprime = target_unitary(compressed)  # rank-one controls on E' (x) B

    vb = np.kron(v, np.eye(d_b))
    # A' is a spectator: U' acts on E' (x) B inside A' (x) E' (x) B
    full_uprime = np.kron(np.eye(d_aprime), uprime)
    composite = vb.conj().T @ full_uprime @ vb
    residual = float(np.max(np.abs(composite - target_unitary(spec))))
    return compressed, emb, residual
