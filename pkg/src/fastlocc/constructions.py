"""Coefficient and matrix constructions: the coefficient matrix C, the three
fast-protocol conditions, the exhaustive roots-of-unity coefficient search,
the cyclic/dihedral coefficient families, the controlled-to-double-group
conversion, and the phase/diagonal approximation builders.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .groups import (
    AbelianCycleStructure,
    FactorSystem,
    FiniteGroupTable,
    is_normalized_factor_system,
    weighted_inner,
)
from .hadamard import TCPair, rows_form_group, ConditionOneViolated
from .linalg import (
    DEFAULT_TOL,
    KakInvariants,
    identity_certificate,
    is_unitary,
    kak_invariants,
    operator_schmidt_rank,
    PermutationCertificate,
)
from .protocols import (
    ControlledUnitarySpec,
    DoubleGroupSpec,
    InvalidSpec,
    _joint_eigenbasis,
    match_irrep_labels,
)


class CoefficientConditionError(ValueError):
    """Raised when a coefficient set fails one of the fast-protocol conditions."""


class BudgetExhausted(RuntimeError):
    pass


def build_c_matrix(group: FiniteGroupTable, factor: FactorSystem, c) -> np.ndarray:
    """N x N matrix with entry (g, f) = lambda(g, g^-1 f) * c(g^-1 f)."""
    c = np.asarray(c, dtype=complex)
    n = group.order
    out = np.empty((n, n), dtype=complex)
    for g in range(n):
        ginv = group.inv(g)
        for f in range(n):
            h = group.mul(ginv, f)
            out[g, f] = factor(g, h) * c[h]
    return out


@dataclass
class FastConditionReport:
    """Verdicts for the three conditions a coefficient set must satisfy:
    (i) equal magnitudes 1/sqrt(N), (ii) unitary C, (iii) normalized rows of
    sqrt(N) C close into a group."""

    equal_magnitude: bool
    c_unitary: bool
    rows_group: Optional[FiniteGroupTable]
    diagnostics: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.equal_magnitude and self.c_unitary and self.rows_group is not None


def check_fast_conditions(
    group: FiniteGroupTable, factor: FactorSystem, c, tol: float = DEFAULT_TOL
) -> FastConditionReport:
    c = np.asarray(c, dtype=complex)
    n = group.order
    diagnostics: List[str] = []

    dev = float(np.max(np.abs(np.abs(c) - 1.0 / np.sqrt(n))))
    equal_magnitude = dev <= max(tol, 1e-9)
    if not equal_magnitude:
        diagnostics.append(f"condition (i): |c(f)| deviates from 1/sqrt(N) by {dev:.3e}")

    cmat = build_c_matrix(group, factor, c)
    c_unitary = is_unitary(cmat, max(tol, 1e-8))
    if not c_unitary:
        diagnostics.append("condition (ii): C matrix is not unitary")

    rows_group = None
    if equal_magnitude and c_unitary:
        try:
            res = rows_form_group(np.sqrt(n) * cmat, tol)
        except (ValueError, ConditionOneViolated) as exc:
            res = None
            diagnostics.append(f"condition (iii): {exc}")
        if res is None:
            if not diagnostics or not diagnostics[-1].startswith("condition (iii)"):
                diagnostics.append("condition (iii): normalized rows do not close into a group")
        else:
            rows_group = res[0]
    elif equal_magnitude or c_unitary:
        diagnostics.append("condition (iii): skipped, earlier condition failed")

    return FastConditionReport(
        equal_magnitude=equal_magnitude,
        c_unitary=c_unitary,
        rows_group=rows_group,
        diagnostics=diagnostics,
    )


def tc_from_coefficients(
    group: FiniteGroupTable, factor: FactorSystem, c, tol: float = DEFAULT_TOL
) -> TCPair:
    """The canonical (T, C) pair of a passing coefficient set: C from the
    coefficient matrix, T the recovered character table over sqrt(N)."""
    c = np.asarray(c, dtype=complex)
    n = group.order
    report = check_fast_conditions(group, factor, c, tol)
    if not report.passed:
        raise CoefficientConditionError("; ".join(report.diagnostics) or "conditions failed")
    cmat = build_c_matrix(group, factor, c)
    res = rows_form_group(np.sqrt(n) * cmat, tol)
    assert res is not None
    _, q, r = res
    khat = (np.sqrt(n) * cmat) * r[np.newaxis, :] * q[:, np.newaxis]
    m_cert = PermutationCertificate(tuple(range(n)), tuple(complex(1.0 / x) for x in q))
    d = 1.0 / r
    from .hadamard import build_tc

    return build_tc(khat, identity_certificate(n), m_cert, d, tol)


# ---------------------------------------------------------------------------
# Exhaustive coefficient search


@dataclass
class SearchHit:
    kvec: Tuple[int, ...]  # root exponents for the non-identity elements
    coeffs: np.ndarray
    target_unitary_ok: bool
    is_product: bool
    kak: Optional[KakInvariants]


@dataclass
class SearchResult:
    hits: List[SearchHit]
    examined: int
    truncated: bool


def coefficient_search(
    group: FiniteGroupTable,
    u_ops: Sequence[np.ndarray],
    v_ops: Sequence[np.ndarray],
    factor: FactorSystem,
    budget: int = 10_000_000,
    tol: float = DEFAULT_TOL,
    classify: bool = True,
) -> SearchResult:
    """Enumerate every coefficient set c(f) = exp(2 pi i k(f)/N^2)/sqrt(N)
    with c(e) = 1/sqrt(N) and keep those passing all three conditions.

    The grid has (N^2)^(N-1) candidates; enumeration stops (truncated=True)
    once ``budget`` candidates have been examined.
    """
    if not is_normalized_factor_system(factor, group.order):
        raise ValueError("search requires a normalized factor system")
    n = group.order
    others = [f for f in range(n) if f != group.identity]
    hits: List[SearchHit] = []
    examined = 0
    truncated = False
    base = 1.0 / np.sqrt(n)
    d_a, d_b = u_ops[0].shape[0], v_ops[0].shape[0]
    for kvec in itertools.product(range(n * n), repeat=len(others)):
        if examined >= budget:
            truncated = True
            break
        examined += 1
        c = np.full(n, base, dtype=complex)
        for f, k in zip(others, kvec):
            c[f] = base * np.exp(2j * np.pi * k / (n * n))
        report = check_fast_conditions(group, factor, c, tol)
        if not report.passed:
            continue
        target = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
        for f in range(n):
            target += c[f] * np.kron(u_ops[f], v_ops[f])
        ok = is_unitary(target, max(tol, 1e-8))
        is_product = ok and operator_schmidt_rank(target, d_a, d_b, max(tol, 1e-8)) == 1
        kak = None
        if classify and ok and d_a == 2 and d_b == 2:
            kak = kak_invariants(target)
        hits.append(
            SearchHit(
                kvec=tuple(kvec),
                coeffs=c,
                target_unitary_ok=ok,
                is_product=is_product,
                kak=kak,
            )
        )
    return SearchResult(hits=hits, examined=examined, truncated=truncated)


# ---------------------------------------------------------------------------
# Coefficient families


def cyclic_coeffs(n: int) -> np.ndarray:
    """c(f) = exp(-i pi f^2/n)/sqrt(n) for even n, exp(-i pi f(f+1)/n)/sqrt(n) odd."""
    if n < 1:
        raise ValueError(f"cyclic_coeffs needs n >= 1, got {n}")
    f = np.arange(n)
    if n % 2 == 0:
        phase = -np.pi * f * f / n
    else:
        phase = -np.pi * f * (f + 1) / n
    return np.exp(1j * phase) / np.sqrt(n)


def dihedral_coeffs(n: int, m: int) -> np.ndarray:
    """The 2n coefficients over the dihedral group of order 2n: a quadratic
    root-of-unity phase times epsilon(f), which is 1 on rotations and i on
    reflections. m must be coprime with n."""
    if n < 2:
        raise ValueError(f"dihedral_coeffs needs n >= 2, got {n}")
    if m < 1 or math.gcd(m, n) != 1:
        raise ValueError(f"m={m} must be a positive integer coprime with n={n}")
    f = np.arange(2 * n)
    eps = np.where(f < n, 1.0 + 0j, 1j)
    if n % 2 == 0:
        phase = np.pi * m * f * f / n
    else:
        phase = np.pi * m * f * (f + 1) / n
    return eps * np.exp(1j * phase) / np.sqrt(2 * n)


# ---------------------------------------------------------------------------
# Controlled-to-double-group conversion


@dataclass
class ConversionResult:
    """Witnesses of the conversion of a controlled-Abelian-group unitary into
    a double-group form W = sum_f c(f) Q(f) (x) R(f) with
    (M_A (x) M_B) W = U."""

    q_ops: List[np.ndarray]
    r_ops: List[np.ndarray]
    coeffs: np.ndarray
    zeta: np.ndarray  # phases zeta[k position, b]
    labels: List[int]  # irreducible label q_b per basis index b
    m_a: np.ndarray
    m_b: np.ndarray
    residual: float
    double_spec: DoubleGroupSpec


def _component_coeff(r: int, f: int) -> complex:
    return np.exp(-1j * np.pi * f * ((r % 2) + f) / r) / np.sqrt(r)


def conversion_coeffs(cycles: AbelianCycleStructure) -> np.ndarray:
    """c(f) as a product of per-cycle quadratic phases; reduces to the cyclic
    family when there is a single cycle."""
    n = cycles.order
    out = np.empty(n, dtype=complex)
    for f in range(n):
        ft = cycles.index_to_tuple(f)
        val = 1.0 + 0j
        for r, fs in zip(cycles.cycles, ft):
            val *= _component_coeff(r, fs)
        out[f] = val
    return out


def convert_to_double_group(
    spec: ControlledUnitarySpec, tol: float = DEFAULT_TOL
) -> ConversionResult:
    """Convert a controlled spec with diagonal V_k into double-group form.

    The V_k must be diagonal in the stored basis (use diagonalize_controlled
    first otherwise). Subsets are supported: projectors absent from the sum
    simply never appear in Q(f) or M_A.
    """
    cycles = spec.cycles
    n = cycles.order
    for i, v in enumerate(spec.unitaries):
        if np.max(np.abs(v - np.diag(np.diag(v)))) > max(tol, 1e-9):
            raise InvalidSpec(
                f"V at subset position {i} is not diagonal; diagonalize the spec first"
            )
    diags = np.array([np.diag(v) for v in spec.unitaries])
    labels = match_irrep_labels(cycles, spec.subset, diags, tol)
    d_b = spec.d_B

    c = conversion_coeffs(cycles)

    q_ops = []
    r_ops = []
    for f in range(n):
        q = np.zeros((spec.d_A, spec.d_A), dtype=complex)
        for i, k in enumerate(spec.subset):
            q += np.exp(-2j * np.pi * weighted_inner(cycles, f, k)) * spec.projector(i)
        q_ops.append(q)
        r = np.diag(
            np.array(
                [np.exp(-2j * np.pi * weighted_inner(cycles, f, labels[b])) for b in range(d_b)]
            )
        )
        r_ops.append(r)

    # zeta[i, b]: the eigenphase W puts on states in (support of P_i) x |b>
    zeta = np.zeros((len(spec.subset), d_b), dtype=complex)
    for i, k in enumerate(spec.subset):
        for b in range(d_b):
            zeta[i, b] = sum(
                c[f]
                * np.exp(-2j * np.pi * weighted_inner(cycles, f, k))
                * np.exp(-2j * np.pi * weighted_inner(cycles, f, labels[b]))
                for f in range(n)
            )
    if np.max(np.abs(np.abs(zeta) - 1.0)) > max(tol, 1e-8):
        raise InvalidSpec("conversion produced non-unimodular eigenphases")

    # diagonal local corrections: solve a_i * b_b * zeta[i,b] = V_{k_i}[b]
    a = diags[:, 0] * zeta[:, 0].conj()
    b_phases = (diags[0, :] * zeta[0, :].conj()) / (diags[0, 0] * zeta[0, 0].conj())
    m_a = np.zeros((spec.d_A, spec.d_A), dtype=complex)
    for i in range(len(spec.subset)):
        m_a += a[i] * spec.projector(i)
    m_b = np.diag(b_phases)

    w = np.zeros((spec.d_A * d_b, spec.d_A * d_b), dtype=complex)
    for f in range(n):
        w += c[f] * np.kron(q_ops[f], r_ops[f])
    from .protocols import target_unitary

    residual = float(np.max(np.abs(np.kron(m_a, m_b) @ w - target_unitary(spec))))
    if residual > max(tol, 1e-8):
        raise InvalidSpec(f"conversion identity failed with residual {residual:.3e}")

    group = cycles.group_table()
    factor = FactorSystem.trivial(n)
    tc = tc_from_coefficients(group, factor, c, tol)
    dspec = DoubleGroupSpec(
        group=group, u_ops=q_ops, v_ops=r_ops, coeffs=c, factor=factor, tc=tc
    )
    return ConversionResult(
        q_ops=q_ops,
        r_ops=r_ops,
        coeffs=c,
        zeta=zeta,
        labels=labels,
        m_a=m_a,
        m_b=m_b,
        residual=residual,
        double_spec=dspec,
    )


def diagonalize_controlled(
    spec: ControlledUnitarySpec, tol: float = 1e-8
) -> Tuple[ControlledUnitarySpec, np.ndarray]:
    """Rotate Bob's side into a joint eigenbasis of the V_k; returns the
    rotated spec and the basis change w (V'_k = w^dag V_k w)."""
    w = _joint_eigenbasis(spec.unitaries, tol)
    new_vs = []
    for v in spec.unitaries:
        dv = w.conj().T @ v @ w
        if np.max(np.abs(dv - np.diag(np.diag(dv)))) > tol:
            raise InvalidSpec("controlled spec is not simultaneously diagonalizable")
        new_vs.append(np.diag(np.diag(dv)))
    return (
        ControlledUnitarySpec(
            cycles=spec.cycles,
            subset=spec.subset,
            unitaries=new_vs,
            projectors=None if spec.projectors is None else [p.copy() for p in spec.projectors],
        ),
        w,
    )


# ---------------------------------------------------------------------------
# Approximation builders


@dataclass
class ApproximationResult:
    spec: ControlledUnitarySpec
    error: float
    cost_ebits: float


def approximate_phase_subset(phi: float, n: int) -> ApproximationResult:
    """Approximate the two-qubit controlled-phase diag(1,1,1,e^{i phi}) by a
    controlled subset {0, m} of the cyclic group of order n, with m the
    nearest integer to n*phi/(2 pi)."""
    if n < 2:
        raise ValueError(f"approximate_phase_subset needs n >= 2, got {n}")
    cycles = AbelianCycleStructure((n,))
    m = int(round(n * phi / (2 * np.pi))) % n
    error = float(abs(np.exp(1j * phi) - np.exp(2j * np.pi * m / n)))
    if m == 0:
        # the approximation collapses to the identity
        spec = ControlledUnitarySpec(
            cycles=cycles,
            subset=(0,),
            unitaries=[np.eye(2, dtype=complex)],
            projectors=[np.eye(2, dtype=complex)],
        )
    else:
        spec = ControlledUnitarySpec(
            cycles=cycles,
            subset=(0, m),
            unitaries=[
                np.eye(2, dtype=complex),
                np.diag([1.0, np.exp(2j * np.pi * m / n)]),
            ],
        )
    return ApproximationResult(spec=spec, error=error, cost_ebits=float(np.log2(n)))


def approximate_diagonal(u_diag, d_a: int, d_b: int, n: int) -> ApproximationResult:
    """Round each diagonal phase of a product-basis-diagonal unitary to an
    n-th root of unity and embed the rounded V_k as a subset of the Abelian
    group C_n^{d_B}."""
    u = np.asarray(u_diag, dtype=complex)
    if u.shape != (d_a * d_b, d_a * d_b):
        raise InvalidSpec(f"matrix shape {u.shape} does not match d_A={d_a}, d_B={d_b}")
    if np.max(np.abs(u - np.diag(np.diag(u)))) > 1e-9:
        raise InvalidSpec("approximate_diagonal requires a diagonal unitary")
    if not is_unitary(u, 1e-8):
        raise InvalidSpec("approximate_diagonal requires a unitary input")
    phases = np.angle(np.diag(u)).reshape(d_a, d_b)
    ints = np.round(n * phases / (2 * np.pi)).astype(int) % n

    cycles = AbelianCycleStructure((n,) * d_b)
    # group element per control row; identical rows share one projector
    order: List[int] = []
    projs = {}
    for row in range(d_a):
        k = cycles.tuple_to_index(tuple(int(x) for x in ints[row]))
        if k not in projs:
            projs[k] = np.zeros((d_a, d_a), dtype=complex)
            order.append(k)
        projs[k][row, row] = 1.0
    unitaries = [
        np.diag(np.exp(2j * np.pi * np.asarray(cycles.index_to_tuple(k)) / n)) for k in order
    ]
    spec = ControlledUnitarySpec(
        cycles=cycles,
        subset=tuple(order),
        unitaries=unitaries,
        projectors=[projs[k] for k in order],
    )
    rounded = np.diag(np.exp(2j * np.pi * ints / n).reshape(-1))
    error = float(np.max(np.abs(u - rounded)))
    return ApproximationResult(spec=spec, error=error, cost_ebits=float(d_b * np.log2(n)))
