"""Finite groups: multiplication tables, Abelian cycle products with tuple
indexing, dihedral groups, character tables and factor systems of projective
representations.

Elements are canonically the indices 0..N-1; eta-tuples are views on top of
an :class:`AbelianCycleStructure`.  Tuple <-> index conversion is
lexicographic with the last component varying fastest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .linalg import DEFAULT_TOL, fourier_matrix, is_unitary


class NotAProjectiveRepresentation(ValueError):
    pass


@dataclass(frozen=True)
class FiniteGroupTable:
    """A finite group given by its dense multiplication table."""

    mult: np.ndarray  # mult[g, h] = index of g*h
    identity: int
    inverse: np.ndarray  # inverse[g] = index of g^-1

    @property
    def order(self) -> int:
        return self.mult.shape[0]

    def mul(self, g: int, h: int) -> int:
        return int(self.mult[g, h])

    def inv(self, g: int) -> int:
        return int(self.inverse[g])

    @classmethod
    def from_mult(cls, mult) -> "FiniteGroupTable":
        mult = np.asarray(mult, dtype=int)
        n = mult.shape[0]
        if mult.shape != (n, n):
            raise ValueError("multiplication table must be square")
        identity = None
        for e in range(n):
            if all(mult[e, f] == f and mult[f, e] == f for f in range(n)):
                identity = e
                break
        if identity is None:
            raise ValueError("multiplication table has no identity element")
        inverse = np.full(n, -1, dtype=int)
        for g in range(n):
            for h in range(n):
                if mult[g, h] == identity and mult[h, g] == identity:
                    inverse[g] = h
                    break
            if inverse[g] < 0:
                raise ValueError(f"element {g} has no inverse")
        table = cls(mult=mult, identity=identity, inverse=inverse)
        if n <= 32:
            table.check_associativity()
        return table

    def check_associativity(self) -> None:
        m = self.mult
        # (g*h)*k == g*(h*k) for all triples, vectorized over k
        for g in range(self.order):
            for h in range(self.order):
                if not np.array_equal(m[m[g, h], :], m[g, m[h, :]]):
                    raise ValueError(f"associativity fails at pair ({g}, {h})")

    def is_abelian(self) -> bool:
        return np.array_equal(self.mult, self.mult.T)


@dataclass(frozen=True)
class AbelianCycleStructure:
    """Direct product of cycles of lengths (r_1, ..., r_eta)."""

    cycles: Tuple[int, ...]

    def __post_init__(self):
        if not self.cycles:
            raise ValueError("cycle structure must be nonempty")
        if any(r < 1 for r in self.cycles):
            raise ValueError(f"cycle lengths must be >= 1, got {self.cycles}")
        object.__setattr__(self, "cycles", tuple(int(r) for r in self.cycles))

    @property
    def order(self) -> int:
        n = 1
        for r in self.cycles:
            n *= r
        return n

    @property
    def eta(self) -> int:
        return len(self.cycles)

    def index_to_tuple(self, k: int) -> Tuple[int, ...]:
        if not 0 <= k < self.order:
            raise ValueError(f"element index {k} out of range for order {self.order}")
        comps = []
        for r in reversed(self.cycles):
            comps.append(k % r)
            k //= r
        return tuple(reversed(comps))

    def tuple_to_index(self, t: Sequence[int]) -> int:
        if len(t) != self.eta:
            raise ValueError(f"tuple {t} does not match cycle structure {self.cycles}")
        k = 0
        for c, r in zip(t, self.cycles):
            if not 0 <= c < r:
                raise ValueError(f"component {c} out of range for cycle length {r}")
            k = k * r + c
        return k

    def add(self, j: int, k: int) -> int:
        tj, tk = self.index_to_tuple(j), self.index_to_tuple(k)
        return self.tuple_to_index(tuple((a + b) % r for a, b, r in zip(tj, tk, self.cycles)))

    def sub(self, j: int, k: int) -> int:
        tj, tk = self.index_to_tuple(j), self.index_to_tuple(k)
        return self.tuple_to_index(tuple((a - b) % r for a, b, r in zip(tj, tk, self.cycles)))

    def neg(self, k: int) -> int:
        t = self.index_to_tuple(k)
        return self.tuple_to_index(tuple((-a) % r for a, r in zip(t, self.cycles)))

    def group_table(self) -> FiniteGroupTable:
        n = self.order
        mult = np.empty((n, n), dtype=int)
        for j in range(n):
            for k in range(n):
                mult[j, k] = self.add(j, k)
        inverse = np.array([self.neg(k) for k in range(n)], dtype=int)
        return FiniteGroupTable(mult=mult, identity=0, inverse=inverse)

    def all_tuples(self):
        return [self.index_to_tuple(k) for k in range(self.order)]


def abelian_group(cycles: Sequence[int]) -> Tuple[AbelianCycleStructure, FiniteGroupTable]:
    structure = AbelianCycleStructure(tuple(cycles))
    return structure, structure.group_table()


def weighted_inner(cycles: AbelianCycleStructure, k, m) -> float:
    """Sum_s k_s * m_s / r_s, the cycle-weighted inner product (mod 1)."""
    kt = cycles.index_to_tuple(k) if isinstance(k, (int, np.integer)) else tuple(k)
    mt = cycles.index_to_tuple(m) if isinstance(m, (int, np.integer)) else tuple(m)
    if len(kt) != cycles.eta or len(mt) != cycles.eta:
        raise ValueError("tuple length does not match cycle structure")
    for t in (kt, mt):
        for c, r in zip(t, cycles.cycles):
            if not 0 <= c < r:
                raise ValueError(f"component {c} out of range for cycle length {r}")
    return float(sum(a * b / r for a, b, r in zip(kt, mt, cycles.cycles))) % 1.0


def weighted_pair_phase(cycles: AbelianCycleStructure, k, m) -> complex:
    """exp(-2*pi*i * sum_s k_s m_s / r_s): the k-th diagonal entry of the
    tensor product of per-cycle Z^(-m_s) gates."""
    return complex(np.exp(-2j * np.pi * weighted_inner(cycles, k, m)))


def group_shift_matrix(cycles: AbelianCycleStructure, element: int) -> np.ndarray:
    """Permutation matrix sending |j> to |j (-) element, componentwise mod r_s."""
    n = cycles.order
    mat = np.zeros((n, n), dtype=complex)
    for j in range(n):
        mat[cycles.sub(j, element), j] = 1.0
    return mat


def character_table(cycles: AbelianCycleStructure) -> np.ndarray:
    """K-hat: the tensor product of sqrt(r_i) * F_{r_i}; all-ones first row
    and column, and K-hat / sqrt(N) unitary."""
    khat = np.ones((1, 1), dtype=complex)
    for r in cycles.cycles:
        khat = np.kron(khat, np.sqrt(r) * fourier_matrix(r))
    return khat


def dihedral_rep_matrices(n: int) -> List[np.ndarray]:
    """The 2x2 rotation (f < n) and reflection (f >= n) matrices of D_n."""
    if n < 2:
        raise ValueError(f"dihedral group needs n >= 2, got {n}")
    mats = []
    for f in range(n):
        a = 2 * f * np.pi / n
        mats.append(np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]], dtype=complex))
    for f in range(n, 2 * n):
        a = 2 * f * np.pi / n
        mats.append(np.array([[-np.cos(a), -np.sin(a)], [-np.sin(a), np.cos(a)]], dtype=complex))
    return mats


def dihedral_group(n: int) -> FiniteGroupTable:
    """Multiplication table of D_n obtained by composing the defining 2x2
    matrices: indices 0..n-1 are rotations, n..2n-1 reflections."""
    mats = dihedral_rep_matrices(n)
    order = 2 * n
    mult = np.empty((order, order), dtype=int)
    for g in range(order):
        for h in range(order):
            prod = mats[g] @ mats[h]
            matches = [k for k in range(order) if np.max(np.abs(prod - mats[k])) < 1e-9]
            if len(matches) != 1:
                raise ValueError(f"product of elements {g},{h} matches {len(matches)} elements")
            mult[g, h] = matches[0]
    return FiniteGroupTable.from_mult(mult)


@dataclass(frozen=True)
class FactorSystem:
    """The unit-magnitude phases lambda(g, h) of a projective representation."""

    table: np.ndarray  # N x N complex

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def __call__(self, g: int, h: int) -> complex:
        return complex(self.table[g, h])

    @classmethod
    def trivial(cls, n: int) -> "FactorSystem":
        return cls(np.ones((n, n), dtype=complex))

    def is_cocycle(self, group: FiniteGroupTable, tol: float = 1e-8) -> bool:
        lam = self.table
        n = group.order
        for g in range(n):
            for h in range(n):
                gh = group.mul(g, h)
                for k in range(n):
                    lhs = lam[g, h] * lam[gh, k]
                    rhs = lam[g, group.mul(h, k)] * lam[h, k]
                    if abs(lhs - rhs) > tol:
                        return False
        return True

    def is_standard(self, identity: int = 0, tol: float = DEFAULT_TOL) -> bool:
        e = identity
        return bool(
            np.max(np.abs(self.table[e, :] - 1.0)) <= tol
            and np.max(np.abs(self.table[:, e] - 1.0)) <= tol
        )


def factor_system_from_rep(
    matrices: Sequence[np.ndarray],
    group: FiniteGroupTable,
    tol: float = 1e-8,
) -> FactorSystem:
    """Extract lambda(g,h) from Gamma(g) Gamma(h) = lambda(g,h) Gamma(g*h).

    Raises NotAProjectiveRepresentation when some product fails to match the
    expected matrix up to a phase within tol.
    """
    n = group.order
    mats = [np.asarray(m, dtype=complex) for m in matrices]
    if len(mats) != n:
        raise ValueError(f"need {n} matrices, got {len(mats)}")
    d = mats[0].shape[0]
    for g, m in enumerate(mats):
        if m.shape != (d, d):
            raise ValueError("all representation matrices must have the same square shape")
        if not is_unitary(m, tol):
            raise NotAProjectiveRepresentation(f"matrix for element {g} is not unitary")
    lam = np.empty((n, n), dtype=complex)
    for g in range(n):
        for h in range(n):
            gh = group.mul(g, h)
            val = np.trace(mats[gh].conj().T @ mats[g] @ mats[h]) / d
            if abs(abs(val) - 1.0) > tol:
                raise NotAProjectiveRepresentation(
                    f"product at ({g},{h}) is not a phase multiple of the expected matrix"
                )
            val = val / abs(val)
            residual = np.max(np.abs(mats[g] @ mats[h] - val * mats[gh]))
            if residual > tol:
                raise NotAProjectiveRepresentation(
                    f"residual {residual:.3e} at ({g},{h}) exceeds tolerance {tol}"
                )
            lam[g, h] = val
    return FactorSystem(lam)


def is_normalized_factor_system(f: FactorSystem, n: int, tol: float = DEFAULT_TOL) -> bool:
    """Standard, and every lambda(g,h) an n-th root of unity within tol."""
    if not f.is_standard(tol=tol):
        return False
    return bool(np.max(np.abs(f.table**n - 1.0)) <= tol)


@dataclass(frozen=True)
class ProjectiveRep:
    group: FiniteGroupTable
    matrices: Tuple[np.ndarray, ...]
    factor: FactorSystem = field(repr=False, default=None)

    def __post_init__(self):
        if self.factor is None:
            object.__setattr__(
                self, "factor", factor_system_from_rep(self.matrices, self.group)
            )

    def check(self, tol: float = 1e-8) -> bool:
        lam = self.factor.table
        for g in range(self.group.order):
            for h in range(self.group.order):
                gh = self.group.mul(g, h)
                res = np.max(
                    np.abs(self.matrices[g] @ self.matrices[h] - lam[g, h] * self.matrices[gh])
                )
                if res > tol:
                    return False
        return True


def all_cycle_structures(max_order: int):
    """Every cycle-length tuple (r_1,...,r_eta), r_i >= 2, with product <= max_order,
    plus the trivial group. Used by exhaustive property tests."""
    out = [AbelianCycleStructure((1,))]

    def rec(prefix, remaining):
        for r in range(2, remaining + 1):
            out.append(AbelianCycleStructure(tuple(prefix + [r])))
            rec(prefix + [r], remaining // r)

    rec([], max_order)
    return out
