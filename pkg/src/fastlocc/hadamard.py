"""Character-table Hadamard machinery: building the (T, C) gate pair, the
row gates Z_l, and verifying the exchange relation C Z_l = P_l C that lets a
measurement be pulled before the incoming classical message.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .groups import FiniteGroupTable
from .linalg import (
    DEFAULT_TOL,
    PermutationCertificate,
    as_complex_permutation,
    is_complex_hadamard,
    is_unitary,
)


class InvalidCharacterTable(ValueError):
    pass


class ConditionOneViolated(ValueError):
    """Entries are not all of equal (nonzero) magnitude."""


@dataclass
class ExchangeFailure(Exception):
    row: int
    residual: float

    def __str__(self):
        return f"C Z_l C^dag is not a complex permutation at l={self.row} (residual {self.residual:.3e})"


@dataclass(frozen=True)
class TCPair:
    """Alice's basis-change T and Bob's coefficient gate C, both N x N.

    T is a complex Hadamard (entries of magnitude 1/sqrt(N)); C is unitary.
    Optional provenance records the witnesses (L, M, D, K-hat) the pair was
    built from.
    """

    T: np.ndarray
    C: np.ndarray
    L: Optional[PermutationCertificate] = None
    M: Optional[PermutationCertificate] = None
    D: Optional[np.ndarray] = None
    khat: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.T.shape[0]

    @property
    def that(self) -> np.ndarray:
        return np.sqrt(self.size) * self.T


def rows_close_under_product(that: np.ndarray, tol: float) -> Optional[FiniteGroupTable]:
    """If the rows of a matrix with all-ones first row close exactly under
    entrywise multiplication, return the induced group table."""
    n = that.shape[0]
    mult = np.empty((n, n), dtype=int)
    for i in range(n):
        for j in range(n):
            prod = that[i] * that[j]
            matches = [t for t in range(n) if np.max(np.abs(prod - that[t])) < tol]
            if len(matches) != 1:
                return None
            mult[i, j] = matches[0]
    try:
        return FiniteGroupTable.from_mult(mult)
    except ValueError:
        return None


def build_tc(
    khat: np.ndarray,
    L: PermutationCertificate,
    M: PermutationCertificate,
    D: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> TCPair:
    """T = L K-hat / sqrt(N), C = M K-hat D / sqrt(N)."""
    khat = np.asarray(khat, dtype=complex)
    n = khat.shape[0]
    if rows_close_under_product(khat, max(tol, 1e-8)) is None:
        raise InvalidCharacterTable("rows of K-hat do not form a group under entrywise products")
    d = np.asarray(D, dtype=complex)
    if d.ndim == 2:
        d = np.diag(d)
    if np.max(np.abs(np.abs(d) - 1.0)) > tol:
        raise ValueError("D must be a diagonal of unit-magnitude phases")
    t = L.as_matrix() @ khat / np.sqrt(n)
    c = M.as_matrix() @ khat @ np.diag(d) / np.sqrt(n)
    return TCPair(T=t, C=c, L=L, M=M, D=d, khat=khat)


def z_row_gate(that: np.ndarray, l: int) -> np.ndarray:
    """Diagonal unitary whose entries conjugate row l of T-hat."""
    that = np.asarray(that, dtype=complex)
    if not 0 <= l < that.shape[0]:
        raise IndexError(f"row index {l} out of range for {that.shape[0]} rows")
    return np.diag(that[l].conj())


def verify_exchange(tc: TCPair, tol: float = DEFAULT_TOL) -> List[PermutationCertificate]:
    """Certify P_l = C Z_l C^dag as a complex permutation for every l.

    Raises ExchangeFailure at the first l whose conjugation is not a complex
    permutation matrix.
    """
    n = tc.size
    that = tc.that
    certs = []
    for l in range(n):
        mat = tc.C @ z_row_gate(that, l) @ tc.C.conj().T
        cert = as_complex_permutation(mat, tol)
        if cert is None:
            # residual: distance to the nearest one-big-entry-per-row pattern
            big = np.abs(mat) > tol
            residual = float(np.max(np.abs(np.abs(mat) * big - big)))
            raise ExchangeFailure(row=l, residual=residual)
        certs.append(cert)
    return certs


def rows_form_group(
    chat: np.ndarray, tol: float = DEFAULT_TOL
) -> Optional[Tuple[FiniteGroupTable, np.ndarray, np.ndarray]]:
    """Normalize C-hat to C' = Q C-hat R with all-ones first row and column,
    then test whether the rows of C' close under entrywise multiplication.

    Returns (group table H, Q diagonal, R diagonal) on success, None when the
    rows do not form a group. Raises on zero entries or unequal magnitudes.
    """
    chat = np.asarray(chat, dtype=complex)
    n = chat.shape[0]
    mags = np.abs(chat)
    if np.min(mags) <= tol:
        raise ValueError("C-hat has a (numerically) zero entry")
    if np.max(np.abs(mags - 1.0)) > max(tol, 1e-8):
        raise ConditionOneViolated(
            f"entries of C-hat deviate from unit magnitude by {np.max(np.abs(mags - 1.0)):.3e}"
        )
    r = 1.0 / chat[0, :]
    col_normalized = chat * r[np.newaxis, :]
    q = 1.0 / col_normalized[:, 0]
    cprime = col_normalized * q[:, np.newaxis]
    table = rows_close_under_product(cprime, max(tol, 1e-8))
    if table is None:
        return None
    return table, q, r


@dataclass(frozen=True)
class StructureReport:
    certificates: List[PermutationCertificate]
    group: FiniteGroupTable
    # witnesses of C = P T D
    P: PermutationCertificate
    D: np.ndarray
    decomposition_residual: float


def _recover_ptd(
    t: np.ndarray, c: np.ndarray, tol: float
) -> Optional[Tuple[PermutationCertificate, np.ndarray, float]]:
    """Find a complex permutation P and diagonal unit phases D with C = P T D."""
    n = t.shape[0]
    for j0 in range(n):
        d = c[0] / t[j0]
        if np.max(np.abs(np.abs(d) - 1.0)) > max(tol, 1e-8):
            continue
        perm = [None] * n
        phases = [None] * n
        perm[0], phases[0] = j0, 1.0 + 0j
        used = {j0}
        ok = True
        for i in range(1, n):
            found = False
            for j in range(n):
                if j in used:
                    continue
                v = c[i] / (t[j] * d)
                if np.max(np.abs(v - v[0])) < max(tol, 1e-8) and abs(abs(v[0]) - 1.0) < max(tol, 1e-8):
                    perm[i], phases[i] = j, complex(v[0])
                    used.add(j)
                    found = True
                    break
            if not found:
                ok = False
                break
        if ok:
            p = PermutationCertificate(tuple(perm), tuple(phases))
            residual = float(np.max(np.abs(c - p.as_matrix() @ t @ np.diag(d))))
            if residual < max(tol, 1e-8):
                return p, d, residual
    return None


def certify_structure(that: np.ndarray, c: np.ndarray, tol: float = DEFAULT_TOL) -> StructureReport:
    """Full structural certification of a (T-hat, C) pair.

    Requires T-hat complex Hadamard (after the 1/sqrt(N) normalization), C
    unitary with a zero-free first row. Verifies the exchange relation for
    every l, that the Z_l close into an Abelian group up to phases, and
    recovers the C = P T D decomposition.
    """
    that = np.asarray(that, dtype=complex)
    c = np.asarray(c, dtype=complex)
    n = that.shape[0]
    t = that / np.sqrt(n)
    if not is_complex_hadamard(t, max(tol, 1e-8)):
        raise ValueError("T-hat / sqrt(N) is not a complex Hadamard matrix")
    if not is_unitary(c, max(tol, 1e-8)):
        raise ValueError("C is not unitary")
    if np.min(np.abs(c[0])) <= tol:
        raise ValueError("first row of C contains a zero entry")

    certs = verify_exchange(TCPair(T=t, C=c), tol)

    # Z_l closure: rows of T-hat, normalized by their first entries, must
    # close under entrywise products.
    tnorm = that / that[:, [0]]
    group_t = rows_close_under_product(tnorm, max(tol, 1e-8))
    if group_t is None:
        raise ExchangeFailure(row=-1, residual=float("nan"))

    res = rows_form_group(np.sqrt(n) * c, tol)
    if res is None:
        raise ValueError("rows of sqrt(N) C do not form a group after normalization")
    group_c, _, _ = res

    recovered = _recover_ptd(t, c, tol)
    if recovered is None:
        raise ValueError("no C = P T D decomposition found")
    p, d, residual = recovered
    return StructureReport(
        certificates=certs, group=group_c, P=p, D=d, decomposition_residual=residual
    )
