"""Dense complex-matrix kernel: root-of-unity gates, structural predicates,
operator Schmidt rank and two-qubit canonical (Weyl chamber) invariants.

All matrices are plain ``numpy.ndarray`` of dtype complex, row-major.
Dimensions stay small (<= 4096), so everything is dense and exact up to
float noise; the default tolerance 1e-9 cleanly separates the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

DEFAULT_TOL = 1e-9

MAX_DIM = 4096


class InvalidDimensionError(ValueError):
    pass


class InvalidShapeError(ValueError):
    pass


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise InvalidShapeError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a.view(float))):
        raise InvalidShapeError("matrix contains NaN/Inf entries")
    return a


def _square(m) -> np.ndarray:
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise InvalidShapeError(f"expected a square matrix, got shape {a.shape}")
    return a


def fourier_matrix(n: int) -> np.ndarray:
    """The n x n Fourier matrix with entries exp(2*pi*i*m*k/n)/sqrt(n)."""
    if n < 1:
        raise InvalidDimensionError(f"fourier_matrix needs n >= 1, got {n}")
    m, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return np.exp(2j * np.pi * m * k / n) / np.sqrt(n)


def shift_gate(n: int, power: int = 1) -> np.ndarray:
    """X^power with X|j> = |j - 1 mod n>."""
    if n < 1:
        raise InvalidDimensionError(f"shift_gate needs n >= 1, got {n}")
    mat = np.zeros((n, n), dtype=complex)
    for j in range(n):
        mat[(j - power) % n, j] = 1.0
    return mat


def phase_gate(n: int, power: int = 1) -> np.ndarray:
    """Z^power = diag(exp(2*pi*i*k*power/n))."""
    if n < 1:
        raise InvalidDimensionError(f"phase_gate needs n >= 1, got {n}")
    return np.diag(np.exp(2j * np.pi * np.arange(n) * power / n))


def tensor_product(a, b) -> np.ndarray:
    a = _as_matrix(a)
    b = _as_matrix(b)
    if a.shape[0] * b.shape[0] > MAX_DIM or a.shape[1] * b.shape[1] > MAX_DIM:
        raise InvalidDimensionError(
            f"tensor product dimension {a.shape[0] * b.shape[0]} exceeds {MAX_DIM}"
        )
    return np.kron(a, b)


def is_unitary(m, tol: float = DEFAULT_TOL) -> bool:
    a = _square(m)
    n = a.shape[0]
    return bool(np.max(np.abs(a.conj().T @ a - np.eye(n))) <= tol)


def is_complex_hadamard(m, tol: float = DEFAULT_TOL) -> bool:
    """Unitary with all entries of magnitude 1/sqrt(n)."""
    a = _square(m)
    n = a.shape[0]
    if not is_unitary(a, tol):
        return False
    return bool(np.max(np.abs(np.abs(a) - 1.0 / np.sqrt(n))) <= tol)


@dataclass(frozen=True)
class PermutationCertificate:
    """A complex permutation matrix M, recorded as M[i, perm[i]] = phases[i]."""

    perm: tuple
    phases: tuple

    @property
    def size(self) -> int:
        return len(self.perm)

    def as_matrix(self) -> np.ndarray:
        n = self.size
        mat = np.zeros((n, n), dtype=complex)
        for i, (p, ph) in enumerate(zip(self.perm, self.phases)):
            mat[i, p] = ph
        return mat

    def inverse_perm(self) -> tuple:
        inv = [0] * self.size
        for i, p in enumerate(self.perm):
            inv[p] = i
        return tuple(inv)

    def row_of_column(self, col: int) -> int:
        """Row index of the single nonzero entry in the given column."""
        return self.inverse_perm()[col]


def as_complex_permutation(m, tol: float = DEFAULT_TOL) -> Optional[PermutationCertificate]:
    """Certify m as a complex permutation matrix, or return None.

    Entries below tol count as zero; the surviving entry in each row must be
    within tol of unit magnitude and the nonzero pattern must be a bijection.
    """
    a = _square(m)
    n = a.shape[0]
    perm = []
    phases = []
    for i in range(n):
        row = a[i]
        big = np.nonzero(np.abs(row) > tol)[0]
        if len(big) != 1:
            return None
        j = int(big[0])
        if abs(abs(row[j]) - 1.0) > tol:
            return None
        perm.append(j)
        phases.append(complex(row[j]))
    if len(set(perm)) != n:
        return None
    return PermutationCertificate(tuple(perm), tuple(phases))


def identity_certificate(n: int) -> PermutationCertificate:
    return PermutationCertificate(tuple(range(n)), (1.0 + 0j,) * n)


def equal_up_to_global_phase(a, b, tol: float = DEFAULT_TOL) -> Optional[float]:
    """Return theta with a = exp(i*theta) * b (mod 2*pi), or None.

    The phase is read off at the largest-magnitude entry of b, then the full
    max-norm residual is checked, which avoids dividing by near-zero entries.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise InvalidShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[idx]) <= tol:
        # b is (numerically) zero; equal iff a is too
        return 0.0 if np.max(np.abs(a)) <= tol else None
    theta = float(np.angle(a[idx] / b[idx]))
    if np.max(np.abs(a - np.exp(1j * theta) * b)) > tol:
        return None
    return theta % (2 * np.pi)


def reshuffle(u, d_a: int, d_b: int) -> np.ndarray:
    """Rearrange a (d_a*d_b) x (d_a*d_b) matrix into the d_a^2 x d_b^2 form
    whose entry ((a,a'),(b,b')) is u[(a,b),(a',b')]."""
    u = _square(u)
    if u.shape[0] != d_a * d_b:
        raise InvalidShapeError(f"matrix of dim {u.shape[0]} is not {d_a}x{d_b} bipartite")
    return u.reshape(d_a, d_b, d_a, d_b).transpose(0, 2, 1, 3).reshape(d_a * d_a, d_b * d_b)


def operator_schmidt_rank(u, d_a: int, d_b: int, tol: float = DEFAULT_TOL) -> int:
    """Number of nonzero operator-Schmidt coefficients of a bipartite matrix."""
    sv = np.linalg.svd(reshuffle(u, d_a, d_b), compute_uv=False)
    return int(np.sum(sv > tol))


def operator_schmidt_coefficients(u, d_a: int, d_b: int) -> np.ndarray:
    return np.linalg.svd(reshuffle(u, d_a, d_b), compute_uv=False)


# Magic basis, mapping the canonical two-qubit form to a diagonal matrix.
_MAGIC = (1.0 / np.sqrt(2)) * np.array(
    [[1, 1j, 0, 0], [0, 0, 1j, 1], [0, 0, 1j, -1], [1, -1j, 0, 0]], dtype=complex
)
_MAGIC_D = _MAGIC.conj().T


@dataclass(frozen=True)
class KakInvariants:
    """Canonical two-qubit interaction coordinates, folded into the cell
    pi/4 >= alpha >= beta >= gamma >= 0."""

    alpha: float
    beta: float
    gamma: float

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)

    def close_to(self, other, tol: float = 1e-8) -> bool:
        o = other.as_tuple() if isinstance(other, KakInvariants) else tuple(other)
        return max(abs(x - y) for x, y in zip(self.as_tuple(), o)) <= tol


def kak_invariants(u, tol: float = DEFAULT_TOL) -> KakInvariants:
    """Canonical interaction coordinates of a 4x4 (two-qubit) unitary.

    Works in the magic basis: the eigenphases of M^T M, with M the
    magic-basis image of the determinant-normalized input, determine the
    local-equivalence class. The randomized simultaneous diagonalization
    handles degenerate spectra; it is seeded, so the result is deterministic.
    """
    a = _square(u)
    if a.shape != (4, 4):
        raise InvalidShapeError(f"kak_invariants needs a 4x4 matrix, got {a.shape}")
    if not is_unitary(a, max(tol, 1e-8)):
        raise ValueError("kak_invariants requires a unitary input")

    pi2 = np.pi / 2
    pi4 = np.pi / 4

    a = a / np.linalg.det(a) ** 0.25
    up = _MAGIC_D @ a @ _MAGIC
    m2 = up.T @ up

    # m2 is complex symmetric and unitary; diagonalize it over O(4) by
    # diagonalizing a random real combination of its real/imaginary parts.
    rng = np.random.default_rng(20120709)
    diag = None
    for _ in range(100):
        m2real = rng.normal() * m2.real + rng.normal() * m2.imag
        _, p = np.linalg.eigh(m2real)
        d = np.diag(p.T @ m2 @ p)
        if np.allclose(p @ np.diag(d) @ p.T, m2, rtol=1e-10, atol=1e-10):
            diag = d
            break
    if diag is None:
        raise ValueError("failed to diagonalize in the magic basis")

    d = -np.angle(diag) / 2
    d[3] = -d[0] - d[1] - d[2]
    cs = np.mod((d[:3] + d[3]) / 2, 2 * np.pi)

    cstemp = np.mod(cs, pi2)
    np.minimum(cstemp, pi2 - cstemp, cstemp)
    order = np.argsort(cstemp)[[1, 2, 0]]
    cs = cs[order]

    if cs[0] > pi2:
        cs[0] -= 3 * pi2
    if cs[1] > pi2:
        cs[1] -= 3 * pi2
    conjs = 0
    if cs[0] > pi4:
        cs[0] = pi2 - cs[0]
        conjs += 1
    if cs[1] > pi4:
        cs[1] = pi2 - cs[1]
        conjs += 1
    if cs[2] > pi2:
        cs[2] -= 3 * pi2
    if conjs == 1:
        cs[2] = pi2 - cs[2]
    if cs[2] > pi4:
        cs[2] -= pi2

    # cs is now (c2, c1, c3) with pi/4 >= c1 >= c2 >= |c3|; fold the sign of
    # the last coordinate so classes are compared inside a single cell.
    vals = sorted([float(cs[1]), float(cs[0]), abs(float(cs[2]))], reverse=True)
    vals = [min(max(v, 0.0), pi4) for v in vals]
    return KakInvariants(*vals)
