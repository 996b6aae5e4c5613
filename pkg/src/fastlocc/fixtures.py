"""Builtin example specs and random spec generators.

The builtins are compiled-in (not files) so tests cannot drift from the
constants they encode. Names: ex1i, ex1ii, ex2i, ex2ii, ex3, ex4, ex5a,
ex5b, ex5c, ex6, ex7, ex8, counterexample. Some accept keyword parameters
(ex1i/ex6: N; ex3: N, m; ex8: n, m).
"""

from __future__ import annotations


from typing import List, Union

import numpy as np

from .constructions import (
    cyclic_coeffs,
    dihedral_coeffs,
    tc_from_coefficients,
)
from .groups import (
    AbelianCycleStructure,
    FactorSystem,
    dihedral_group,
    dihedral_rep_matrices,
    weighted_inner,
)
from .protocols import ControlledUnitarySpec, DoubleGroupSpec
from .linalg import phase_gate, shift_gate

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_XZ = _X @ _Z

AnySpec = Union[ControlledUnitarySpec, DoubleGroupSpec]


def _klein_ops() -> List[np.ndarray]:
    """Pauli pair representation of the (2,2) cycle product: element (a, b)
    maps to X^a Z^b; indices in lexicographic order."""
    return [_I2, _Z, _X, _XZ]


def _double_from_coeffs(cycles, singles, coeffs, with_tc=True, tol=1e-9) -> DoubleGroupSpec:
    group = cycles.group_table()
    factor = FactorSystem.trivial(group.order)
    tc = tc_from_coefficients(group, factor, coeffs, tol) if with_tc else None
    spec = DoubleGroupSpec(
        group=group,
        u_ops=[m.copy() for m in singles],
        v_ops=[m.copy() for m in singles],
        coeffs=np.asarray(coeffs, dtype=complex),
        factor=factor,
        tc=tc,
    )
    return spec


def _ex1i(n: int = 2) -> ControlledUnitarySpec:
    cycles = AbelianCycleStructure((n,))
    return ControlledUnitarySpec(
        cycles=cycles,
        subset=tuple(range(n)),
        unitaries=[shift_gate(n, k) for k in range(n)],
    )


def _ex1ii() -> ControlledUnitarySpec:
    cycles = AbelianCycleStructure((3,))
    return ControlledUnitarySpec(
        cycles=cycles,
        subset=(0, 1, 2),
        unitaries=[np.diag([1.0, np.exp(2j * np.pi * k / 3)]) for k in range(3)],
    )


def _ex2_vs() -> List[np.ndarray]:
    return [
        np.diag([1.0, 1.0, 1.0, 1.0]).astype(complex),
        np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex),
        np.diag([1.0, -1.0, 1.0, -1.0]).astype(complex),
        np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex),
    ]


def _ex2i() -> ControlledUnitarySpec:
    cycles = AbelianCycleStructure((2, 2))
    return ControlledUnitarySpec(cycles=cycles, subset=(0, 1, 2, 3), unitaries=_ex2_vs())


def _ex2ii() -> ControlledUnitarySpec:
    cycles = AbelianCycleStructure((2, 2))
    vs = [v[:3, :3].copy() for v in _ex2_vs()]
    return ControlledUnitarySpec(cycles=cycles, subset=(0, 1, 2, 3), unitaries=vs)


def _ex3(n: int = 4, m: int = 1) -> ControlledUnitarySpec:
    if not 0 < m < n:
        raise ValueError(f"ex3 needs 0 < m < N, got m={m}, N={n}")
    cycles = AbelianCycleStructure((n,))
    return ControlledUnitarySpec(
        cycles=cycles,
        subset=(0, m),
        unitaries=[_I2.copy(), np.diag([1.0, np.exp(2j * np.pi * m / n)])],
    )


def _ex4() -> DoubleGroupSpec:
    cycles = AbelianCycleStructure((2,))
    coeffs = np.array([1.0, 1j]) / np.sqrt(2)
    return _double_from_coeffs(cycles, [_I2, _Z], coeffs)


def _ex5(case: str) -> DoubleGroupSpec:
    cycles = AbelianCycleStructure((2, 2))
    zeta = np.exp(1j * np.pi / 4)
    # coefficient order follows the element indexing: (0,0), (0,1), (1,0), (1,1)
    table = {
        "a": np.array([1, 1, 1, -1], dtype=complex) / 2,
        "b": np.array([1, 1, 1j, -1j], dtype=complex) / 2,
        "c": np.array([1, zeta, 1, zeta**5], dtype=complex) / 2,
    }
    return _double_from_coeffs(cycles, _klein_ops(), table[case])


def _ex6(n: int = 2) -> DoubleGroupSpec:
    cycles = AbelianCycleStructure((n,))
    singles = [phase_gate(n, -f) for f in range(n)]
    return _double_from_coeffs(cycles, singles, cyclic_coeffs(n))


def _ex7() -> DoubleGroupSpec:
    cycles = AbelianCycleStructure((2, 2, 2))
    # element (f1, f2, f3) -> X^{f3} Z^{f2}; f1 makes the representation
    # unfaithful (every operator appears twice)
    singles = []
    for k in range(8):
        _, f2, f3 = cycles.index_to_tuple(k)
        singles.append(np.linalg.matrix_power(_X, f3) @ np.linalg.matrix_power(_Z, f2))
    zeta = np.exp(1j * np.pi / 4)
    coeffs = (
        np.array([1, 1, zeta, zeta**5, zeta**3, zeta**7, zeta**2, zeta**2], dtype=complex)
        / (2 * np.sqrt(2))
    )
    return _double_from_coeffs(cycles, singles, coeffs)


def _ex8(n: int = 2, m: int = 1) -> DoubleGroupSpec:
    group = dihedral_group(n)
    mats = dihedral_rep_matrices(n)
    coeffs = dihedral_coeffs(n, m)
    factor = FactorSystem.trivial(group.order)
    tc = tc_from_coefficients(group, factor, coeffs)
    return DoubleGroupSpec(
        group=group, u_ops=mats, v_ops=[m_.copy() for m_ in mats], coeffs=coeffs,
        factor=factor, tc=tc,
    )


def _counterexample(alpha: float = 0.3) -> DoubleGroupSpec:
    """Equal-magnitude coefficients whose C matrix is unitary but whose
    normalized rows do not close into a group (for generic alpha)."""
    cycles = AbelianCycleStructure((2, 2))
    ea = np.exp(1j * alpha)
    coeffs = np.array([1.0, ea, 1.0, -ea], dtype=complex) / 2
    return _double_from_coeffs(cycles, _klein_ops(), coeffs, with_tc=False)


_BUILTINS = {
    "ex1i": _ex1i,
    "ex1ii": _ex1ii,
    "ex2i": _ex2i,
    "ex2ii": _ex2ii,
    "ex3": _ex3,
    "ex4": _ex4,
    "ex5a": lambda: _ex5("a"),
    "ex5b": lambda: _ex5("b"),
    "ex5c": lambda: _ex5("c"),
    "ex6": _ex6,
    "ex7": _ex7,
    "ex8": _ex8,
    "counterexample": _counterexample,
}


def builtin_example_names() -> List[str]:
    return sorted(_BUILTINS)


def builtin_example(name: str, **params) -> AnySpec:
    if name not in _BUILTINS:
        raise KeyError(f"unknown builtin example {name!r}; known: {', '.join(sorted(_BUILTINS))}")
    return _BUILTINS[name](**{k.lower(): v for k, v in params.items()})


# ---------------------------------------------------------------------------
# Random spec generators (for property tests and bulk verification)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_cycle_structure(rng: np.random.Generator, max_order: int) -> AbelianCycleStructure:
    cycles = []
    order = 1
    while True:
        choices = [r for r in range(2, max_order + 1) if order * r <= max_order]
        if not cycles:
            r = int(rng.choice(choices))
            cycles.append(r)
            order *= r
            continue
        if not choices or rng.random() < 0.5:
            break
        r = int(rng.choice(choices))
        cycles.append(r)
        order *= r
    return AbelianCycleStructure(tuple(cycles))


def random_controlled_spec(
    rng: np.random.Generator,
    max_order: int = 8,
    d_b_max: int = 4,
    diagonal: bool = False,
    allow_subset: bool = True,
) -> ControlledUnitarySpec:
    """Controlled-Abelian-group spec with random cycle structure, random
    irreducible labels per basis vector, and (optionally) a random joint
    eigenbasis on Bob's side."""
    cycles = random_cycle_structure(rng, max_order)
    n = cycles.order
    d_b = int(rng.integers(2, d_b_max + 1))
    labels = [int(rng.integers(n)) for _ in range(d_b)]
    if allow_subset and n > 2 and rng.random() < 0.5:
        size = int(rng.integers(2, n))
        subset = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
    else:
        subset = tuple(range(n))
    w = None if diagonal else random_unitary(rng, d_b)
    unitaries = []
    for k in subset:
        diag = np.diag(
            np.array([np.exp(2j * np.pi * weighted_inner(cycles, q, k)) for q in labels])
        )
        unitaries.append(diag if w is None else w @ diag @ w.conj().T)
    return ControlledUnitarySpec(cycles=cycles, subset=subset, unitaries=unitaries)


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)
