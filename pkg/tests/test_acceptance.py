"""End-to-end acceptance suite.

Each test covers one acceptance criterion at its stated tolerance and
runtime budget and prints a single PASS line on success.
"""

import time

import numpy as np
import pytest

from fastlocc.constructions import (
    check_fast_conditions,
    coefficient_search,
    convert_to_double_group,
)
from fastlocc.fixtures import (
    builtin_example,
    random_controlled_spec,
    random_state,
    random_unitary,
)
from fastlocc.groups import (
    AbelianCycleStructure,
    FactorSystem,
    abelian_group,
    all_cycle_structures,
    character_table,
)
from fastlocc.hadamard import build_tc, verify_exchange, z_row_gate
from fastlocc.linalg import (
    PermutationCertificate,
    kak_invariants,
    operator_schmidt_rank,
)
from fastlocc.protocols import (
    ControlledUnitarySpec,
    check_branch_probabilities,
    compress_controlled,
    embed_unitary,
    entanglement_cost,
    max_branch_residual,
    simulate_fast_controlled,
    simulate_fast_double,
    simulate_slow_controlled,
    target_unitary,
)


class Budget:
    """Wall-clock budget for one criterion."""

    def __init__(self, label, seconds):
        self.label = label
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc_type is None:
            assert elapsed < self.seconds, (
                f"{self.label}: took {elapsed:.2f}s, budget {self.seconds}s"
            )
            print(f"PASS {self.label} ({elapsed:.2f}s)")


def phase_distance(a, b):
    return abs(np.exp(1j * a) - np.exp(1j * b))


def test_criterion_01_qubit_pair_double_group():
    with Budget("criterion 1: qubit pair, all 4 branches, CNOT class", 1.0):
        spec = builtin_example("ex4")
        rng = np.random.default_rng(101)
        psi = random_state(rng, 4)
        transcripts = simulate_fast_double(spec, psi)
        assert len(transcripts) == 4
        assert check_branch_probabilities(transcripts, 1e-9)
        assert max_branch_residual(transcripts, target_unitary(spec), psi) < 1e-9
        assert kak_invariants(target_unitary(spec)).close_to((np.pi / 4, 0, 0), 1e-9)


def test_criterion_02_klein_family_classes():
    with Budget("criterion 2: Klein-group family conditions, 20 inputs, classes", 5.0):
        expected = {
            "ex5a": (np.pi / 4, np.pi / 4, np.pi / 4),
            "ex5b": (np.pi / 4, np.pi / 4, 0.0),
            "ex5c": (np.pi / 4, np.pi / 4, np.pi / 8),
        }
        rng = np.random.default_rng(102)
        for name, kak in expected.items():
            spec = builtin_example(name)
            report = check_fast_conditions(spec.group, spec.factor, spec.coeffs)
            assert report.passed, (name, report.diagnostics)
            target = target_unitary(spec)
            for _ in range(20):
                psi = random_state(rng, 4)
                transcripts = simulate_fast_double(spec, psi)
                assert check_branch_probabilities(transcripts, 1e-9)
                assert max_branch_residual(transcripts, target, psi) < 1e-9
            assert kak_invariants(target).close_to(kak, 1e-8), name


def test_criterion_03_cyclic_family():
    with Budget("criterion 3: cyclic family N=2..8, Schmidt rank N", 10.0):
        for n in range(2, 9):
            spec = builtin_example("ex6", n=n)
            report = check_fast_conditions(spec.group, spec.factor, spec.coeffs)
            assert report.passed, (n, report.diagnostics)
            target = target_unitary(spec)
            assert operator_schmidt_rank(target, spec.d_A, spec.d_B) == n
        spec2 = builtin_example("ex6", n=2)
        assert kak_invariants(target_unitary(spec2)).close_to((np.pi / 4, 0, 0), 1e-8)


def test_criterion_04_unfaithful_rep():
    with Budget("criterion 4: order-8 unfaithful representation", 5.0):
        spec = builtin_example("ex7")
        report = check_fast_conditions(spec.group, spec.factor, spec.coeffs)
        assert report.passed, report.diagnostics
        rng = np.random.default_rng(104)
        psi = random_state(rng, 4)
        transcripts = simulate_fast_double(spec, psi)
        assert check_branch_probabilities(transcripts, 1e-9)
        assert max_branch_residual(transcripts, target_unitary(spec), psi) < 1e-9
        assert kak_invariants(target_unitary(spec)).close_to((np.pi / 4, np.pi / 8, 0), 1e-8)
        assert entanglement_cost(spec) == 3.0


def test_criterion_05_dihedral_family():
    import math

    with Budget("criterion 5: dihedral family n=2..6, all coprime m", 60.0):
        rng = np.random.default_rng(105)
        betas = {}
        for n in range(2, 7):
            for m in range(1, n + 1):
                if math.gcd(m, n) != 1:
                    continue
                spec = builtin_example("ex8", n=n, m=m)
                report = check_fast_conditions(spec.group, spec.factor, spec.coeffs)
                assert report.passed, (n, m, report.diagnostics)
                target = target_unitary(spec)
                psi = random_state(rng, 4)
                transcripts = simulate_fast_double(spec, psi)
                assert check_branch_probabilities(transcripts, 1e-9)
                assert max_branch_residual(transcripts, target, psi) < 1e-9
                alpha, beta, gamma = kak_invariants(target).as_tuple()
                assert abs(alpha - np.pi / 4) < 1e-8, (n, m)
                assert abs(gamma) < 1e-8, (n, m)
                betas[(n, m)] = beta
        # beta table stays consistent across runs
        for (n, m), beta in sorted(betas.items()):
            print(f"  dihedral n={n} m={m}: beta = {beta:.10f}")
        assert abs(betas[(2, 1)]) < 1e-8
        assert abs(betas[(3, 1)] - np.pi / 6) < 1e-8


def test_criterion_06_search_qubit_z_pair():
    with Budget("criterion 6: exhaustive search over the qubit Z pair", 1.0):
        I2 = np.eye(2, dtype=complex)
        Z = np.diag([1.0, -1.0]).astype(complex)
        _, g = abelian_group((2,))
        result = coefficient_search(g, [I2, Z], [I2, Z], FactorSystem.trivial(2))
        assert not result.truncated
        assert len(result.hits) == 2
        for hit in result.hits:
            assert hit.target_unitary_ok
            assert hit.kak is not None
            assert hit.kak.close_to((np.pi / 4, 0, 0), 1e-8)


def test_criterion_07_random_conversions():
    with Budget("criterion 7: 50 random controlled-to-double conversions", 30.0):
        rng = np.random.default_rng(107)
        subset_seen = 0
        for _ in range(50):
            spec = random_controlled_spec(rng, max_order=8, d_b_max=4, diagonal=True)
            if len(spec.subset) < spec.cycles.order:
                subset_seen += 1
            conv = convert_to_double_group(spec)
            assert conv.residual < 1e-9
            report = check_fast_conditions(
                conv.double_spec.group, conv.double_spec.factor, conv.coeffs
            )
            assert report.passed, report.diagnostics
            assert entanglement_cost(conv.double_spec) == entanglement_cost(spec)
        assert subset_seen > 0  # proper subsets are exercised


def test_criterion_08_controlled_fast_vs_slow():
    with Budget("criterion 8: controlled specs, fast vs slow, phase law", 20.0):
        rng = np.random.default_rng(108)
        specs = [builtin_example(n) for n in ("ex1i", "ex1ii", "ex2i", "ex2ii", "ex3")]
        specs += [
            random_controlled_spec(rng, max_order=8, d_b_max=4, diagonal=False)
            for _ in range(30)
        ]
        for spec in specs:
            psi = random_state(rng, spec.d_A * spec.d_B)
            fast = simulate_fast_controlled(spec, psi)
            slow = simulate_slow_controlled(spec, psi)
            target = target_unitary(spec)
            assert check_branch_probabilities(fast, 1e-9)
            assert check_branch_probabilities(slow, 1e-9)
            assert max_branch_residual(fast, target, psi) < 1e-9
            assert max_branch_residual(slow, target, psi) < 1e-9
            from fastlocc.groups import weighted_inner

            for t in fast:
                if t.probability <= 1e-12:
                    continue
                expect = 2 * np.pi * weighted_inner(spec.cycles, t.l, t.m)
                assert phase_distance(t.phase, expect) < 1e-9
            for t in slow:
                if t.probability > 1e-12:
                    assert phase_distance(t.phase, 0.0) < 1e-9


def test_criterion_09_extension_and_compression():
    with Budget("criterion 9: 20 extension/compression fixtures", 10.0):
        rng = np.random.default_rng(109)
        for i in range(10):
            d_a = int(rng.integers(2, 4))
            d_b = int(rng.integers(2, 4))
            d_r = int(rng.integers(1, 3))
            u = random_unitary(rng, d_a * d_b)
            r_block = random_unitary(rng, d_r * d_b)
            _, residual = embed_unitary(u, d_a, d_b, r_block)
            assert residual < 1e-10
        Z = np.diag([1.0, -1.0]).astype(complex)
        for i in range(10):
            # rank-(2,1) pattern (criterion's named case) plus rotated variants
            w = np.eye(3, dtype=complex) if i == 0 else random_unitary(rng, 3)
            p0 = w @ np.diag([1.0, 1.0, 0.0]).astype(complex) @ w.conj().T
            p1 = w @ np.diag([0.0, 0.0, 1.0]).astype(complex) @ w.conj().T
            spec = ControlledUnitarySpec(
                cycles=AbelianCycleStructure((2,)),
                subset=(0, 1),
                unitaries=[np.eye(2, dtype=complex), Z],
                projectors=[p0, p1],
            )
            compressed, emb, residual = compress_controlled(spec)
            assert residual < 1e-10
            assert emb.check_isometry(1e-10)
            assert compressed.d_A == 2


def test_criterion_10_counterexample():
    with Budget("criterion 10: counterexample fails the closure condition", 1.0):
        spec = builtin_example("counterexample")
        report = check_fast_conditions(spec.group, spec.factor, spec.coeffs)
        assert report.equal_magnitude
        assert report.c_unitary
        assert report.rows_group is None
        assert not report.passed


def test_criterion_11_property_suites():
    with Budget("criterion 11: exchange/closure/invariance property suites", 60.0):
        rng = np.random.default_rng(111)
        # 200 random (T, C) constructions: the exchange relation certifies
        structures = [s for s in all_cycle_structures(16) if s.order >= 2]
        for _ in range(200):
            cycles = structures[int(rng.integers(len(structures)))]
            n = cycles.order
            khat = character_table(cycles)
            l_cert = PermutationCertificate(
                tuple(rng.permutation(n).tolist()),
                tuple(np.exp(2j * np.pi * rng.random(n))),
            )
            m_cert = PermutationCertificate(
                tuple(rng.permutation(n).tolist()),
                tuple(np.exp(2j * np.pi * rng.random(n))),
            )
            d = np.exp(2j * np.pi * rng.random(n))
            tc = build_tc(khat, l_cert, m_cert, d)
            certs = verify_exchange(tc)
            for l, cert in enumerate(certs):
                lhs = tc.C @ z_row_gate(tc.that, l) @ tc.C.conj().T
                assert np.max(np.abs(lhs - cert.as_matrix())) < 1e-9
        # character-table row closure for every Abelian structure of order <= 32
        for cycles in all_cycle_structures(32):
            khat = character_table(cycles)
            for i in range(cycles.order):
                for j in range(cycles.order):
                    k = cycles.add(i, j)
                    assert np.max(np.abs(khat[i] * khat[j] - khat[k])) < 1e-9
        # local invariance of the canonical class, 100 cases
        for _ in range(100):
            u = random_unitary(rng, 4)
            k1 = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
            k2 = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
            assert kak_invariants(k1 @ u @ k2).close_to(kak_invariants(u), 1e-8)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v", "-s"]))
