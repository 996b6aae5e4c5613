import numpy as np
import pytest

from fastlocc.constructions import (
    CoefficientConditionError,
    approximate_diagonal,
    approximate_phase_subset,
    build_c_matrix,
    check_fast_conditions,
    coefficient_search,
    conversion_coeffs,
    convert_to_double_group,
    cyclic_coeffs,
    diagonalize_controlled,
    dihedral_coeffs,
    tc_from_coefficients,
)
from fastlocc.fixtures import builtin_example, random_controlled_spec, random_state
from fastlocc.groups import AbelianCycleStructure, FactorSystem, abelian_group
from fastlocc.linalg import is_unitary, kak_invariants
from fastlocc.protocols import (
    InvalidSpec,
    check_branch_probabilities,
    entanglement_cost,
    simulate_fast_double,
    target_unitary,
)

I2 = np.eye(2, dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


class TestCMatrix:
    def test_qubit_pair(self):
        _, g = abelian_group((2,))
        c = np.array([1.0, 1j]) / np.sqrt(2)
        cmat = build_c_matrix(g, FactorSystem.trivial(2), c)
        assert np.allclose(cmat, np.array([[1, 1j], [1j, 1]]) / np.sqrt(2))

    def test_identity_coeffs(self):
        _, g = abelian_group((2, 2))
        c = np.zeros(4, dtype=complex)
        c[0] = 1.0
        assert np.allclose(build_c_matrix(g, FactorSystem.trivial(4), c), np.eye(4))


class TestConditions:
    @pytest.mark.parametrize("name", ["ex4", "ex5a", "ex5b", "ex5c", "ex6", "ex7", "ex8"])
    def test_builtin_coeffs_pass(self, name):
        spec = builtin_example(name)
        report = check_fast_conditions(spec.group, spec.factor, spec.coeffs)
        assert report.passed, report.diagnostics
        assert report.rows_group.order == spec.group.order

    def test_counterexample_fails_third_only(self):
        spec = builtin_example("counterexample")
        report = check_fast_conditions(spec.group, spec.factor, spec.coeffs)
        assert report.equal_magnitude
        assert report.c_unitary
        assert report.rows_group is None
        assert not report.passed

    def test_wrong_magnitude(self):
        _, g = abelian_group((2,))
        report = check_fast_conditions(g, FactorSystem.trivial(2), [1.0, 0.0])
        assert not report.equal_magnitude
        assert not report.passed

    def test_perturbation_breaks_conditions(self):
        # nudging one coefficient off the passing grid by 1e-3 must break
        # condition (ii) or (iii)
        spec = builtin_example("ex5a")
        c = spec.coeffs.copy()
        c[1] *= np.exp(1e-3j)
        report = check_fast_conditions(spec.group, spec.factor, c)
        assert not report.passed
        assert report.equal_magnitude  # (i) is phase-insensitive


class TestTCFromCoefficients:
    def test_qubit_pair_exact(self):
        spec = builtin_example("ex4")
        tc = tc_from_coefficients(spec.group, spec.factor, spec.coeffs)
        assert np.allclose(tc.T, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
        assert np.allclose(tc.C, np.array([[1, 1j], [1j, 1]]) / np.sqrt(2))

    def test_failing_coeffs_raise(self):
        spec = builtin_example("counterexample")
        with pytest.raises(CoefficientConditionError):
            tc_from_coefficients(spec.group, spec.factor, spec.coeffs)

    @pytest.mark.parametrize("name", ["ex5a", "ex6", "ex7", "ex8"])
    def test_exchange_holds(self, name):
        from fastlocc.hadamard import verify_exchange

        spec = builtin_example(name)
        tc = tc_from_coefficients(spec.group, spec.factor, spec.coeffs)
        certs = verify_exchange(tc)
        assert len(certs) == spec.group.order


class TestCoefficientFamilies:
    def test_cyclic_values(self):
        assert np.allclose(cyclic_coeffs(2), np.array([1.0, -1j]) / np.sqrt(2))
        assert np.allclose(
            cyclic_coeffs(3),
            np.array([1.0, np.exp(-2j * np.pi / 3), 1.0]) / np.sqrt(3),
        )

    def test_dihedral_values(self):
        assert np.allclose(dihedral_coeffs(2, 1), np.array([1, 1j, 1j, -1]) / 2)

    def test_dihedral_requires_coprime(self):
        with pytest.raises(ValueError):
            dihedral_coeffs(4, 2)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_cyclic_pass_conditions(self, n):
        _, g = abelian_group((n,))
        report = check_fast_conditions(g, FactorSystem.trivial(n), cyclic_coeffs(n))
        assert report.passed, report.diagnostics

    @pytest.mark.parametrize("n", range(2, 7))
    def test_dihedral_pass_conditions(self, n):
        spec = builtin_example("ex8", n=n)
        report = check_fast_conditions(spec.group, spec.factor, spec.coeffs)
        assert report.passed, report.diagnostics

    def test_conversion_reduces_to_cyclic(self):
        for n in range(2, 9):
            assert np.allclose(
                conversion_coeffs(AbelianCycleStructure((n,))), cyclic_coeffs(n)
            )


class TestSearch:
    def test_qubit_z_pair(self):
        _, g = abelian_group((2,))
        result = coefficient_search(g, [I2, Z], [I2, Z], FactorSystem.trivial(2))
        assert result.examined == 4
        assert not result.truncated
        assert len(result.hits) == 2
        for hit in result.hits:
            assert hit.target_unitary_ok
            assert not hit.is_product
            assert hit.kak.close_to((np.pi / 4, 0, 0), 1e-8)
        ks = sorted(h.kvec[0] for h in result.hits)
        assert ks == [1, 3]  # c(1) = +-i/sqrt(2)

    def test_budget_truncation(self):
        _, g = abelian_group((2, 2))
        mats = [I2, Z, np.array([[0, 1], [1, 0]], dtype=complex), None]
        mats[3] = mats[2] @ Z
        result = coefficient_search(g, mats, mats, FactorSystem.trivial(4), budget=10)
        assert result.truncated
        assert result.examined == 10

    def test_requires_normalized_factor(self):
        _, g = abelian_group((2,))
        table = np.ones((2, 2), dtype=complex)
        table[1, 1] = np.exp(0.5j)
        with pytest.raises(ValueError):
            coefficient_search(g, [I2, Z], [I2, Z], FactorSystem(table))


class TestConversion:
    def test_controlled_z(self):
        spec = builtin_example("ex1ii")  # diagonal V_k already
        spec2 = builtin_example("ex3", n=2, m=1)
        for s in (spec, spec2):
            conv = convert_to_double_group(s)
            assert conv.residual < 1e-9
            assert np.max(np.abs(np.abs(conv.zeta) - 1.0)) < 1e-9
            report = check_fast_conditions(
                conv.double_spec.group, conv.double_spec.factor, conv.coeffs
            )
            assert report.passed, report.diagnostics
            assert entanglement_cost(conv.double_spec) == entanglement_cost(s)

    def test_cz_frozen_values(self):
        spec = builtin_example("ex3", n=2, m=1)
        conv = convert_to_double_group(spec)
        assert np.allclose(conv.coeffs, np.array([1.0, -1j]) / np.sqrt(2))
        # eigenphases are e^{-i pi/4} on matching (k, q_b) parity, e^{i pi/4}
        # otherwise
        assert np.isclose(conv.zeta[0, 0], np.exp(-1j * np.pi / 4))
        assert np.isclose(conv.zeta[0, 1], np.exp(1j * np.pi / 4))
        assert np.isclose(conv.zeta[1, 0], np.exp(1j * np.pi / 4))
        assert np.isclose(conv.zeta[1, 1], np.exp(-1j * np.pi / 4))
        w = sum(
            conv.coeffs[f] * np.kron(conv.q_ops[f], conv.r_ops[f]) for f in range(2)
        )
        assert np.max(np.abs(np.kron(conv.m_a, conv.m_b) @ w - target_unitary(spec))) < 1e-12

    def test_nondiagonal_rejected(self):
        rng = np.random.default_rng(70)
        spec = random_controlled_spec(rng, max_order=4, d_b_max=3, diagonal=False)
        with pytest.raises(InvalidSpec):
            convert_to_double_group(spec)

    def test_diagonalize_then_convert(self):
        rng = np.random.default_rng(71)
        spec = random_controlled_spec(rng, max_order=6, d_b_max=3, diagonal=False)
        dspec, w = diagonalize_controlled(spec)
        assert is_unitary(w)
        conv = convert_to_double_group(dspec)
        assert conv.residual < 1e-9

    def test_converted_spec_simulates(self):
        spec = builtin_example("ex1ii")
        conv = convert_to_double_group(spec)
        rng = np.random.default_rng(72)
        psi = random_state(rng, conv.double_spec.d_A * conv.double_spec.d_B)
        transcripts = simulate_fast_double(conv.double_spec, psi)
        assert check_branch_probabilities(transcripts, 1e-9)


class TestApproximation:
    def test_exact_phase_on_grid(self):
        res = approximate_phase_subset(2 * np.pi / 3, 3)
        assert res.error < 1e-12
        assert res.spec.subset == (0, 1)
        assert res.cost_ebits == pytest.approx(np.log2(3))

    def test_identity_collapse(self):
        res = approximate_phase_subset(0.1, 2)  # rounds to m = 0
        assert res.spec.subset == (0,)
        assert np.allclose(target_unitary(res.spec), np.eye(4))

    def test_error_bound(self):
        rng = np.random.default_rng(80)
        for n in (8, 32, 128):
            phi = float(rng.uniform(0, 2 * np.pi))
            res = approximate_phase_subset(phi, n)
            assert res.error <= 2 * np.sin(np.pi / n) + 1e-12

    def test_diagonal_rounding(self):
        rng = np.random.default_rng(81)
        d_a = d_b = 2
        u = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, size=d_a * d_b)))
        n = 16
        res = approximate_diagonal(u, d_a, d_b, n)
        assert res.error <= 2 * np.sin(np.pi / n) + 1e-12
        assert res.cost_ebits == pytest.approx(d_b * np.log2(n))
        approx_u = target_unitary(res.spec)
        assert np.max(np.abs(approx_u - u)) <= res.error + 1e-12

    def test_diagonal_merges_rows(self):
        # equal rows share one projector, so the subset stays duplicate-free
        u = np.diag([1.0, 1.0, 1.0, 1.0]).astype(complex)
        res = approximate_diagonal(u, 2, 2, 4)
        assert len(res.spec.subset) == 1
        assert np.allclose(res.spec.projector(0), np.eye(2))

    def test_rejects_nondiagonal(self):
        with pytest.raises(InvalidSpec):
            approximate_diagonal(np.ones((4, 4), dtype=complex), 2, 2, 4)
