import numpy as np
import pytest

from fastlocc.fixtures import (
    builtin_example,
    random_controlled_spec,
    random_state,
    random_unitary,
)
from fastlocc.groups import AbelianCycleStructure, weighted_inner
from fastlocc.protocols import (
    ControlledUnitarySpec,
    InvalidSpec,
    apply_op,
    check_branch_probabilities,
    compress_controlled,
    embed_unitary,
    entanglement_cost,
    max_branch_residual,
    resource_state,
    simulate_fast_controlled,
    simulate_fast_double,
    simulate_slow_controlled,
    simulate_slow_double,
    simulate_symmetrized,
    target_unitary,
)

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

CONTROLLED = ["ex1i", "ex1ii", "ex2i", "ex2ii", "ex3"]
DOUBLE = ["ex4", "ex5a", "ex5b", "ex5c", "ex6", "ex7", "ex8"]


def phase_distance(a, b):
    return abs(np.exp(1j * a) - np.exp(1j * b))


class TestApplyOp:
    def test_single_axis(self):
        rng = np.random.default_rng(1)
        state = rng.normal(size=(2, 3, 2)) + 0j
        u = random_unitary(rng, 3)
        out = apply_op(state, u, (1,))
        expect = np.einsum("ij,ajb->aib", u, state)
        assert np.allclose(out, expect)

    def test_two_axes(self):
        rng = np.random.default_rng(2)
        state = rng.normal(size=(2, 3, 4)) + 0j
        u = random_unitary(rng, 12)
        out = apply_op(state, u, (1, 2))
        expect = np.einsum(
            "ijkl,akl->aij", u.reshape(3, 4, 3, 4), state
        )
        assert np.allclose(out, expect)


class TestSpecs:
    def test_target_unitaries(self):
        for name in CONTROLLED + DOUBLE:
            u = target_unitary(builtin_example(name))
            assert u.shape[0] == u.shape[1]

    def test_ex5a_is_swap(self):
        assert np.allclose(target_unitary(builtin_example("ex5a")), SWAP)

    def test_validate_accepts_builtins(self):
        for name in CONTROLLED:
            builtin_example(name).validate()
        for name in DOUBLE:
            builtin_example(name).validate()

    def test_bad_subset(self):
        with pytest.raises(InvalidSpec):
            ControlledUnitarySpec(
                cycles=AbelianCycleStructure((2,)),
                subset=(0, 0),
                unitaries=[np.eye(2, dtype=complex)] * 2,
            )

    def test_bad_projectors(self):
        spec = ControlledUnitarySpec(
            cycles=AbelianCycleStructure((2,)),
            subset=(0, 1),
            unitaries=[np.eye(2, dtype=complex), np.diag([1.0, -1.0]).astype(complex)],
            projectors=[np.eye(2, dtype=complex), np.eye(2, dtype=complex)],
        )
        with pytest.raises(InvalidSpec):
            spec.validate()

    def test_rep_inconsistency(self):
        spec = ControlledUnitarySpec(
            cycles=AbelianCycleStructure((2,)),
            subset=(0, 1),
            unitaries=[
                np.eye(2, dtype=complex),
                np.diag([1.0, np.exp(0.4j)]),  # squares to neither V_0 nor a rep
            ],
        )
        with pytest.raises(InvalidSpec):
            spec.validate()

    def test_full_representation_extends_subset(self):
        spec = builtin_example("ex3", n=4, m=1)
        full = spec.full_representation()
        assert len(full) == 4
        # extension agrees with the stored subset {0, 1}
        assert np.allclose(full[0], spec.unitaries[0])
        assert np.allclose(full[1], spec.unitaries[1])
        # and is multiplicative on the whole group
        cycles = spec.cycles
        for j in range(4):
            for k in range(4):
                assert np.allclose(full[j] @ full[k], full[cycles.add(j, k)])

    def test_entanglement_cost(self):
        assert entanglement_cost(builtin_example("ex1i", n=4)) == 2.0
        assert entanglement_cost(builtin_example("ex7")) == 3.0
        assert entanglement_cost(builtin_example("ex8", n=3)) == pytest.approx(np.log2(6))

    def test_resource_state(self):
        phi = resource_state(3)
        assert np.isclose(np.linalg.norm(phi), 1.0)
        assert np.allclose(phi, np.eye(3) / np.sqrt(3))


class TestControlledSimulation:
    @pytest.mark.parametrize("name", CONTROLLED)
    def test_fast_phase_law(self, name):
        spec = builtin_example(name)
        rng = np.random.default_rng(42)
        psi = random_state(rng, spec.d_A * spec.d_B)
        transcripts = simulate_fast_controlled(spec, psi)
        n = spec.cycles.order
        assert len(transcripts) == n * n
        assert check_branch_probabilities(transcripts, 1e-9)
        for t in transcripts:
            if t.probability <= 1e-12:
                continue
            expect = 2 * np.pi * weighted_inner(spec.cycles, t.l, t.m)
            assert phase_distance(t.phase, expect) < 1e-9

    @pytest.mark.parametrize("name", CONTROLLED)
    def test_slow_phase_exact(self, name):
        spec = builtin_example(name)
        rng = np.random.default_rng(43)
        psi = random_state(rng, spec.d_A * spec.d_B)
        transcripts = simulate_slow_controlled(spec, psi)
        assert check_branch_probabilities(transcripts, 1e-9)
        for t in transcripts:
            if t.probability > 1e-12:
                assert phase_distance(t.phase, 0.0) < 1e-9

    def test_uniform_probabilities(self):
        spec = builtin_example("ex1i", n=3)
        rng = np.random.default_rng(44)
        psi = random_state(rng, spec.d_A * spec.d_B)
        for t in simulate_fast_controlled(spec, psi):
            assert t.probability == pytest.approx(1 / 9, abs=1e-10)

    def test_branch_residual(self):
        spec = builtin_example("ex2i")
        rng = np.random.default_rng(45)
        psi = random_state(rng, spec.d_A * spec.d_B)
        transcripts = simulate_fast_controlled(spec, psi)
        assert max_branch_residual(transcripts, target_unitary(spec), psi) < 1e-10

    def test_unnormalized_input_rejected(self):
        spec = builtin_example("ex1i")
        with pytest.raises(InvalidSpec):
            simulate_fast_controlled(spec, np.ones(4))

    def test_nondiagonal_bob_basis(self):
        rng = np.random.default_rng(46)
        spec = random_controlled_spec(rng, max_order=4, d_b_max=3, diagonal=False)
        psi = random_state(rng, spec.d_A * spec.d_B)
        fast = simulate_fast_controlled(spec, psi)
        slow = simulate_slow_controlled(spec, psi)
        assert check_branch_probabilities(fast, 1e-9)
        assert check_branch_probabilities(slow, 1e-9)


class TestDoubleSimulation:
    @pytest.mark.parametrize("name", DOUBLE)
    def test_fast(self, name):
        spec = builtin_example(name)
        rng = np.random.default_rng(50)
        psi = random_state(rng, spec.d_A * spec.d_B)
        transcripts = simulate_fast_double(spec, psi)
        n = spec.group.order
        assert len(transcripts) == n * n
        assert check_branch_probabilities(transcripts, 1e-9)
        assert max_branch_residual(transcripts, target_unitary(spec), psi) < 1e-9

    @pytest.mark.parametrize("name", DOUBLE)
    def test_slow(self, name):
        spec = builtin_example(name)
        rng = np.random.default_rng(51)
        psi = random_state(rng, spec.d_A * spec.d_B)
        transcripts = simulate_slow_double(spec, psi)
        assert check_branch_probabilities(transcripts, 1e-9)
        assert max_branch_residual(transcripts, target_unitary(spec), psi) < 1e-9

    @pytest.mark.parametrize("name", DOUBLE)
    def test_symmetrized(self, name):
        spec = builtin_example(name)
        rng = np.random.default_rng(52)
        psi = random_state(rng, spec.d_A * spec.d_B)
        transcripts = simulate_symmetrized(spec, psi)
        assert check_branch_probabilities(transcripts, 1e-9)
        assert max_branch_residual(transcripts, target_unitary(spec), psi) < 1e-9

    def test_missing_tc_rejected(self):
        spec = builtin_example("counterexample")
        with pytest.raises(InvalidSpec):
            simulate_fast_double(spec, np.eye(4, dtype=complex)[0])


class TestEmbedding:
    def test_direct_sum_extension(self):
        rng = np.random.default_rng(60)
        d_a, d_b, d_r = 2, 3, 1
        u = random_unitary(rng, d_a * d_b)
        r_block = random_unitary(rng, d_r * d_b)
        emb, residual = embed_unitary(u, d_a, d_b, r_block)
        assert residual < 1e-12
        assert emb.mode == "extension"
        assert emb.check_isometry()
        assert emb.d_Eprime == d_a + d_r

    def test_extension_rejects_nonunitary_block(self):
        rng = np.random.default_rng(61)
        u = random_unitary(rng, 4)
        with pytest.raises(InvalidSpec):
            embed_unitary(u, 2, 2, np.ones((2, 2), dtype=complex))

    def test_compression_rank_21(self):
        # rank-(2,1) control pattern on a 3-dimensional control space
        cycles = AbelianCycleStructure((2,))
        p0 = np.diag([1.0, 1.0, 0.0]).astype(complex)
        p1 = np.diag([0.0, 0.0, 1.0]).astype(complex)
        spec = ControlledUnitarySpec(
            cycles=cycles,
            subset=(0, 1),
            unitaries=[np.eye(2, dtype=complex), np.diag([1.0, -1.0]).astype(complex)],
            projectors=[p0, p1],
        )
        compressed, emb, residual = compress_controlled(spec)
        assert residual < 1e-10
        assert emb.mode == "compression"
        assert emb.check_isometry()
        assert compressed.projectors is None
        assert compressed.d_A == 2

    def test_compression_with_rotated_projectors(self):
        rng = np.random.default_rng(62)
        w = random_unitary(rng, 3)
        p0 = w @ np.diag([1.0, 1.0, 0.0]).astype(complex) @ w.conj().T
        p1 = w @ np.diag([0.0, 0.0, 1.0]).astype(complex) @ w.conj().T
        spec = ControlledUnitarySpec(
            cycles=AbelianCycleStructure((2,)),
            subset=(0, 1),
            unitaries=[np.eye(2, dtype=complex), np.diag([1.0, -1.0]).astype(complex)],
            projectors=[p0, p1],
        )
        _, emb, residual = compress_controlled(spec)
        assert residual < 1e-10
        assert emb.check_isometry()

    def test_compression_trivial_when_rank_one(self):
        spec = builtin_example("ex1i")
        compressed, emb, residual = compress_controlled(spec)
        assert residual == 0.0
        assert np.allclose(emb.isometry, np.eye(2))
