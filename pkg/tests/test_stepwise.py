import numpy as np
import pytest

from coinwalk.core import (
    PAULI_I,
    PAULI_X,
    TargetState,
    fidelity,
    is_unitary,
    party_kron,
    random_target,
)
from coinwalk.engine import run
from coinwalk.errors import IndexOutOfRange, NotBipartite
from coinwalk.stepwise import (
    Cylinder,
    amplitude_cascade,
    direct_amplitude,
    direct_amplitude_table,
    fork_blocks,
    intermediate_amplitudes,
    restore_blocks,
    synthesize_stepwise,
)

from dense_reference import state_vector

BELL = TargetState(np.array([[1, 0], [0, 1]]) / np.sqrt(2))
UNIFORM4 = TargetState(np.full((4, 4), 0.25))


class TestCylinder:
    def test_members_only_move_frontier_axes(self):
        cyl = Cylinder((2, 0), 2)
        assert set(cyl.members) == {(0, 0), (1, 0)}
        cyl = Cylinder((2, 2), 2)
        assert len(cyl.members) == 4

    def test_member_count_invariant(self):
        for base, k in [((3, 1, 3), 3), ((0, 0, 2), 2), ((1, 1, 1), 1)]:
            cyl = Cylinder(base, k)
            frontier_axes = sum(1 for x in base if x == k)
            assert len(cyl.members) == 2**frontier_axes


class TestIntermediateAmplitudes:
    def test_bell_level0_is_one(self):
        level = intermediate_amplitudes(BELL, 0)
        assert level.table.shape == (1, 1)
        assert level.table[0, 0] == pytest.approx(1.0)

    def test_top_level_is_target(self):
        uniform2 = TargetState(np.full((2, 2), 0.5))
        level = intermediate_amplitudes(uniform2, 1)
        assert np.array_equal(level.table, uniform2.amplitudes)

    def test_uniform4_level2_values(self):
        table = intermediate_amplitudes(UNIFORM4, 2).table
        assert np.allclose(table[:2, :2], 0.25)
        assert np.allclose(table[2, :2], np.sqrt(2) / 4)
        assert np.allclose(table[:2, 2], np.sqrt(2) / 4)
        assert table[2, 2] == pytest.approx(0.5)

    def test_every_level_normalised_with_real_frontier(self):
        target = random_target(2, 6, 21)
        for level in amplitude_cascade(target):
            k = level.level
            assert abs(np.linalg.norm(level.table) - 1) <= 1e-12
            if k < target.dimension - 1:
                frontier_row = level.table[k, :]
                frontier_col = level.table[:, k]
                assert np.all(frontier_row.imag == 0)
                assert np.all(frontier_col.imag == 0)
                assert np.all(frontier_row.real >= 0)
            assert np.array_equal(
                level.table[:k, :k], np.asarray(target.amplitudes)[:k, :k]
            )

    def test_multipartite_frontier_rss(self):
        target = random_target(3, 3, 5)
        level = intermediate_amplitudes(target, 1)
        amps = np.asarray(target.amplitudes)
        # Fully diagonal corner folds the whole 2x2x2 block above (1,1,1).
        expected = np.sqrt(np.sum(np.abs(amps[1:, 1:, 1:]) ** 2))
        assert level.table[1, 1, 1] == pytest.approx(expected)

    def test_level_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            intermediate_amplitudes(BELL, 2)


class TestDirectAmplitude:
    def test_matches_recurrence_on_random_targets(self):
        for d in range(2, 11):
            target = random_target(2, d, d)
            cascade = amplitude_cascade(target)
            for k in range(d):
                table = direct_amplitude_table(target, k)
                assert np.max(np.abs(table - cascade[k].table)) <= 1e-12

    def test_scalar_agrees_with_table(self):
        target = random_target(2, 5, 77)
        for k in range(5):
            table = direct_amplitude_table(target, k)
            for x in range(k + 1):
                for y in range(k + 1):
                    assert direct_amplitude(target, k, x, y) == pytest.approx(
                        complex(table[x, y]), abs=1e-14
                    )

    def test_interior_is_verbatim(self):
        target = random_target(2, 6, 3)
        for k in range(2, 6):
            for x in range(k):
                for y in range(k):
                    assert direct_amplitude(target, k, x, y) == complex(
                        target.amplitudes[x, y]
                    )

    def test_bell_top_corner(self):
        assert direct_amplitude(BELL, 1, 1, 1) == pytest.approx(1 / np.sqrt(2))

    def test_bounds(self):
        with pytest.raises(IndexOutOfRange):
            direct_amplitude(BELL, 0, 1, 0)
        with pytest.raises(NotBipartite):
            direct_amplitude_table(random_target(3, 2, 0), 0)


class TestForkBlocks:
    def test_bell_base_column(self):
        cascade = amplitude_cascade(BELL)
        blocks = fork_blocks(cascade[0], cascade[1])
        col = blocks[(0, 0)][:, 0]
        assert np.allclose(col, [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])

    def test_zero_denominator_gives_identity(self):
        basis = TargetState.basis(2, 3)
        cascade = amplitude_cascade(basis)
        for k in range(2):
            assert fork_blocks(cascade[k], cascade[k + 1]) == {}

    def test_uniform4_level2_edge_column(self):
        cascade = amplitude_cascade(UNIFORM4)
        blocks = fork_blocks(cascade[2], cascade[3])
        col = blocks[(2, 0)][:, 0]
        assert np.allclose(col, [1 / np.sqrt(2), 1 / np.sqrt(2), 0, 0])

    def test_blocks_sit_on_frontier_and_are_unitary(self):
        target = random_target(2, 7, 13)
        cascade = amplitude_cascade(target)
        for k in range(6):
            blocks = fork_blocks(cascade[k], cascade[k + 1])
            assert len(blocks) <= 2 * k + 1
            for (x, y), matrix in blocks.items():
                assert max(x, y) == k
                assert is_unitary(matrix, 1e-12)


class TestRestoreBlocks:
    def test_level1_table(self):
        blocks = restore_blocks(1, 2)
        assert np.array_equal(blocks[(1, 0)], party_kron([PAULI_X, PAULI_I]))
        assert np.array_equal(blocks[(0, 1)], party_kron([PAULI_I, PAULI_X]))
        assert np.array_equal(blocks[(1, 1)], party_kron([PAULI_X, PAULI_X]))
        assert (0, 0) not in blocks

    def test_corner_is_double_swap(self):
        corner = restore_blocks(2, 2)[(2, 2)]
        # both-move back to rest, and the two single-move states swap
        assert corner[0, 3] == 1 and corner[3, 0] == 1
        assert corner[1, 2] == 1 and corner[2, 1] == 1

    def test_multipartite_flips(self):
        blocks = restore_blocks(2, 3)
        assert np.array_equal(
            blocks[(2, 0, 2)], party_kron([PAULI_X, PAULI_I, PAULI_X])
        )


class TestSynthesizeStepwise:
    def test_dimension_one_is_empty(self):
        sched = synthesize_stepwise(TargetState.basis(2, 1))
        assert sched.steps == ()

    def test_bell_is_single_step(self):
        sched = synthesize_stepwise(BELL)
        assert len(sched.steps) == 1
        assert sched.total_shift() == 1
        final = run(sched)
        assert fidelity(final, BELL) >= 1 - 1e-12

    @pytest.mark.parametrize("c,d", [(2, 2), (2, 5), (2, 9), (3, 2), (3, 4)])
    def test_random_targets_reach_fidelity(self, c, d):
        rng = np.random.default_rng(c * 100 + d)
        for _ in range(5):
            target = random_target(c, d, rng)
            sched = synthesize_stepwise(target)
            assert len(sched.steps) == d - 1
            assert sched.total_shift() == d - 1
            assert fidelity(run(sched), target) >= 1 - 1e-12

    def test_construction_is_exact_including_phases(self):
        target = random_target(2, 6, 17)
        final = run(synthesize_stepwise(target))
        produced = state_vector(final)
        expected = np.zeros_like(produced)
        m = 4
        amps = np.asarray(target.amplitudes)
        for x in range(6):
            for y in range(6):
                expected[(x + 6 * y) * m] = amps[x, y]
        assert np.max(np.abs(produced - expected)) <= 1e-12

    def test_block_budget(self):
        for c, d in [(2, 6), (3, 3)]:
            target = random_target(c, d, 4)
            sched = synthesize_stepwise(target)
            assert sched.block_count() <= d**c
            for k, step in enumerate(sched.steps):
                assert len(step.blocks) <= (k + 1) ** c - k**c

    def test_degenerate_basis_target(self):
        for position in [(0, 0), (2, 1), (3, 3)]:
            target = TargetState.basis(2, 4, position)
            sched = synthesize_stepwise(target)
            assert fidelity(run(sched), target) >= 1 - 1e-12

    def test_unfused_collapse_property(self):
        target = random_target(3, 3, 23)
        sched = synthesize_stepwise(target, fused=False)
        final = run(sched, check_collapse=True)
        assert fidelity(final, target) >= 1 - 1e-12
