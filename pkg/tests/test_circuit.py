import json

import numpy as np
import pytest

from coinwalk.bell import BellParams, bell_schedule, bell_target
from coinwalk.circuit import (
    CROSS_COST_PER_BLOCK,
    CircuitIR,
    Gate,
    SiteLayout,
    cost,
    lower_coin_step,
    lower_schedule,
    lower_shift,
    replay_schedule,
    state_prep_cost_estimate,
)
from coinwalk.core import fidelity, random_target
from coinwalk.engine import CoinStep, Schedule, run
from coinwalk.errors import NonFrontierBlock, NotBipartite
from coinwalk.stepwise import restore_blocks, synthesize_stepwise


class TestLowerCoinStep:
    def test_empty_blocks_empty_fragment(self):
        assert lower_coin_step(3, {}, SiteLayout(8)) == []

    def test_bell_restore_level_counts(self):
        layout = SiteLayout(2)
        gates = lower_coin_step(1, restore_blocks(1, 2), layout)
        fragment = CircuitIR(layout=layout, gates=tuple(gates))
        # three two-control blocks, one per frontier position
        assert fragment.cross_cnot_count() == 3 * CROSS_COST_PER_BLOCK
        ucg = [g for g in gates if g.kind == "ucg-node"]
        assert len(ucg) == 3
        fragment.validate_sites()

    def test_off_frontier_block_rejected(self):
        with pytest.raises(NonFrontierBlock):
            lower_coin_step(2, {(1, 0): np.eye(4)}, SiteLayout(4))
        with pytest.raises(NonFrontierBlock):
            lower_coin_step(1, {(2, 1): np.eye(4)}, SiteLayout(4))

    def test_toffolis_are_local(self):
        layout = SiteLayout(4)
        blocks = restore_blocks(2, 2)
        gates = lower_coin_step(2, blocks, layout)
        for gate in gates:
            if gate.kind == "local-toffoli":
                sites = {layout.site_of(q) for q in gate.operands()}
                assert len(sites) == 1


class TestLowerShift:
    def test_no_cross_site_gates(self):
        layout = SiteLayout(16)
        fragment = CircuitIR(layout=layout, gates=tuple(lower_shift(3, layout)))
        assert fragment.cross_cnot_count() == 0
        assert fragment.local_gate_count() == 2
        fragment.validate_sites()

    def test_increment_wraps(self):
        layout = SiteLayout(4)
        ir = CircuitIR(layout=layout, gates=tuple(lower_shift(1, layout)))
        # place p1 = 3, c1 = 1
        state = np.zeros(1 << len(layout.order), dtype=np.complex128)
        index = (3 << layout.bit("p1:0")) | (1 << layout.bit("c1"))
        state[index] = 1.0
        out = ir.simulate(state)
        wrapped = 1 << layout.bit("c1")  # p1 wrapped from 3 to 0
        assert out[wrapped] == pytest.approx(1.0)

    def test_control_off_is_identity(self):
        layout = SiteLayout(4)
        ir = CircuitIR(layout=layout, gates=tuple(lower_shift(2, layout)))
        state = np.zeros(1 << len(layout.order), dtype=np.complex128)
        index = 2 << layout.bit("p1:0")
        state[index] = 1.0
        out = ir.simulate(state)
        assert out[index] == pytest.approx(1.0)


class TestReplay:
    @pytest.mark.parametrize("d", [2, 4])
    def test_replay_matches_engine(self, d):
        for seed in range(3):
            target = random_target(2, d, seed)
            sched = synthesize_stepwise(target)
            replayed = replay_schedule(sched)
            assert fidelity(replayed, run(sched)) >= 1 - 1e-10
            assert fidelity(replayed, target) >= 1 - 1e-10

    def test_replay_bell_closed_form(self):
        params = BellParams(4, 1, 2)
        sched = bell_schedule(params)
        assert fidelity(replay_schedule(sched), bell_target(params)) >= 1 - 1e-10

    def test_unfused_replay(self):
        target = random_target(2, 4, 9)
        sched = synthesize_stepwise(target, fused=False)
        assert fidelity(replay_schedule(sched), target) >= 1 - 1e-10


class TestCost:
    def test_bell_d2_golden_count(self):
        report = cost(bell_schedule(BellParams(2)))
        # one fork block plus three restores, 8 long-distance CNOTs each
        assert report.long_distance_cnots == 32

    def test_totals_match_breakdown(self):
        report = cost(synthesize_stepwise(random_target(2, 8, 2)))
        assert report.long_distance_cnots == sum(
            entry["cross_cnots"] for entry in report.per_step
        )
        assert report.local_gates == sum(
            entry["local_gates"] for entry in report.per_step
        )

    def test_shift_only_schedule_is_free(self):
        sched = Schedule(2, 4, (CoinStep(shift_power=2), CoinStep(shift_power=1)))
        assert cost(sched).long_distance_cnots == 0

    def test_doubling_ratio(self):
        counts = {}
        for d in (8, 16, 32, 64):
            counts[d] = cost(
                synthesize_stepwise(random_target(2, d, d))
            ).long_distance_cnots
        for d in (8, 16, 32):
            assert 3.2 <= counts[2 * d] / counts[d] <= 4.8

    def test_loglog_slope(self):
        dims = (4, 8, 16, 32, 64)
        counts = [
            cost(synthesize_stepwise(random_target(2, d, 1))).long_distance_cnots
            for d in dims
        ]
        slope = np.polyfit(np.log2(dims), np.log2(counts), 1)[0]
        assert abs(slope - 2.0) <= 0.2

    def test_rejects_three_particles(self):
        with pytest.raises(NotBipartite):
            cost(synthesize_stepwise(random_target(3, 2, 0)))

    def test_report_serialises(self, tmp_path):
        report = cost(synthesize_stepwise(random_target(2, 4, 5)))
        path = tmp_path / "report.json"
        report.save(path)
        data = json.loads(path.read_text())
        assert data["long_distance_cnots"] == report.long_distance_cnots
        assert "step" in report.to_table()


class TestCircuitIR:
    def test_ir_serialises(self, tmp_path):
        ir = lower_schedule(synthesize_stepwise(random_target(2, 4, 7)))
        path = tmp_path / "circuit.json"
        ir.save(path)
        data = json.loads(path.read_text())
        assert data["d"] == 4
        assert len(data["gates"]) == len(ir.gates)
        sites = {q["name"]: q["site"] for q in data["qubits"]}
        assert sites["a3"] == "A" and sites["a4"] == "B"

    def test_validate_rejects_cross_site_local_gate(self):
        layout = SiteLayout(2)
        bad = CircuitIR(
            layout=layout,
            gates=(
                Gate(
                    "local-toffoli",
                    controls=(("p1:0", 1),),
                    targets=("a2",),
                ),
            ),
        )
        with pytest.raises(ValueError):
            bad.validate_sites()

    def test_cross_cnot_counts_once(self):
        layout = SiteLayout(2)
        ir = CircuitIR(
            layout=layout,
            gates=(Gate("cross-cnot", controls=(("c1", 1),), targets=("c2",)),),
        )
        assert ir.cross_cnot_count() == 1
        ir.validate_sites()


class TestStatePrepEstimate:
    def test_theta_bounds(self):
        for n in range(8, 21):
            estimate = state_prep_cost_estimate(n)
            size_ratio = estimate["size_total"] / 2**n
            depth_ratio = estimate["depth_total"] * n / 2**n
            assert 0.9 <= size_ratio <= 2.8
            assert 1.8 <= depth_ratio <= 5.6

    def test_doubling_style_ratio(self):
        for n in range(8, 19):
            a = state_prep_cost_estimate(n)["size_total"]
            b = state_prep_cost_estimate(n + 2)["size_total"]
            assert 3.2 <= b / a <= 4.8

    def test_attached_to_power_of_two_reports(self):
        report = cost(synthesize_stepwise(random_target(2, 8, 3)))
        assert report.state_prep_estimate is not None
        assert report.state_prep_estimate["n"] == 6
        report_odd = cost(synthesize_stepwise(random_target(2, 5, 3)))
        assert report_odd.state_prep_estimate is None
