"""Two-site gate lowering and long-distance gate-cost accounting.

The two particles and their coin bits live at two sites.  Shifts lower to
site-local controlled increments.  A coin step lowers to an ancilla
skeleton: each site marks whether its position register sits on the
frontier level, the marks select which of the three block groups fires
(frontier row, corner, frontier column), and per-position generalized
Toffolis gate the individual blocks.  All Toffolis are site-local; the
only cross-site work is the two-control coin blocks, each accounted as a
fixed number of long-distance CNOTs (default 8) rather than decomposed.

Uncompute ordering: the row and column marks are flipped on before any
block group and flipped off after the last one, with the per-position
marks computed and uncomputed immediately around their own block.  The
dense replay check pins this ordering down.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import WalkState
from .engine import Schedule
from .errors import NonFrontierBlock, NotBipartite

__all__ = [
    "CircuitIR",
    "CostReport",
    "Gate",
    "SiteLayout",
    "cost",
    "lower_coin_step",
    "lower_schedule",
    "lower_shift",
    "replay_schedule",
    "state_prep_cost_estimate",
]

#: Long-distance CNOTs charged for one cross-site two-control coin block.
CROSS_COST_PER_BLOCK = 8

_MAX_REPLAY_QUBITS = 24


@dataclass(frozen=True)
class SiteLayout:
    """Qubit naming and site assignment for a two-site system."""

    dimension: int

    @property
    def width(self) -> int:
        """Qubits per position register."""
        return max(1, (self.dimension - 1).bit_length())

    @property
    def position_registers(self) -> dict:
        w = self.width
        return {
            "p1": tuple(f"p1:{b}" for b in range(w)),
            "p2": tuple(f"p2:{b}" for b in range(w)),
        }

    @property
    def order(self) -> tuple[str, ...]:
        regs = self.position_registers
        return regs["p1"] + ("a1", "a3", "c1") + regs["p2"] + ("a2", "a4", "c2")

    def site_of(self, qubit: str) -> str:
        if qubit.startswith("p1") or qubit in ("a1", "a3", "c1"):
            return "A"
        if qubit.startswith("p2") or qubit in ("a2", "a4", "c2"):
            return "B"
        raise ValueError(f"unknown qubit {qubit!r}")

    def bit(self, qubit: str) -> int:
        return self.order.index(qubit)


@dataclass(frozen=True)
class Gate:
    """One node of the lowered circuit.

    Kinds: ``local-toffoli`` (pattern-controlled flip), ``ucg-node``
    (two-control four-qubit coin block, carrying its long-distance CNOT
    charge), ``local-incr`` (controlled increment mod d), ``cross-cnot``.
    """

    kind: str
    controls: tuple = ()
    targets: tuple = ()
    matrix: np.ndarray | None = None
    register: tuple = ()
    amount: int = 0
    modulus: int = 0
    cross_cnots: int = 0

    def operands(self) -> tuple[str, ...]:
        out = tuple(q for q, _ in self.controls) + tuple(self.targets)
        return out + tuple(self.register)

    def to_dict(self) -> dict:
        entry = {"kind": self.kind}
        if self.controls:
            entry["controls"] = [[q, b] for q, b in self.controls]
        if self.targets:
            entry["targets"] = list(self.targets)
        if self.matrix is not None:
            entry["matrix"] = [
                [[float(v.real), float(v.imag)] for v in row] for row in self.matrix
            ]
        if self.register:
            entry["register"] = list(self.register)
            entry["amount"] = self.amount
            entry["modulus"] = self.modulus
        if self.cross_cnots:
            entry["cross_cnots"] = self.cross_cnots
        return entry


@dataclass(frozen=True)
class CircuitIR:
    """Gate list over the two-site layout, with step boundary marks."""

    layout: SiteLayout
    gates: tuple = ()
    step_marks: tuple = ()

    def cross_cnot_count(self) -> int:
        return sum(
            g.cross_cnots + (1 if g.kind == "cross-cnot" else 0) for g in self.gates
        )

    def local_gate_count(self) -> int:
        return sum(1 for g in self.gates if g.kind.startswith("local-"))

    def validate_sites(self) -> None:
        for gate in self.gates:
            sites = {self.layout.site_of(q) for q in gate.operands()}
            if gate.kind.startswith("local-") and len(sites) != 1:
                raise ValueError(f"local gate spans sites {sites}: {gate}")
            if gate.kind == "cross-cnot" and len(sites) != 2:
                raise ValueError(f"cross-cnot does not span two sites: {gate}")

    def to_dict(self) -> dict:
        return {
            "d": self.layout.dimension,
            "qubits": [
                {"name": q, "site": self.layout.site_of(q)} for q in self.layout.order
            ],
            "gates": [g.to_dict() for g in self.gates],
            "step_marks": list(self.step_marks),
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def simulate(self, state: np.ndarray | None = None) -> np.ndarray:
        """Dense replay of the gate list; small systems only."""
        n_qubits = len(self.layout.order)
        if n_qubits > _MAX_REPLAY_QUBITS:
            raise ValueError(f"{n_qubits} qubits is too large for dense replay")
        if state is None:
            state = np.zeros(1 << n_qubits, dtype=np.complex128)
            state[0] = 1.0
        for gate in self.gates:
            state = _apply_gate(self.layout, gate, state)
        return state


def _pattern_controls(register: tuple, value: int) -> tuple:
    return tuple((q, (value >> b) & 1) for b, q in enumerate(register))


def _control_mask(layout: SiteLayout, controls, size: int) -> np.ndarray:
    idx = np.arange(size)
    mask = np.ones(size, dtype=bool)
    for qubit, want in controls:
        mask &= ((idx >> layout.bit(qubit)) & 1) == want
    return mask


def _apply_gate(layout: SiteLayout, gate: Gate, state: np.ndarray) -> np.ndarray:
    size = state.size
    idx = np.arange(size)
    if gate.kind in ("local-toffoli", "cross-cnot"):
        mask = _control_mask(layout, gate.controls, size)
        flip = 1 << layout.bit(gate.targets[0])
        out = state.copy()
        out[idx[mask]] = state[idx[mask] ^ flip]
        return out
    if gate.kind == "ucg-node":
        mask = _control_mask(layout, gate.controls, size)
        b0 = 1 << layout.bit(gate.targets[0])
        b1 = 1 << layout.bit(gate.targets[1])
        base = idx[mask & ((idx & b0) == 0) & ((idx & b1) == 0)]
        gathered = np.stack(
            [state[base], state[base | b0], state[base | b1], state[base | b0 | b1]]
        )
        mixed = gate.matrix @ gathered
        out = state.copy()
        out[base] = mixed[0]
        out[base | b0] = mixed[1]
        out[base | b1] = mixed[2]
        out[base | b0 | b1] = mixed[3]
        return out
    if gate.kind == "local-incr":
        mask = _control_mask(layout, gate.controls, size)
        sel = idx[mask]
        bits = [layout.bit(q) for q in gate.register]
        value = np.zeros(sel.size, dtype=np.int64)
        for b, bit in enumerate(bits):
            value |= ((sel >> bit) & 1) << b
        in_range = value < gate.modulus
        new_value = np.where(
            in_range, (value + gate.amount) % gate.modulus, value
        )
        dest = sel.copy()
        for b, bit in enumerate(bits):
            dest &= ~(1 << bit)
            dest |= ((new_value >> b) & 1) << bit
        out = state.copy()
        out[dest] = state[sel]
        return out
    raise ValueError(f"cannot replay gate kind {gate.kind!r}")


def lower_coin_step(
    k: int,
    blocks: Mapping,
    layout: SiteLayout,
    cross_cost: int = CROSS_COST_PER_BLOCK,
) -> list[Gate]:
    """Lower the coin map of one level-``k`` step to the ancilla skeleton.

    Raises :class:`NonFrontierBlock` for blocks off the frontier row and
    column of level ``k``.
    """
    if not blocks:
        return []
    regs = layout.position_registers
    row_blocks: dict[int, np.ndarray] = {}
    col_blocks: dict[int, np.ndarray] = {}
    corner = None
    for (x, y), matrix in sorted(blocks.items()):
        if max(x, y) > k or (x != k and y != k):
            raise NonFrontierBlock(
                f"block at ({x}, {y}) violates the level-{k} frontier structure"
            )
        if x == k and y == k:
            corner = matrix
        elif x == k:
            row_blocks[y] = matrix
        else:
            col_blocks[x] = matrix

    gates: list[Gate] = []
    mark_a1 = bool(row_blocks) or corner is not None
    mark_a2 = bool(col_blocks) or corner is not None
    if mark_a1:
        gates.append(
            Gate(
                "local-toffoli",
                controls=_pattern_controls(regs["p1"], k),
                targets=("a1",),
            )
        )
    if mark_a2:
        gates.append(
            Gate(
                "local-toffoli",
                controls=_pattern_controls(regs["p2"], k),
                targets=("a2",),
            )
        )
    for y, matrix in row_blocks.items():
        mark = Gate(
            "local-toffoli", controls=_pattern_controls(regs["p2"], y), targets=("a4",)
        )
        gates.append(mark)
        gates.append(
            Gate(
                "ucg-node",
                controls=(("a1", 1), ("a4", 1)),
                targets=("c1", "c2"),
                matrix=matrix,
                cross_cnots=cross_cost,
            )
        )
        gates.append(mark)
    if corner is not None:
        gates.append(
            Gate(
                "ucg-node",
                controls=(("a1", 1), ("a2", 1)),
                targets=("c1", "c2"),
                matrix=corner,
                cross_cnots=cross_cost,
            )
        )
    for x, matrix in col_blocks.items():
        mark = Gate(
            "local-toffoli", controls=_pattern_controls(regs["p1"], x), targets=("a3",)
        )
        gates.append(mark)
        gates.append(
            Gate(
                "ucg-node",
                controls=(("a2", 1), ("a3", 1)),
                targets=("c1", "c2"),
                matrix=matrix,
                cross_cnots=cross_cost,
            )
        )
        gates.append(mark)
    if mark_a2:
        gates.append(
            Gate(
                "local-toffoli",
                controls=_pattern_controls(regs["p2"], k),
                targets=("a2",),
            )
        )
    if mark_a1:
        gates.append(
            Gate(
                "local-toffoli",
                controls=_pattern_controls(regs["p1"], k),
                targets=("a1",),
            )
        )
    return gates


def lower_shift(power: int, layout: SiteLayout) -> list[Gate]:
    """Lower a power-``t`` shift to two site-local controlled increments."""
    regs = layout.position_registers
    d = layout.dimension
    return [
        Gate(
            "local-incr",
            controls=(("c1", 1),),
            register=regs["p1"],
            amount=power % d,
            modulus=d,
        ),
        Gate(
            "local-incr",
            controls=(("c2", 1),),
            register=regs["p2"],
            amount=power % d,
            modulus=d,
        ),
    ]


def _frontier_level(blocks: Mapping) -> int:
    return max(max(position) for position in blocks)


def lower_schedule(
    schedule: Schedule, cross_cost: int = CROSS_COST_PER_BLOCK
) -> CircuitIR:
    """Lower a full bipartite stepwise-structured schedule to gates."""
    if schedule.party_count != 2:
        raise NotBipartite(
            f"lowering handles two particles, got {schedule.party_count}"
        )
    layout = SiteLayout(schedule.dimension)
    gates: list[Gate] = []
    marks: list[int] = []
    for step in schedule.steps:
        if step.blocks:
            gates += lower_coin_step(
                _frontier_level(step.blocks), step.blocks, layout, cross_cost
            )
        gates += lower_shift(step.shift_power, layout)
        if step.post_blocks:
            gates += lower_coin_step(
                _frontier_level(step.post_blocks), step.post_blocks, layout, cross_cost
            )
        marks.append(len(gates))
    ir = CircuitIR(layout=layout, gates=tuple(gates), step_marks=tuple(marks))
    ir.validate_sites()
    return ir


def replay_schedule(
    schedule: Schedule, cross_cost: int = CROSS_COST_PER_BLOCK
) -> WalkState:
    """Dense replay of the lowered circuit, returned as a walk state.

    Checks that all four ancillae are back at zero at every step boundary
    and that no amplitude leaks onto nonzero-ancilla basis states.
    """
    ir = lower_schedule(schedule, cross_cost)
    layout = ir.layout
    n_qubits = len(layout.order)
    state = np.zeros(1 << n_qubits, dtype=np.complex128)
    state[0] = 1.0
    anc_bits = [layout.bit(q) for q in ("a1", "a2", "a3", "a4")]
    anc_mask = sum(1 << b for b in anc_bits)
    idx = np.arange(state.size)
    start = 0
    for mark in ir.step_marks:
        for gate in ir.gates[start:mark]:
            state = _apply_gate(layout, gate, state)
        start = mark
        leak = float(np.sum(np.abs(state[(idx & anc_mask) != 0]) ** 2))
        if leak > 1e-18:
            raise AssertionError(f"ancilla leakage {leak!r} at gate {mark}")

    width = layout.width
    c1_bit = layout.bit("c1")
    c2_bit = layout.bit("c2")
    p1_bits = [layout.bit(q) for q in layout.position_registers["p1"]]
    p2_bits = [layout.bit(q) for q in layout.position_registers["p2"]]
    mapping = {}
    for i in np.nonzero(np.abs(state) > 0)[0]:
        x = sum(((int(i) >> b) & 1) << bpos for bpos, b in enumerate(p1_bits))
        y = sum(((int(i) >> b) & 1) << bpos for bpos, b in enumerate(p2_bits))
        coin = ((int(i) >> c1_bit) & 1) + 2 * ((int(i) >> c2_bit) & 1)
        mapping[((x, y), coin)] = complex(state[i])
    return WalkState.from_amplitudes(2, schedule.dimension, mapping)


@dataclass(frozen=True)
class CostReport:
    """Long-distance CNOT accounting for one lowered schedule."""

    dimension: int
    cross_cost_per_block: int
    long_distance_cnots: int
    local_gates: int
    per_step: tuple = ()
    state_prep_estimate: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "d": self.dimension,
            "cross_cost_per_block": self.cross_cost_per_block,
            "long_distance_cnots": self.long_distance_cnots,
            "local_gates": self.local_gates,
            "per_step": [dict(entry) for entry in self.per_step],
        }
        if self.state_prep_estimate is not None:
            out["state_prep_estimate"] = self.state_prep_estimate
        return out

    def to_table(self) -> str:
        lines = [
            f"{'step':>6} {'cross':>8} {'local':>8}",
        ]
        for entry in self.per_step:
            lines.append(
                f"{entry['step']:>6} {entry['cross_cnots']:>8} {entry['local_gates']:>8}"
            )
        lines.append(
            f"{'total':>6} {self.long_distance_cnots:>8} {self.local_gates:>8}"
        )
        return "\n".join(lines)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def cost(schedule: Schedule, cross_cost: int = CROSS_COST_PER_BLOCK) -> CostReport:
    """Count long-distance CNOT charges over the whole lowered schedule."""
    if schedule.party_count != 2:
        raise NotBipartite(
            f"cost accounting handles two particles, got {schedule.party_count}"
        )
    layout = SiteLayout(schedule.dimension)
    per_step = []
    for index, step in enumerate(schedule.steps):
        gates: list[Gate] = []
        if step.blocks:
            gates += lower_coin_step(
                _frontier_level(step.blocks), step.blocks, layout, cross_cost
            )
        gates += lower_shift(step.shift_power, layout)
        if step.post_blocks:
            gates += lower_coin_step(
                _frontier_level(step.post_blocks), step.post_blocks, layout, cross_cost
            )
        fragment = CircuitIR(layout=layout, gates=tuple(gates))
        per_step.append(
            {
                "step": index,
                "cross_cnots": fragment.cross_cnot_count(),
                "local_gates": fragment.local_gate_count(),
            }
        )
    estimate = None
    d = schedule.dimension
    if d >= 2 and d & (d - 1) == 0:
        estimate = state_prep_cost_estimate(2 * int(math.log2(d)))
    return CostReport(
        dimension=d,
        cross_cost_per_block=cross_cost,
        long_distance_cnots=sum(e["cross_cnots"] for e in per_step),
        local_gates=sum(e["local_gates"] for e in per_step),
        per_step=tuple(per_step),
        state_prep_estimate=estimate,
    )


def state_prep_cost_estimate(n: int) -> dict:
    """Symbolic size and depth accounting for n-qubit state preparation.

    The walk view splits the register into two halves of ``ceil(n/2)``
    qubits.  Each of the ``2**ceil(n/2)`` coin steps costs one multiplexed
    block of size ``2**ceil(n/2)`` and depth ``2**ceil(n/2) / ceil(n/2)``;
    each shift costs a pair of adders of size ``n`` and depth ``log2 n``.
    The totals scale as ``2**n`` in size and ``2**n / n`` in depth.  The
    underlying multiplexer and adder circuits are not materialised here;
    only their published asymptotic term counts enter.
    """
    if n < 2:
        raise ValueError(f"need at least 2 qubits, got {n}")
    half = (n + 1) // 2
    steps = 2**half
    ucg_size = 2**half
    ucg_depth = 2**half / half
    adder_size = n
    adder_depth = math.log2(max(n, 2))
    return {
        "n": n,
        "coin_steps": steps,
        "ucg_size_each": ucg_size,
        "ucg_depth_each": ucg_depth,
        "shift_steps": steps,
        "adder_size_each": adder_size,
        "adder_depth_each": adder_depth,
        "size_total": steps * ucg_size + steps * adder_size,
        "depth_total": steps * ucg_depth + steps * adder_depth,
    }
