"""Stepwise schedule synthesis: one walk step per lattice level.

The construction works backwards from the target.  Level ``k`` holds the
state supported on ``[0, k]^c`` that the walk must reach after ``k``
steps: interior amplitudes are the target's own, while each frontier
amplitude (some coordinate equal to ``k``) is the root sum of squares of
the target mass that will later spread from that position.  The forward
coin at a frontier position then splits its amplitude into exactly the
directions that grow the support, and a restore coin at the newly
reached positions turns the coin register back to rest.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .core import (
    INPUT_TOL,
    NORM_TOL,
    PAULI_I,
    PAULI_X,
    TargetState,
    coin_index,
    complete_unitary,
    party_kron,
)
from .engine import CoinStep, Schedule, fuse_block_maps
from .errors import InconsistentAmplitudes, IndexOutOfRange, NotBipartite

__all__ = [
    "Cylinder",
    "IntermediateAmplitudes",
    "amplitude_cascade",
    "direct_amplitude",
    "direct_amplitude_table",
    "fork_blocks",
    "intermediate_amplitudes",
    "restore_blocks",
    "synthesize_stepwise",
]


@dataclass(frozen=True)
class IntermediateAmplitudes:
    """Amplitude table of the level-``k`` intermediate state.

    The table is a dense ``(k+1)^c`` tensor.  Frontier entries are real
    and non-negative; interior entries equal the target amplitudes.
    """

    level: int
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.complex128)
        expected = (self.level + 1,) * table.ndim
        if table.shape != expected:
            raise ValueError(f"table shape {table.shape}, expected {expected}")
        norm = float(np.linalg.norm(table))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"level {self.level} table norm is {norm!r}")
        table = table.copy()
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    @property
    def party_count(self) -> int:
        return self.table.ndim


@dataclass(frozen=True)
class Cylinder:
    """Direction bit vectors available at a frontier position.

    A direction may only move the particles whose coordinate sits on the
    frontier level; all other bits are pinned to zero.
    """

    base: tuple[int, ...]
    level: int

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(x) for x in self.base))
        if any(not 0 <= x <= self.level for x in self.base):
            raise ValueError(f"position {self.base} outside level {self.level}")

    @property
    def free_axes(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.base) if x == self.level)

    @property
    def members(self) -> tuple[tuple[int, ...], ...]:
        free = self.free_axes
        c = len(self.base)
        out = []
        for choice in product((0, 1), repeat=len(free)):
            bits = [0] * c
            for axis, bit in zip(free, choice):
                bits[axis] = bit
            out.append(tuple(bits))
        return tuple(out)


def _frontier_positions(level: int, party_count: int):
    """Positions in [0, level]^c with at least one coordinate at the level.

    Enumerated by the exact set of pinned coordinates, so the cost is the
    frontier size rather than the full grid.
    """
    for mask in range(1, 1 << party_count):
        free_axes = [i for i in range(party_count) if not (mask >> i) & 1]
        for free in product(range(level), repeat=len(free_axes)):
            position = [level] * party_count
            for axis, value in zip(free_axes, free):
                position[axis] = value
            yield tuple(position)


def amplitude_cascade(target: TargetState) -> list[IntermediateAmplitudes]:
    """All intermediate tables, level 0 through ``d - 1``.

    Level ``d - 1`` is the target itself.  Each earlier level folds the
    outermost row and column (and their analogues for more particles)
    into frontier root-sum-square entries and keeps the interior verbatim.
    """
    c = target.party_count
    d = target.dimension
    tables = [None] * d
    tables[d - 1] = np.asarray(target.amplitudes, dtype=np.complex128)
    for k in range(d - 2, -1, -1):
        upper = tables[k + 1]
        mass = np.abs(upper) ** 2
        for axis in range(c):
            lead = mass.take(range(k), axis=axis)
            tail = mass.take([k, k + 1], axis=axis).sum(axis=axis, keepdims=True)
            mass = np.concatenate([lead, tail], axis=axis)
        table = np.sqrt(mass).astype(np.complex128)
        interior = (slice(0, k),) * c
        table[interior] = upper[interior]
        tables[k] = table
    return [IntermediateAmplitudes(k, tables[k]) for k in range(d)]


def intermediate_amplitudes(target: TargetState, k: int) -> IntermediateAmplitudes:
    """The level-``k`` table, computed by the backward recursion."""
    if not 0 <= k <= target.dimension - 1:
        raise IndexOutOfRange(f"level {k} outside [0, {target.dimension - 1}]")
    return amplitude_cascade(target)[k]


def direct_amplitude_table(target: TargetState, k: int) -> np.ndarray:
    """Closed-form level-``k`` table for two particles, via suffix sums.

    Oracle-equivalent to :func:`intermediate_amplitudes`; the recursion
    never has to run.  At the top level the table is the target itself
    (the frontier entries keep their phases there, since nothing has been
    folded yet).
    """
    if target.party_count != 2:
        raise NotBipartite("the closed form is only implemented for two particles")
    d = target.dimension
    if not 0 <= k <= d - 1:
        raise IndexOutOfRange(f"level {k} outside [0, {d - 1}]")
    amps = np.asarray(target.amplitudes)
    if k == d - 1:
        return amps.copy()
    mass = np.abs(amps) ** 2
    row_tail = mass[k:, :].sum(axis=0)  # over z >= k, per y
    col_tail = mass[:, k:].sum(axis=1)  # over w >= k, per x
    corner = mass[k:, k:].sum()
    table = np.zeros((k + 1, k + 1), dtype=np.complex128)
    table[:k, :k] = amps[:k, :k]
    table[k, :k] = np.sqrt(row_tail[:k])
    table[:k, k] = np.sqrt(col_tail[:k])
    table[k, k] = np.sqrt(corner)
    return table


def direct_amplitude(target: TargetState, k: int, x: int, y: int) -> complex:
    """Closed-form single entry of the level-``k`` table (two particles)."""
    if target.party_count != 2:
        raise NotBipartite("the closed form is only implemented for two particles")
    d = target.dimension
    if not 0 <= k <= d - 1:
        raise IndexOutOfRange(f"level {k} outside [0, {d - 1}]")
    if not (0 <= x <= k and 0 <= y <= k):
        raise IndexOutOfRange(f"position ({x}, {y}) outside level {k}")
    amps = np.asarray(target.amplitudes)
    if k == d - 1:
        return complex(amps[x, y])
    mass = np.abs(amps) ** 2
    if x < k and y < k:
        return complex(amps[x, y])
    if x == k and y < k:
        return complex(np.sqrt(mass[k:, y].sum()))
    if x < k and y == k:
        return complex(np.sqrt(mass[x, k:].sum()))
    return complex(np.sqrt(mass[k:, k:].sum()))


def fork_blocks(
    level: IntermediateAmplitudes, level_next: IntermediateAmplitudes
) -> dict:
    """Coin blocks that split level-``k`` frontier amplitudes one level out.

    The first column of each block routes the resting coin into the
    cylinder directions, weighted by the next level's amplitudes; the
    rest of the block is completed deterministically.  Frontier positions
    holding no amplitude keep the identity (returned map omits them).
    """
    k = level.level
    if level_next.level != k + 1:
        raise ValueError(
            f"expected consecutive levels, got {k} and {level_next.level}"
        )
    c = level.party_count
    m = 1 << c
    eye = np.eye(m)
    blocks = {}
    for position in _frontier_positions(k, c):
        denom = complex(level.table[position])
        if denom == 0:
            continue
        column = np.zeros(m, dtype=np.complex128)
        for bits in Cylinder(position, k).members:
            reach = tuple(p + z for p, z in zip(position, bits))
            column[coin_index(bits)] = level_next.table[reach] / denom
        norm = float(np.linalg.norm(column))
        if abs(norm - 1.0) > INPUT_TOL:
            raise InconsistentAmplitudes(
                f"fork column at {position}, level {k}, has norm {norm!r}"
            )
        block = complete_unitary({0: column})
        if np.array_equal(block, eye):
            continue
        blocks[position] = block
    return blocks


@lru_cache(maxsize=None)
def _flip_block(party_count: int, mask: int) -> np.ndarray:
    flips = [
        PAULI_X if (mask >> i) & 1 else PAULI_I for i in range(party_count)
    ]
    block = party_kron(flips)
    block.flags.writeable = False
    return block


def restore_blocks(level: int, party_count: int) -> dict:
    """Coin blocks that return arriving amplitudes to the rest coin state.

    After the shift into level ``k``, the amplitude reaching a position
    carries the one coin state whose bits mark the coordinates that just
    became ``k``.  Flipping exactly those bits restores the rest state,
    so each block is a tensor product of bit flips.
    """
    if level < 1:
        raise ValueError(f"restores only exist from level 1 on, got {level}")
    blocks = {}
    for position in _frontier_positions(level, party_count):
        mask = sum(1 << i for i, x in enumerate(position) if x == level)
        blocks[position] = _flip_block(party_count, mask)
    return blocks


def synthesize_stepwise(target: TargetState, *, fused: bool = True) -> Schedule:
    """Schedule of ``d - 1`` unit-shift steps that engineers ``target``.

    With ``fused`` (the default) each step's restore map is multiplied
    into the same step's fork map, so one block per position is executed;
    the unfused form keeps the restores as explicit post-shift maps, which
    makes the per-step coin collapse checkable.  Both execute to the same
    state, exactly, including all phases.
    """
    c = target.party_count
    d = target.dimension
    if d == 1:
        return Schedule(c, d, ())
    cascade = amplitude_cascade(target)
    forks = [fork_blocks(cascade[k], cascade[k + 1]) for k in range(d - 1)]
    restores = {k: restore_blocks(k, c) for k in range(1, d)}

    steps = []
    if fused:
        for k in range(d - 1):
            blocks = forks[k] if k == 0 else fuse_block_maps(restores[k], forks[k])
            post = restores[d - 1] if k == d - 2 else {}
            steps.append(CoinStep(blocks=blocks, shift_power=1, post_blocks=post))
    else:
        for k in range(d - 1):
            steps.append(
                CoinStep(blocks=forks[k], shift_power=1, post_blocks=restores[k + 1])
            )
    return Schedule(c, d, tuple(steps))
