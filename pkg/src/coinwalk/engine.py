"""Walk execution: coin application, conditional shifts, full schedules.

A schedule step bundles a coin map, a shift power, and an optional
post-shift coin map.  The post map exists because every synthesis routine
ends a step by turning the coin register back to its rest state at the
positions the shift has just populated; the very last of those restores
follows the final shift, so it cannot be folded into a following step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import backend
from .core import (
    UNITARY_TOL,
    WalkState,
    encode_position,
    is_unitary,
)
from .errors import FormatError

__all__ = [
    "CoinStep",
    "Schedule",
    "apply_coin",
    "apply_shift",
    "fuse_block_maps",
    "run",
]

# Code spaces larger than this skip the compiled shift kernel, whose
# scratch array is proportional to d**c.
_MAX_KERNEL_SPACE = 1 << 24


def _clean_blocks(blocks: Mapping | None) -> dict:
    """Validate and copy a position -> unitary mapping, sorted by position."""
    if not blocks:
        return {}
    out = {}
    width = None
    for position in sorted(blocks):
        position = tuple(int(x) for x in position)
        if width is None:
            width = len(position)
        elif len(position) != width:
            raise ValueError("block positions have mixed lengths")
        if any(x < 0 for x in position):
            raise ValueError(f"negative coordinate in position {position}")
        matrix = np.asarray(blocks[position], dtype=np.complex128)
        if not is_unitary(matrix, UNITARY_TOL):
            raise ValueError(f"block at {position} is not unitary")
        matrix = matrix.copy()
        matrix.flags.writeable = False
        out[position] = matrix
    return out


@dataclass(frozen=True)
class CoinStep:
    """One walk step: coin blocks, then ``shift_power`` shifts, then restores.

    Positions absent from either map act as the identity.
    """

    blocks: Mapping = field(default_factory=dict)
    shift_power: int = 1
    post_blocks: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if int(self.shift_power) < 1:
            raise ValueError(f"shift_power must be >= 1, got {self.shift_power}")
        object.__setattr__(self, "shift_power", int(self.shift_power))
        object.__setattr__(self, "blocks", _clean_blocks(self.blocks))
        object.__setattr__(self, "post_blocks", _clean_blocks(self.post_blocks))

    def block_count(self) -> int:
        return len(self.blocks) + len(self.post_blocks)


@dataclass(frozen=True)
class Schedule:
    """An engineered walk: system parameters plus the ordered steps."""

    party_count: int
    dimension: int
    steps: tuple[CoinStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        m = 1 << self.party_count
        for step in self.steps:
            for blocks in (step.blocks, step.post_blocks):
                for position, matrix in blocks.items():
                    if len(position) != self.party_count:
                        raise ValueError(
                            f"position {position} does not have "
                            f"{self.party_count} coordinates"
                        )
                    if any(x >= self.dimension for x in position):
                        raise ValueError(
                            f"position {position} outside a grid of side "
                            f"{self.dimension}"
                        )
                    if matrix.shape != (m, m):
                        raise ValueError(
                            f"block at {position} has shape {matrix.shape}, "
                            f"expected {(m, m)}"
                        )

    def total_shift(self) -> int:
        return sum(step.shift_power for step in self.steps)

    def block_count(self) -> int:
        """Number of explicitly stored (non-identity) blocks."""
        return sum(step.block_count() for step in self.steps)

    def describe(self) -> str:
        """Human-readable dump of every non-identity block, tagged by step."""
        lines = []
        for index, step in enumerate(self.steps):
            lines.append(f"step {index}: shift_power={step.shift_power}")
            for label, blocks in (("coin", step.blocks), ("restore", step.post_blocks)):
                for position, matrix in blocks.items():
                    lines.append(f"  {label} block at {position}:")
                    for row in matrix:
                        lines.append(
                            "    [" + ", ".join(f"{v:.6g}" for v in row) + "]"
                        )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        def dump_blocks(blocks):
            return [
                {
                    "pos": list(position),
                    "matrix": [
                        [[float(v.real), float(v.imag)] for v in row]
                        for row in matrix
                    ],
                }
                for position, matrix in blocks.items()
            ]

        steps = []
        for step in self.steps:
            entry = {
                "shift_power": step.shift_power,
                "blocks": dump_blocks(step.blocks),
            }
            if step.post_blocks:
                entry["post_blocks"] = dump_blocks(step.post_blocks)
            steps.append(entry)
        return {"c": self.party_count, "d": self.dimension, "steps": steps}

    @classmethod
    def from_dict(cls, data: dict) -> "Schedule":
        def parse_blocks(entries):
            blocks = {}
            for entry in entries:
                position = tuple(int(x) for x in entry["pos"])
                matrix = np.array(
                    [[complex(re, im) for re, im in row] for row in entry["matrix"]],
                    dtype=np.complex128,
                )
                blocks[position] = matrix
            return blocks

        try:
            steps = [
                CoinStep(
                    blocks=parse_blocks(entry.get("blocks", [])),
                    shift_power=int(entry.get("shift_power", 1)),
                    post_blocks=parse_blocks(entry.get("post_blocks", [])),
                )
                for entry in data["steps"]
            ]
            return cls(int(data["c"]), int(data["d"]), tuple(steps))
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed schedule: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Schedule":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"cannot read schedule from {path}: {exc}") from exc
        return cls.from_dict(data)


def fuse_block_maps(first: Mapping, second: Mapping) -> dict:
    """Coin map equivalent to applying ``first`` then ``second``."""
    if not first:
        return dict(second)
    if not second:
        return dict(first)
    size = next(iter(first.values())).shape[0]
    eye = np.eye(size, dtype=np.complex128)
    out = {}
    for position in sorted(set(first) | set(second)):
        a = np.asarray(first.get(position, eye))
        b = np.asarray(second.get(position, eye))
        out[position] = b @ a
    return out


def apply_coin(state: WalkState, blocks: Mapping) -> WalkState:
    """Multiply the coin vector at each populated position by its block.

    Positions without a block (or blocks at unpopulated positions) are
    untouched.  The norm is preserved.
    """
    if not blocks:
        return state
    matrices = list(blocks.values())
    block_codes = np.fromiter(
        (encode_position(p, state.dimension) for p in blocks),
        dtype=np.int64,
        count=len(blocks),
    )
    order = np.argsort(block_codes)
    _, rows, which = np.intersect1d(
        state.codes, block_codes[order], assume_unique=True, return_indices=True
    )
    if rows.size == 0:
        return state
    mats = np.ascontiguousarray(
        np.stack([matrices[i] for i in order[which]]).astype(np.complex128, copy=False)
    )
    amps = state.amps.copy()
    backend.kernels.apply_blocks(amps, rows.astype(np.int64), mats)
    return WalkState(
        state.party_count, state.dimension, state.codes, amps, _validate=False
    )


def apply_shift(state: WalkState, power: int) -> WalkState:
    """Move each amplitude by ``power`` lattice steps along its coin bits.

    Raises :class:`OutOfGrid` when a populated amplitude would leave the
    grid; synthesized schedules never trigger this.
    """
    if power < 1:
        raise ValueError(f"shift power must be >= 1, got {power}")
    kernels = backend.kernels
    if (
        kernels is not backend._kernels_py
        and (
            state.dimension**state.party_count > _MAX_KERNEL_SPACE
            or state.party_count > 6
        )
    ):
        kernels = backend._kernels_py
    codes, amps = kernels.shift_state(
        np.ascontiguousarray(state.codes),
        np.ascontiguousarray(state.amps),
        power,
        state.dimension,
        state.party_count,
    )
    return WalkState(
        state.party_count, state.dimension, codes, amps, _validate=False
    )


def run(
    schedule: Schedule,
    *,
    check_collapse: bool = False,
    collapse_tol: float = 1e-9,
) -> WalkState:
    """Execute a schedule from the origin ket and return the final state.

    With ``check_collapse`` the run asserts, after every step that carries
    post-shift restores, that the coin register is back at rest; this is
    the structural property synthesized schedules maintain step by step.
    """
    state = WalkState.origin(schedule.party_count, schedule.dimension)
    for index, step in enumerate(schedule.steps):
        state = apply_coin(state, step.blocks)
        state = apply_shift(state, step.shift_power)
        if step.post_blocks:
            state = apply_coin(state, step.post_blocks)
            if check_collapse:
                rest = state.coin_rest_probability()
                if 1.0 - rest > collapse_tol:
                    raise AssertionError(
                        f"coin register not at rest after step {index}: "
                        f"rest probability {rest!r}"
                    )
    return state
