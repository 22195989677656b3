"""Closed-form coin schedules for generalized Bell states.

A generalized Bell state pairs position ``j`` of the first particle with
position ``(j + m) mod d`` of the second and gives the pair the phase
``exp(2*pi*i*j*n/d)``.  Its walk schedule never needs the general
synthesis machinery: every coin is a phased identity, a single bit flip,
or one completed corner block, all written down directly.

The corner and flip blocks are real except at the last fork level, where
the amplitudes they finalize are the target's own; there each fork
component inherits the phase of the pair it lands on.  Without those
factors the schedule reproduces the state only up to one phase per pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PAULI_I, PAULI_X, TargetState, complete_unitary, party_kron
from .engine import CoinStep, Schedule
from .errors import IndexOutOfRange
from .stepwise import restore_blocks

__all__ = [
    "BellParams",
    "bell_amplitude",
    "bell_schedule",
    "bell_target",
    "pair_count",
]


@dataclass(frozen=True)
class BellParams:
    """Dimension plus phase and pairing offsets, reduced mod ``d``."""

    dimension: int
    phase_index: int = 0
    shift_index: int = 0

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError(f"dimension must be at least 2, got {self.dimension}")
        object.__setattr__(self, "phase_index", self.phase_index % self.dimension)
        object.__setattr__(self, "shift_index", self.shift_index % self.dimension)


def bell_target(params: BellParams) -> TargetState:
    """The generalized Bell state as a dense two-particle tensor."""
    d = params.dimension
    amps = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        amps[j, (j + params.shift_index) % d] = np.exp(
            2j * np.pi * j * params.phase_index / d
        ) / np.sqrt(d)
    return TargetState(amps)


def _heaviside(z: int) -> int:
    return 1 if z >= 0 else 0


def pair_count(d: int, m: int, k: int) -> int:
    """Number of pairs (z, w) with k <= z, w < d and w = (z + m) mod d.

    Closed form: ramp(d - m - k) + ramp(m - k), the unwrapped and wrapped
    runs that survive truncation at ``k``.
    """
    if not 0 <= m < d:
        raise IndexOutOfRange(f"offset {m} outside [0, {d})")
    if not 0 <= k < d:
        raise IndexOutOfRange(f"level {k} outside [0, {d})")
    return max(d - m - k, 0) + max(m - k, 0)


def bell_amplitude(params: BellParams, k: int, x: int, y: int) -> complex:
    """Level-``k`` intermediate amplitude of the Bell walk, in closed form.

    Matches the general suffix-sum expression applied to the Bell target:
    interior entries are the target's, one frontier run per axis holds
    ``1/sqrt(d)``, and the corner holds the square root of the surviving
    pair fraction.  The top level is the target itself.
    """
    d, n, m = params.dimension, params.phase_index, params.shift_index
    if not 0 <= k <= d - 1:
        raise IndexOutOfRange(f"level {k} outside [0, {d - 1}]")
    if not (0 <= x <= k and 0 <= y <= k):
        raise IndexOutOfRange(f"position ({x}, {y}) outside level {k}")

    def target_amp(a: int, b: int) -> complex:
        if b == (a + m) % d:
            return complex(np.exp(2j * np.pi * a * n / d) / np.sqrt(d))
        return 0j

    if k == d - 1:
        return target_amp(x, y)
    if x < k and y < k:
        return target_amp(x, y)
    if x == k and y < k:
        fires = max(0, k + m - d) <= y < min(m, k)
        return complex(1 / np.sqrt(d)) if fires else 0j
    if x < k and y == k:
        fires = max(0, k - m) <= x < min(d - m, k)
        return complex(1 / np.sqrt(d)) if fires else 0j
    return complex(np.sqrt(pair_count(d, m, k) / d))


def _corner_column(params: BellParams, k: int, last: bool) -> np.ndarray | None:
    """First column of the corner block at level ``k``; None when empty."""
    d, n, m = params.dimension, params.phase_index, params.shift_index
    omega = np.exp(2j * np.pi * n / d)
    sigma = pair_count(d, m, k)
    if sigma == 0:
        return None
    column = np.zeros(4, dtype=np.complex128)
    if m == 0:
        column[0] = np.sqrt(1.0 / (d - k)) * omega**k
        column[3] = np.sqrt(1.0 - 1.0 / (d - k))
        if last:
            column[3] *= omega ** (d - 1)
    else:
        column[1] = np.sqrt(_heaviside(m - k - 1) / sigma)
        column[2] = np.sqrt(_heaviside(d - m - k - 1) / sigma)
        column[3] = np.sqrt(pair_count(d, m, k + 1) / sigma)
        if last:
            column[1] *= omega ** (d - 1)
            column[2] *= omega ** (d - 2)
    return column


def _fork_blocks(params: BellParams, k: int) -> dict:
    """Tabulated fork coins of level ``k`` (k <= d - 2)."""
    d, n, m = params.dimension, params.phase_index, params.shift_index
    omega = np.exp(2j * np.pi * n / d)
    eye = np.eye(4, dtype=np.complex128)
    last = k == d - 2
    blocks = {}

    row_lo = k + m - d
    for y in range(max(0, row_lo), min(m, k)):
        if y == row_lo:
            blocks[(k, y)] = omega**k * eye
        else:
            matrix = party_kron([PAULI_X, PAULI_I])
            if last and y == m - 1:
                matrix = omega ** (d - 1) * matrix
            blocks[(k, y)] = matrix

    col_lo = k - m
    for x in range(max(0, col_lo), min(d - m, k)):
        if x == col_lo:
            blocks[(x, k)] = omega ** (k - m) * eye
        else:
            matrix = party_kron([PAULI_I, PAULI_X])
            if last and x == d - 1 - m:
                matrix = omega ** (d - 1 - m) * matrix
            blocks[(x, k)] = matrix

    column = _corner_column(params, k, last)
    if column is not None:
        norm = float(np.linalg.norm(column))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(
                f"corner column at level {k} has norm {norm!r}; "
                f"the closed form is inconsistent for {params}"
            )
        blocks[(k, k)] = complete_unitary({0: column})
    return blocks


def bell_schedule(params: BellParams) -> Schedule:
    """The ``d - 1`` step walk schedule engineering the Bell state.

    Uses only the tabulated blocks: phased identities along the settled
    row and column runs, bit flips along the moving runs, and one
    completed corner block per level, with restore coins after each shift.
    """
    d = params.dimension
    steps = tuple(
        CoinStep(
            blocks=_fork_blocks(params, k),
            shift_power=1,
            post_blocks=restore_blocks(k + 1, 2),
        )
        for k in range(d - 1)
    )
    return Schedule(2, d, steps)
