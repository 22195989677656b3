"""Recursive synthesis with logarithmically many non-identity coin steps.

For two particles and a power-of-two dimension, the target splits into
four quadrants.  A single coarse step plants the square-root quadrant
weights at the quadrant anchors with one long shift, and the four
renormalised quadrant states are then engineered in parallel by merging
their sub-schedules position-wise, one merged step per recursion level.
The whole walk still makes ``d - 1`` shifts but only ``log2 d`` coin
time-steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import (
    NORM_TOL,
    PAULI_I,
    PAULI_X,
    TargetState,
    complete_unitary,
    party_kron,
)
from .engine import CoinStep, Schedule
from .errors import NotBipartite, NotPowerOfTwo

__all__ = ["QuadrantSplit", "quadrant_split", "synthesize_logcoin"]

_QUADRANTS = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class QuadrantSplit:
    """Quadrant weights and renormalised quadrant states of a target.

    ``gammas[a, b]`` is the probability mass of quadrant ``(a, b)`` and
    ``substates[a, b]`` the quadrant re-indexed to the half-size grid and
    normalised.  Empty quadrants carry the origin basis state as a
    placeholder.
    """

    gammas: Mapping[tuple[int, int], float]
    substates: Mapping[tuple[int, int], TargetState]

    def __post_init__(self):
        total = sum(self.gammas.values())
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"quadrant weights sum to {total!r}, expected 1")


def quadrant_split(target: TargetState) -> QuadrantSplit:
    """Split a bipartite power-of-two target into its four quadrants."""
    half = _check_splittable(target)
    amps = np.asarray(target.amplitudes)
    gammas = {}
    substates = {}
    for a, b in _QUADRANTS:
        quadrant = amps[a * half : (a + 1) * half, b * half : (b + 1) * half]
        gamma = float(np.sum(np.abs(quadrant) ** 2))
        gammas[(a, b)] = gamma
        if gamma > 0.0:
            substates[(a, b)] = TargetState(quadrant / np.sqrt(gamma))
        else:
            substates[(a, b)] = TargetState.basis(2, half)
    return QuadrantSplit(gammas=gammas, substates=substates)


def synthesize_logcoin(target: TargetState) -> Schedule:
    """Schedule with ``log2 d`` coin steps and shift powers d/2, d/4, ..., 1.

    Requires two particles and a power-of-two dimension.  The run result
    matches the stepwise scheme exactly; quadrant phases travel inside
    the renormalised substates.
    """
    _check_splittable(target, allow_base=True)
    steps = [
        CoinStep(blocks=blocks, shift_power=power, post_blocks=post)
        for blocks, power, post in _build_steps(target)
    ]
    return Schedule(target.party_count, target.dimension, tuple(steps))


def _check_splittable(target: TargetState, allow_base: bool = False) -> int:
    d = target.dimension
    if target.party_count != 2:
        raise NotBipartite(
            f"this scheme handles two particles, got {target.party_count}"
        )
    if d & (d - 1) != 0:
        raise NotPowerOfTwo(f"dimension {d} is not a power of two")
    if d < 2 and not allow_base:
        raise ValueError("nothing to split below dimension 2")
    return d // 2


def _base_step(target: TargetState):
    """The single fork-and-restore step of a dimension-2 target."""
    amps = np.asarray(target.amplitudes)
    column = np.array(
        [amps[0, 0], amps[1, 0], amps[0, 1], amps[1, 1]], dtype=np.complex128
    )
    block = complete_unitary({0: column})
    blocks = {} if np.array_equal(block, np.eye(4)) else {(0, 0): block}
    post = {
        (1, 0): party_kron([PAULI_X, PAULI_I]),
        (0, 1): party_kron([PAULI_I, PAULI_X]),
        (1, 1): party_kron([PAULI_X, PAULI_X]),
    }
    return [(blocks, 1, post)]


def _build_steps(target: TargetState):
    """Recursive (blocks, shift_power, post_blocks) triples for one target."""
    d = target.dimension
    if d == 1:
        return []
    if d == 2:
        return _base_step(target)

    half = d // 2
    split = quadrant_split(target)
    column = np.array(
        [np.sqrt(split.gammas[q]) for q in _QUADRANTS], dtype=np.complex128
    )
    coarse_block = complete_unitary({0: column})
    coarse_blocks = (
        {} if np.array_equal(coarse_block, np.eye(4)) else {(0, 0): coarse_block}
    )
    coarse_post = {}
    for a, b in _QUADRANTS[1:]:
        if split.gammas[(a, b)] > 0.0:
            flips = [PAULI_X if a else PAULI_I, PAULI_X if b else PAULI_I]
            coarse_post[(a * half, b * half)] = party_kron(flips)
    steps = [(coarse_blocks, half, coarse_post)]

    subs = {
        q: _build_steps(split.substates[q]) if split.gammas[q] > 0.0 else None
        for q in _QUADRANTS
    }
    depth = max(len(s) for s in subs.values() if s is not None)
    for j in range(depth):
        blocks = {}
        post = {}
        power = None
        for (a, b), sub in subs.items():
            if sub is None:
                continue
            sub_blocks, sub_power, sub_post = sub[j]
            power = sub_power
            offset = (a * half, b * half)
            for (x, y), matrix in sub_blocks.items():
                blocks[(x + offset[0], y + offset[1])] = matrix
            for (x, y), matrix in sub_post.items():
                post[(x + offset[0], y + offset[1])] = matrix
        steps.append((blocks, power, post))
    return steps
