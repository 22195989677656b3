"""Naive dense reference for the walk engine.

Materialises full operator matrices over the d**c * 2**c dimensional
space and multiplies them out.  Deliberately independent of the sparse
engine: positions wrap mod d here, which agrees with the engine on any
schedule that stays inside the grid.
"""

import numpy as np

from coinwalk.core import coin_bits, decode_position, encode_position


def basis_size(party_count, dimension):
    return dimension**party_count * 2**party_count


def coin_matrix(blocks, party_count, dimension):
    m = 2**party_count
    size = basis_size(party_count, dimension)
    full = np.eye(size, dtype=np.complex128)
    for position, block in blocks.items():
        base = encode_position(position, dimension) * m
        full[base : base + m, base : base + m] = block
    return full


def shift_matrix(power, party_count, dimension):
    m = 2**party_count
    size = basis_size(party_count, dimension)
    full = np.zeros((size, size), dtype=np.complex128)
    for code in range(dimension**party_count):
        position = decode_position(code, dimension, party_count)
        for j in range(m):
            bits = coin_bits(j, party_count)
            dest = tuple((x + power * b) % dimension for x, b in zip(position, bits))
            full[encode_position(dest, dimension) * m + j, code * m + j] = 1.0
    return full


def run_dense(schedule):
    c, d = schedule.party_count, schedule.dimension
    m = 2**c
    vec = np.zeros(basis_size(c, d), dtype=np.complex128)
    vec[0] = 1.0
    for step in schedule.steps:
        vec = coin_matrix(step.blocks, c, d) @ vec
        shift = shift_matrix(1, c, d)
        for _ in range(step.shift_power):
            vec = shift @ vec
        if step.post_blocks:
            vec = coin_matrix(step.post_blocks, c, d) @ vec
    return vec


def state_vector(state):
    """Flatten a WalkState into the dense layout used above."""
    m = 2**state.party_count
    vec = np.zeros(basis_size(state.party_count, state.dimension), dtype=np.complex128)
    for (position, coin), amp in state.items():
        vec[encode_position(position, state.dimension) * m + coin] = amp
    return vec
