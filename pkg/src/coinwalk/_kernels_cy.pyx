# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the walk engine hot loop.

Mirrors the API of ``_kernels_py``: a batched coin-block multiply and the
shift regrouping pass.
"""

import numpy as np

cimport numpy as cnp

from .errors import OutOfGrid

cnp.import_array()


def apply_blocks(
    cnp.complex128_t[:, ::1] amps,
    cnp.int64_t[::1] rows,
    cnp.complex128_t[:, :, ::1] mats,
):
    """In place, left-multiply ``amps[rows[i]]`` by ``mats[i]``."""
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t m = amps.shape[1]
    cdef Py_ssize_t r, i, j, row
    cdef cnp.complex128_t acc
    scratch_arr = np.empty(m, dtype=np.complex128)
    cdef cnp.complex128_t[::1] scratch = scratch_arr
    for r in range(n):
        row = rows[r]
        for i in range(m):
            acc = 0
            for j in range(m):
                acc = acc + mats[r, i, j] * amps[row, j]
            scratch[i] = acc
        for i in range(m):
            amps[row, i] = scratch[i]


def shift_state(
    const cnp.int64_t[::1] codes,
    const cnp.complex128_t[:, ::1] amps,
    long long power,
    long long dimension,
    int party_count,
):
    """Move every (position, coin) amplitude by ``power`` times its coin bits."""
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t m = amps.shape[1]
    cdef Py_ssize_t r, j
    cdef int axis
    cdef long long code, rest, coord, dest, space = 1
    cdef long long off

    for axis in range(party_count):
        space *= dimension

    # Pass 1: bounds checks and destination marking over the code space.
    mark_arr = np.zeros(space, dtype=np.int64)
    cdef cnp.int64_t[::1] mark = mark_arr
    cdef long long[64] offsets
    cdef long long stride
    for j in range(m):
        stride = 1
        off = 0
        for axis in range(party_count):
            if (j >> axis) & 1:
                off += stride
            stride *= dimension
        offsets[j] = off

    for r in range(n):
        code = codes[r]
        for j in range(m):
            if amps[r, j] == 0:
                continue
            rest = code
            for axis in range(party_count):
                coord = rest % dimension
                rest = rest // dimension
                if (j >> axis) & 1 and coord + power >= dimension:
                    raise OutOfGrid(
                        f"shift power {power} moves position code {code} "
                        f"with coin {j} past dimension {dimension}"
                    )
            mark[code + power * offsets[j]] = 1

    # Prefix scan assigns each destination its sorted row index.
    cdef long long total = 0
    for dest in range(space):
        if mark[dest]:
            mark[dest] = total + 1
            total += 1

    new_codes_arr = np.empty(total, dtype=np.int64)
    new_amps_arr = np.zeros((total, m), dtype=np.complex128)
    cdef cnp.int64_t[::1] new_codes = new_codes_arr
    cdef cnp.complex128_t[:, ::1] new_amps = new_amps_arr

    cdef long long row
    for r in range(n):
        code = codes[r]
        for j in range(m):
            if amps[r, j] == 0:
                continue
            dest = code + power * offsets[j]
            row = mark[dest] - 1
            new_codes[row] = dest
            new_amps[row, j] = amps[r, j]

    return new_codes_arr, new_amps_arr
