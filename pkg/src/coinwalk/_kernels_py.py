"""Pure-Python (NumPy) kernels for the walk engine hot loop.

The compiled extension in ``_kernels_cy`` implements the same two
functions; ``backend`` picks one at import time.
"""

from __future__ import annotations

import numpy as np

from .errors import OutOfGrid


def apply_blocks(amps: np.ndarray, rows: np.ndarray, mats: np.ndarray) -> None:
    """In place, left-multiply ``amps[rows[i]]`` by ``mats[i]``."""
    if rows.size:
        amps[rows] = np.einsum("rij,rj->ri", mats, amps[rows])


def shift_state(
    codes: np.ndarray,
    amps: np.ndarray,
    power: int,
    dimension: int,
    party_count: int,
):
    """Move every (position, coin) amplitude by ``power`` times its coin bits.

    Returns the regrouped ``(codes, amps)`` pair, codes sorted ascending.
    Raises :class:`OutOfGrid` if a populated amplitude would leave the grid.
    """
    m = amps.shape[1]
    rows, coins = np.nonzero(amps)
    if rows.size == 0:
        return codes[:0], amps[:0]

    strides = dimension ** np.arange(party_count, dtype=np.int64)
    src = codes[rows]
    for axis in range(party_count):
        moved = ((coins >> axis) & 1).astype(bool)
        if not moved.any():
            continue
        coord = (src[moved] // strides[axis]) % dimension
        bad = coord + power >= dimension
        if bad.any():
            row = rows[moved][bad][0]
            coin = coins[moved][bad][0]
            raise OutOfGrid(
                f"shift power {power} moves position code {int(codes[row])} "
                f"with coin {int(coin)} past dimension {dimension}"
            )

    offsets = np.array(
        [
            sum(((j >> i) & 1) * int(strides[i]) for i in range(party_count))
            for j in range(m)
        ],
        dtype=np.int64,
    )
    dest = src + power * offsets[coins]
    new_codes, inverse = np.unique(dest, return_inverse=True)
    new_amps = np.zeros((new_codes.size, m), dtype=np.complex128)
    new_amps[inverse, coins] = amps[rows, coins]
    return new_codes, new_amps
