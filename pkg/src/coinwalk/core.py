"""Domain types for positions, coins, states, and small-matrix utilities.

Conventions shared by the whole package:

* A *position* is a tuple of ``party_count`` non-negative lattice
  coordinates, one per particle, each strictly below the qudit dimension.
* A *coin* basis state carries one direction bit per particle.  Basis
  index ``j`` assigns particle ``i`` the bit ``(j >> i) & 1``; for two
  particles the order is (stay, first moves, second moves, both move).
* The conditional shift adds the coin bit vector to the position, once
  per unit of shift power.
"""

from __future__ import annotations

import json
from functools import reduce
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, FormatError, NonOrthonormalInput

#: Tolerance for invariant checks (norms, unitarity).
UNITARY_TOL = 1e-12
NORM_TOL = 1e-12
#: Tolerance for validating caller-supplied data.
INPUT_TOL = 1e-10

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)

__all__ = [
    "PAULI_I",
    "PAULI_X",
    "TargetState",
    "WalkState",
    "coin_bits",
    "coin_index",
    "complete_unitary",
    "decode_position",
    "encode_position",
    "fidelity",
    "is_unitary",
    "party_kron",
    "random_target",
]


def coin_bits(index: int, party_count: int) -> tuple[int, ...]:
    """Direction bit of each particle for coin basis state ``index``."""
    return tuple((index >> i) & 1 for i in range(party_count))


def coin_index(bits: Sequence[int]) -> int:
    """Inverse of :func:`coin_bits`."""
    return sum(int(b) << i for i, b in enumerate(bits))


def encode_position(position: Sequence[int], dimension: int) -> int:
    """Pack lattice coordinates into a single integer code, base ``dimension``."""
    code = 0
    for coord in reversed(position):
        code = code * dimension + int(coord)
    return code


def decode_position(code: int, dimension: int, party_count: int) -> tuple[int, ...]:
    """Unpack an integer code produced by :func:`encode_position`."""
    coords = []
    for _ in range(party_count):
        code, rem = divmod(code, dimension)
        coords.append(int(rem))
    return tuple(coords)


def party_kron(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Tensor product of one-particle coin operators, ``mats[i]`` on particle ``i``.

    Particle 0 owns the lowest coin bit, so the numeric Kronecker product
    runs over the factors in reverse.
    """
    return reduce(np.kron, [np.asarray(m, dtype=np.complex128) for m in reversed(mats)])


def is_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    """Whether ``matrix`` satisfies U†U = I entrywise within ``tol``."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    gram = matrix.conj().T @ matrix
    return float(np.max(np.abs(gram - np.eye(matrix.shape[0])))) <= tol


def complete_unitary(columns: Mapping[int, Sequence[complex]]) -> np.ndarray:
    """Extend prescribed orthonormal columns to a full unitary matrix.

    The free columns are filled deterministically: canonical basis vectors
    are orthogonalised against everything chosen so far, in index order,
    skipping any that already lie in the span.  Prescribing column 0 as
    the first basis vector therefore yields the identity exactly.

    Raises
    ------
    NonOrthonormalInput
        If the prescribed columns are not orthonormal within 1e-10; the
        offending pair and inner product are reported.
    """
    if not columns:
        raise ValueError("at least one column must be prescribed")
    items = sorted(columns.items())
    dim = len(np.asarray(items[0][1]).ravel())
    prescribed = {}
    for idx, vec in items:
        vec = np.asarray(vec, dtype=np.complex128).ravel()
        if vec.shape != (dim,):
            raise ValueError(f"column {idx} has length {vec.size}, expected {dim}")
        if not 0 <= idx < dim:
            raise ValueError(f"column index {idx} outside [0, {dim})")
        prescribed[idx] = vec

    indices = list(prescribed)
    for pos, i in enumerate(indices):
        norm = float(np.linalg.norm(prescribed[i]))
        if abs(norm - 1.0) > INPUT_TOL:
            raise NonOrthonormalInput(
                f"column {i} has norm {norm!r}", pair=(i, i), value=norm
            )
        for j in indices[pos + 1 :]:
            inner = complex(np.vdot(prescribed[i], prescribed[j]))
            if abs(inner) > INPUT_TOL:
                raise NonOrthonormalInput(
                    f"columns {i} and {j} have inner product {inner!r}",
                    pair=(i, j),
                    value=inner,
                )

    out = np.zeros((dim, dim), dtype=np.complex128)
    chosen = np.empty((dim, dim), dtype=np.complex128)
    count = 0
    for i, vec in prescribed.items():
        out[:, i] = vec
        chosen[:, count] = vec
        count += 1

    free = [i for i in range(dim) if i not in prescribed]
    for basis_index in range(dim):
        if not free:
            break
        residual = np.zeros(dim, dtype=np.complex128)
        residual[basis_index] = 1.0
        # Two orthogonalisation passes keep the result stable and deterministic.
        span = chosen[:, :count]
        for _ in range(2):
            residual -= span @ (span.conj().T @ residual)
        norm = float(np.sqrt(np.vdot(residual, residual).real))
        if norm <= INPUT_TOL:
            continue
        residual /= norm
        out[:, free.pop(0)] = residual
        chosen[:, count] = residual
        count += 1
    if free:
        raise NonOrthonormalInput(
            f"could not complete the matrix; {len(free)} columns left unfilled",
            pair=None,
            value=None,
        )
    return out


class TargetState:
    """Dense amplitude tensor of the state to engineer, one axis per particle.

    ``amplitudes[x0, x1, ...]`` is the amplitude on the position basis
    state with those coordinates.  The tensor must have unit norm.
    """

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes: np.ndarray):
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if amps.ndim < 1:
            raise ValueError("amplitude tensor needs at least one axis")
        if len(set(amps.shape)) != 1:
            raise ValueError(f"axes must share one dimension, got shape {amps.shape}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"target state norm is {norm!r}, expected 1")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def __setattr__(self, name, value):
        raise AttributeError("TargetState is immutable")

    @property
    def party_count(self) -> int:
        return self.amplitudes.ndim

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]

    def __repr__(self) -> str:
        return (
            f"TargetState(party_count={self.party_count}, "
            f"dimension={self.dimension})"
        )

    @classmethod
    def basis(cls, party_count: int, dimension: int, position=None) -> "TargetState":
        """Computational basis state, the origin by default."""
        amps = np.zeros((dimension,) * party_count, dtype=np.complex128)
        amps[tuple(position) if position is not None else (0,) * party_count] = 1.0
        return cls(amps)

    def to_dict(self) -> dict:
        entries = []
        for index in np.ndindex(*self.amplitudes.shape):
            value = self.amplitudes[index]
            if value != 0:
                entries.append(
                    {
                        "index": list(index),
                        "re": float(value.real),
                        "im": float(value.imag),
                    }
                )
        return {
            "c": self.party_count,
            "d": self.dimension,
            "amplitudes": entries,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TargetState":
        try:
            c = int(data["c"])
            d = int(data["d"])
            amps = np.zeros((d,) * c, dtype=np.complex128)
            for entry in data["amplitudes"]:
                index = tuple(int(i) for i in entry["index"])
                if len(index) != c or any(not 0 <= i < d for i in index):
                    raise FormatError(f"amplitude index {index} outside the grid")
                amps[index] = float(entry.get("re", 0.0)) + 1j * float(
                    entry.get("im", 0.0)
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed target state: {exc}") from exc
        try:
            return cls(amps)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "TargetState":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"cannot read target state from {path}: {exc}") from exc
        return cls.from_dict(data)


def random_target(
    party_count: int, dimension: int, rng: np.random.Generator | int | None = None
) -> TargetState:
    """Normalised tensor of standard complex Gaussian amplitudes."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    shape = (dimension,) * party_count
    amps = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return TargetState(amps / np.linalg.norm(amps))


class WalkState:
    """Sparse system ket over (position, coin) basis states.

    Amplitudes are stored grouped by position: ``codes`` holds the packed
    position codes in increasing order and ``amps[r, j]`` the amplitude of
    coin basis state ``j`` at the r-th position.  Instances are immutable;
    every operation returns a new state.
    """

    __slots__ = ("party_count", "dimension", "codes", "amps")

    def __init__(
        self,
        party_count: int,
        dimension: int,
        codes: np.ndarray,
        amps: np.ndarray,
        _validate: bool = True,
    ):
        # The engine passes _validate=False for states it derives from an
        # already-valid one by norm-preserving operations; those arrays are
        # freshly owned, so they are frozen without copying.
        codes = np.asarray(codes, dtype=np.int64)
        amps = np.asarray(amps, dtype=np.complex128)
        if _validate:
            m = 1 << party_count
            if amps.ndim != 2 or amps.shape != (codes.size, m):
                raise ValueError(
                    f"amplitude array shape {amps.shape} does not match "
                    f"{codes.size} positions with {m} coin states"
                )
            if codes.size and np.any(np.diff(codes) <= 0):
                raise ValueError("position codes must be strictly increasing")
            if codes.size and (codes[0] < 0 or codes[-1] >= dimension**party_count):
                raise ValueError("position code outside the grid")
            keep = np.any(amps != 0, axis=1)
            if not np.all(keep):
                codes = codes[keep]
                amps = amps[keep]
            norm = float(np.linalg.norm(amps))
            if abs(norm - 1.0) > NORM_TOL:
                raise ValueError(f"walk state norm is {norm!r}, expected 1")
            codes = codes.copy()
            amps = amps.copy()
        codes.flags.writeable = False
        amps.flags.writeable = False
        object.__setattr__(self, "party_count", party_count)
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "amps", amps)

    def __setattr__(self, name, value):
        raise AttributeError("WalkState is immutable")

    @classmethod
    def origin(cls, party_count: int, dimension: int) -> "WalkState":
        """The initial ket: every particle at 0, coin fully at rest."""
        amps = np.zeros((1, 1 << party_count), dtype=np.complex128)
        amps[0, 0] = 1.0
        return cls(party_count, dimension, np.zeros(1, dtype=np.int64), amps)

    @classmethod
    def from_amplitudes(
        cls, party_count: int, dimension: int, mapping: Mapping
    ) -> "WalkState":
        """Build from ``{(position, coin): amplitude}``; coins may be ints or bit tuples."""
        m = 1 << party_count
        table: dict[int, np.ndarray] = {}
        for (position, coin), value in mapping.items():
            code = encode_position(position, dimension)
            if any(not 0 <= x < dimension for x in position):
                raise ValueError(f"position {tuple(position)} outside the grid")
            j = coin if isinstance(coin, (int, np.integer)) else coin_index(coin)
            table.setdefault(code, np.zeros(m, dtype=np.complex128))[j] = value
        codes = np.array(sorted(table), dtype=np.int64)
        amps = np.array([table[c] for c in codes], dtype=np.complex128).reshape(-1, m)
        return cls(party_count, dimension, codes, amps)

    @classmethod
    def from_target(cls, target: TargetState, coin: int = 0) -> "WalkState":
        """Product of a target state with a single coin basis state."""
        c, d = target.party_count, target.dimension
        flat = target.amplitudes.reshape(-1, order="F")
        codes = np.nonzero(flat)[0].astype(np.int64)
        amps = np.zeros((codes.size, 1 << c), dtype=np.complex128)
        amps[:, coin] = flat[codes]
        return cls(c, d, codes, amps)

    @property
    def position_count(self) -> int:
        return int(self.codes.size)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def positions(self) -> list[tuple[int, ...]]:
        return [
            decode_position(int(c), self.dimension, self.party_count)
            for c in self.codes
        ]

    def amplitude(self, position: Sequence[int], coin) -> complex:
        code = encode_position(position, self.dimension)
        j = coin if isinstance(coin, (int, np.integer)) else coin_index(coin)
        row = np.searchsorted(self.codes, code)
        if row < self.codes.size and self.codes[row] == code:
            return complex(self.amps[row, j])
        return 0j

    def items(self) -> Iterator[tuple[tuple[tuple[int, ...], int], complex]]:
        """Iterate over ((position, coin index), amplitude) for nonzero entries."""
        for row, code in enumerate(self.codes):
            position = decode_position(int(code), self.dimension, self.party_count)
            for j in range(self.amps.shape[1]):
                value = self.amps[row, j]
                if value != 0:
                    yield (position, j), complex(value)

    def as_dict(self) -> dict:
        return dict(self.items())

    def coin_rest_probability(self) -> float:
        """Probability mass carried by the all-zero coin state."""
        return float(np.sum(np.abs(self.amps[:, 0]) ** 2))

    def to_dense(self) -> np.ndarray:
        """Dense tensor of shape (d,)*c + (2**c,); small systems only."""
        c, d = self.party_count, self.dimension
        out = np.zeros((d**c, 1 << c), dtype=np.complex128)
        out[self.codes] = self.amps
        return out.reshape((d,) * c + (1 << c,), order="F")


def _as_walk_state(state) -> WalkState:
    if isinstance(state, WalkState):
        return state
    if isinstance(state, TargetState):
        return WalkState.from_target(state)
    raise TypeError(f"expected WalkState or TargetState, got {type(state).__name__}")


def fidelity(a, b) -> float:
    """Squared overlap of two pure states, insensitive to global phase.

    Either argument may be a :class:`TargetState`, which is read as the
    target tensored with the rest coin state.
    """
    a = _as_walk_state(a)
    b = _as_walk_state(b)
    if a.party_count != b.party_count or a.dimension != b.dimension:
        raise DimensionMismatch(
            f"states live on different systems: "
            f"({a.party_count}, {a.dimension}) vs ({b.party_count}, {b.dimension})"
        )
    _, ia, ib = np.intersect1d(
        a.codes, b.codes, assume_unique=True, return_indices=True
    )
    if ia.size == 0:
        return 0.0
    overlap = complex(np.sum(np.conj(a.amps[ia]) * b.amps[ib]))
    return float(min(abs(overlap) ** 2, 1.0))
