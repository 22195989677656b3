"""Exception types raised across the package."""


class CoinWalkError(Exception):
    """Base class for all coinwalk errors."""


class NonOrthonormalInput(CoinWalkError):
    """Prescribed columns of a unitary completion are not orthonormal.

    Carries the offending pair of column indices and their inner product
    (or the column index and its norm when a single column is bad).
    """

    def __init__(self, message, pair=None, value=None):
        super().__init__(message)
        self.pair = pair
        self.value = value


class DimensionMismatch(CoinWalkError):
    """Two states do not share particle count and qudit dimension."""


class OutOfGrid(CoinWalkError):
    """A shift would move an amplitude past the edge of the grid."""


class InconsistentAmplitudes(CoinWalkError):
    """A prescribed coin column is not unit norm."""


class IndexOutOfRange(CoinWalkError, IndexError):
    """Amplitude-table index outside the valid range."""


class NotPowerOfTwo(CoinWalkError):
    """The qudit dimension must be a power of two for this operation."""


class NotBipartite(CoinWalkError):
    """The operation is only defined for two-particle systems."""


class NonFrontierBlock(CoinWalkError):
    """A coin block sits at a position the stepwise structure forbids."""


class FormatError(CoinWalkError):
    """A state or schedule file failed validation."""
