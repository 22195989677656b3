"""Engineering multipartite qudit states with coined quantum walks.

The package synthesizes time- and position-dependent coin schedules that
drive a walk from the origin to an arbitrary target state, simulates the
walk to verify every construction, and lowers schedules to a two-site
gate list with long-distance CNOT accounting.
"""

from . import backend
from .bell import BellParams, bell_amplitude, bell_schedule, bell_target, pair_count
from .circuit import (
    CircuitIR,
    CostReport,
    cost,
    lower_coin_step,
    lower_schedule,
    lower_shift,
    replay_schedule,
    state_prep_cost_estimate,
)
from .core import (
    TargetState,
    WalkState,
    complete_unitary,
    fidelity,
    random_target,
)
from .engine import CoinStep, Schedule, apply_coin, apply_shift, run
from .errors import (
    CoinWalkError,
    DimensionMismatch,
    FormatError,
    InconsistentAmplitudes,
    IndexOutOfRange,
    NonFrontierBlock,
    NonOrthonormalInput,
    NotBipartite,
    NotPowerOfTwo,
    OutOfGrid,
)
from .logcoin import QuadrantSplit, quadrant_split, synthesize_logcoin
from .stepwise import (
    Cylinder,
    IntermediateAmplitudes,
    amplitude_cascade,
    direct_amplitude,
    direct_amplitude_table,
    fork_blocks,
    intermediate_amplitudes,
    restore_blocks,
    synthesize_stepwise,
)

__version__ = "0.1.0"
