"""Half-line CMV operators, sparse-barrier transport, and coined quantum walks."""

from ._accel import BACKEND
from .cmv import (
    CmvOperator,
    DiskCoefficient,
    StateVector,
    VerblunskySequence,
    apply,
    apply_adjoint,
    build_cmv,
    operator_difference_apply,
    theta_block,
    truncate,
)
from .sparse import (
    CoinSpec,
    SparseSpec,
    barrier_coefficient,
    coin_sequence,
    nu,
    verblunsky,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CmvOperator",
    "DiskCoefficient",
    "StateVector",
    "VerblunskySequence",
    "apply",
    "apply_adjoint",
    "build_cmv",
    "operator_difference_apply",
    "theta_block",
    "truncate",
    "CoinSpec",
    "SparseSpec",
    "barrier_coefficient",
    "coin_sequence",
    "nu",
    "verblunsky",
    "__version__",
]
