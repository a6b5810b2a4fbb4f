"""Noise-parameter estimation and channel discrimination bounds for
teleportation-covariant channels."""

from . import channels, discrimination, gaussian, linalg, metrology, stretching
from .channels import ChannelSpec, QuantumChannel, choi_matrix, make_channel
from .discrimination import DiscriminationTask, bound_chain
from .errors import (
    BoundaryError,
    CovarianceError,
    DimensionLimitError,
    DomainError,
    ShapeError,
    TeleboundsError,
    TruncationError,
)
from .gaussian import GaussianChannelParams, GaussianState
from .metrology import EstimationTask, channel_qfi

__version__ = "0.1.0"
