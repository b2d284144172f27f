"""Typed client for the logoground scoring service."""

from .client import (
    ClientConfig,
    ClientValidationError,
    ConnectionFailedError,
    ResponseSchemaError,
    ScoringClient,
    ScoringClientError,
    ServiceRequestError,
)
from .models import (
    ConfigOverrides,
    GroundTruthSpec,
    GroupScore,
    GroupSubmission,
    JudgeDiagnostics,
    RolloutScore,
    ScoreBatchResult,
)

__version__ = "0.1.0"

__all__ = [
    "ClientConfig",
    "ClientValidationError",
    "ConfigOverrides",
    "ConnectionFailedError",
    "GroundTruthSpec",
    "GroupScore",
    "GroupSubmission",
    "JudgeDiagnostics",
    "ResponseSchemaError",
    "RolloutScore",
    "ScoreBatchResult",
    "ScoringClient",
    "ScoringClientError",
    "ServiceRequestError",
    "__version__",
]
