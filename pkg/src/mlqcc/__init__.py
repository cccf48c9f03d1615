"""Verification lab for memoryless quantum communication protocols."""

from mlqcc.and_protocol import AndParams, and_truth, build_and_protocol, expected_error
from mlqcc.audit import LowerBoundAudit, audit
from mlqcc.cic import CicLedger, cic, cic0, qil
from mlqcc.protocol import (
    CoinMode,
    CoinModel,
    CoinSegment,
    InputDistribution,
    OutputStage,
    ProtocolSpec,
    Round,
    Transcript,
    error_probability,
    qcc,
    simulate,
    u0,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AndParams",
    "CicLedger",
    "CoinMode",
    "CoinModel",
    "CoinSegment",
    "InputDistribution",
    "LowerBoundAudit",
    "OutputStage",
    "ProtocolSpec",
    "Round",
    "Transcript",
    "and_truth",
    "audit",
    "build_and_protocol",
    "cic",
    "cic0",
    "error_probability",
    "expected_error",
    "qcc",
    "qil",
    "simulate",
    "u0",
    "validate",
]
