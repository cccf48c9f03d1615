"""Protocol compilers: one-time-pad privacy and one-shot coin removal."""

from mlqcc.compilers.oneshot import (
    CompensationPlan,
    OneShotCompiled,
    OneShotReport,
    base_message_terms,
    compile_oneshot,
    verify_oneshot,
)
from mlqcc.compilers.private import PrivateCompiled, PrivateReport, compile_private, verify_private
from mlqcc.compilers.qotp import QotpKey, block_operator, qotp_apply, qotp_operator, twirl_average

__all__ = [
    "CompensationPlan",
    "OneShotCompiled",
    "OneShotReport",
    "PrivateCompiled",
    "PrivateReport",
    "QotpKey",
    "base_message_terms",
    "block_operator",
    "compile_oneshot",
    "compile_private",
    "qotp_apply",
    "qotp_operator",
    "twirl_average",
    "verify_oneshot",
    "verify_private",
]
