"""Verifiers for the cube inequalities and identities."""

from __future__ import annotations

from .report import (
    CONJECTURES,
    IDENTITIES,
    PROVEN,
    REPORT_FIELDS,
    REPORT_ONLY,
    InequalityReport,
    Ineq,
    PreconditionError,
    ScalarCheck,
    ScalarCheckReport,
    reports_to_csv,
)
from .logsob import empirical_log_sobolev_constant, sobolev_ratio
from .scalars import scalar_checks
from .verify import (
    GROUP_INVARIANT,
    Evaluation,
    MaxInfluence,
    evaluate,
    kkl_max_influence,
    log_sobolev_constant,
    two_point_constant,
    verify,
)

__all__ = [
    "CONJECTURES",
    "GROUP_INVARIANT",
    "IDENTITIES",
    "PROVEN",
    "REPORT_FIELDS",
    "REPORT_ONLY",
    "Evaluation",
    "InequalityReport",
    "Ineq",
    "MaxInfluence",
    "PreconditionError",
    "ScalarCheck",
    "ScalarCheckReport",
    "empirical_log_sobolev_constant",
    "evaluate",
    "kkl_max_influence",
    "log_sobolev_constant",
    "reports_to_csv",
    "scalar_checks",
    "sobolev_ratio",
    "two_point_constant",
    "verify",
]
