"""Report types emitted by the verifiers."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

REPORT_FIELDS = ("id", "n", "lhs", "rhs", "ratio", "slack", "satisfied", "degenerate", "context")


class Ineq(str, Enum):
    EDGE_ISO = "EDGE_ISO"
    FUNC_ISO = "FUNC_ISO"
    LOG_SOB = "LOG_SOB"
    KKL_SUM = "KKL_SUM"
    KKL_ASYMPTOTIC = "KKL_ASYMPTOTIC"
    TALAGRAND = "TALAGRAND"
    MAIN = "MAIN"
    CNJ_BOOL = "CNJ_BOOL"
    CNJ_SOB = "CNJ_SOB"
    LOG_SOB_MARTINGALE = "LOG_SOB_MARTINGALE"
    FK_SUM = "FK_SUM"
    FK_MAX = "FK_MAX"
    BONAMI = "BONAMI"
    ENERGY_ADD = "ENERGY_ADD"
    SOB_ISOP = "SOB_ISOP"
    DI_BOUND = "DI_BOUND"
    HALFCUBE_ID = "HALFCUBE_ID"
    VAR_DIST = "VAR_DIST"
    ENT_DECOMP = "ENT_DECOMP"
    APPB_CS = "APPB_CS"

    @classmethod
    def parse(cls, text) -> "Ineq":
        if isinstance(text, Ineq):
            return text
        try:
            return cls(str(text).upper())
        except ValueError:
            raise ValueError(f"unknown inequality id {text!r}") from None


IDENTITIES = frozenset({Ineq.ENERGY_ADD, Ineq.HALFCUBE_ID, Ineq.ENT_DECOMP})
CONJECTURES = frozenset({Ineq.CNJ_BOOL, Ineq.CNJ_SOB})
REPORT_ONLY = frozenset({Ineq.KKL_ASYMPTOTIC, Ineq.TALAGRAND, Ineq.FK_SUM, Ineq.FK_MAX})
PROVEN = frozenset(Ineq) - CONJECTURES - REPORT_ONLY


class PreconditionError(ValueError):
    """The input does not meet a verifier's preconditions (not an inequality violation)."""


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class InequalityReport:
    id: str
    n: int
    lhs: float
    rhs: float
    ratio: float  # math.inf when rhs == 0
    slack: float
    satisfied: bool
    tol: float
    degenerate: str | None = None
    context: dict = field(default_factory=dict)

    @property
    def report_only(self) -> bool:
        return Ineq(self.id) in REPORT_ONLY

    @property
    def conjecture(self) -> bool:
        return Ineq(self.id) in CONJECTURES

    @property
    def violated(self) -> bool:
        """True when a hard (proven or conjectured) statement fails on this input."""
        return not self.satisfied and not self.report_only

    def to_json(self) -> dict:
        ctx = dict(self.context)
        ctx["tol"] = self.tol
        return {
            "id": self.id,
            "n": self.n,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "ratio": _num(self.ratio),
            "slack": _num(self.slack),
            "satisfied": bool(self.satisfied),
            "degenerate": self.degenerate,
            "context": _jsonable(ctx),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, doc: dict) -> "InequalityReport":
        ctx = dict(doc.get("context") or {})
        tol = ctx.pop("tol", 0.0)

        def f(v, default):
            return default if v is None else float(v)

        return cls(
            id=doc["id"],
            n=int(doc["n"]),
            lhs=f(doc["lhs"], math.inf),
            rhs=f(doc["rhs"], math.inf),
            ratio=f(doc["ratio"], math.inf),
            slack=f(doc["slack"], -math.inf),
            satisfied=bool(doc["satisfied"]),
            tol=tol,
            degenerate=doc.get("degenerate"),
            context=ctx,
        )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    return obj


def reports_to_csv(reports) -> str:
    """Flatten reports to CSV; context entries become ``context.<key>`` columns."""
    rows = []
    ctx_keys: list[str] = []
    for r in reports:
        doc = r.to_json()
        row = {k: doc[k] for k in REPORT_FIELDS if k != "context"}
        for k, v in doc["context"].items():
            if isinstance(v, (list, dict)):
                v = json.dumps(v, sort_keys=True)
            key = f"context.{k}"
            if key not in ctx_keys:
                ctx_keys.append(key)
            row[key] = v
        rows.append(row)
    header = [k for k in REPORT_FIELDS if k != "context"] + sorted(ctx_keys)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in header})
    return buf.getvalue()


@dataclass
class ScalarCheck:
    name: str
    description: str
    points: int
    worst_violation: float
    worst_at: dict
    passed: bool


@dataclass
class ScalarCheckReport:
    id: str
    grid: str
    worst_violation: float
    worst_at: dict
    worst_check: str
    passed: bool
    tol: float
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return _jsonable(asdict(self))
