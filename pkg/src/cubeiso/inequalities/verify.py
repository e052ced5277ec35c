"""Verifiers for the inequalities and identities of the cube.

``evaluate`` is the vectorised engine: it takes a stack of tables (last
axis 2^n) and returns lhs/rhs arrays, so exhaustive sweeps over all
functions on a small cube run as a handful of numpy passes.  ``verify``
wraps it for a single function and returns an InequalityReport.

Every statement is normalised to the form lhs >= rhs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .. import analysis as an
from ..core import (
    BooleanFunction,
    CoordinateOrdering,
    ProductMeasure,
    RealFunction,
    SymmetricProfile,
    as_values,
    dim_of,
    point_weights,
    split_axis,
)
from ..spectral import noise_values, norm_values
from .report import (
    CONJECTURES,
    IDENTITIES,
    REPORT_ONLY,
    InequalityReport,
    Ineq,
    PreconditionError,
)

LN2 = math.log(2.0)
EDGE_CONST = 2.0 / LN2
DEFAULT_TOL = 1e-9
IDENTITY_RTOL = 1e-10
ROUNDING_RTOL = 1e-12
BONAMI_DEFAULT_EPS = math.sqrt(3.0) / 3.0

# ids whose value depends only on the orbit of f under coordinate
# permutations and input complementations (uniform measure)
GROUP_INVARIANT = frozenset(
    {
        Ineq.EDGE_ISO,
        Ineq.FUNC_ISO,
        Ineq.LOG_SOB,
        Ineq.KKL_SUM,
        Ineq.KKL_ASYMPTOTIC,
        Ineq.TALAGRAND,
        Ineq.CNJ_BOOL,
        Ineq.BONAMI,
        Ineq.SOB_ISOP,
    }
)


def two_point_constant(p: float) -> float:
    """C(p) = (1-2p) / (p(1-p)) / (log(1-p) - log p), with C(1/2) = 2.

    Written as 2u / ((1-u^2) artanh u) with u = 1-2p, which is stable near
    p = 1/2 and symmetric under p -> 1-p.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"bias must lie in (0,1), got {p}")
    u = 1.0 - 2.0 * p
    if u == 0.0:
        return 2.0
    return 2.0 * u / ((1.0 - u * u) * math.atanh(u))


def log_sobolev_constant(mu: ProductMeasure) -> float:
    """Optimal log-Sobolev constant of a product measure for E(f,f) = sum_i E(f - f^i)^2.

    Mixed biases tensorise to the minimum over coordinates.
    """
    return min(two_point_constant(p) for p in mu.p)


class _Batch:
    """Lazily computed functionals of a stack of tables."""

    def __init__(self, values: np.ndarray, p: Sequence[float], perm: Sequence[int]):
        self.values = values
        self.p = tuple(p)
        self.perm = tuple(perm)
        self.n = dim_of(values)

    @cached_property
    def w(self) -> np.ndarray:
        return point_weights(self.p)

    @cached_property
    def mean(self) -> np.ndarray:
        return (self.values * self.w).sum(axis=-1)

    @cached_property
    def second(self) -> np.ndarray:
        return (self.values * self.values * self.w).sum(axis=-1)

    @cached_property
    def constant(self) -> np.ndarray:
        return (self.values == self.values[..., :1]).all(axis=-1)

    @cached_property
    def var(self) -> np.ndarray:
        return np.where(self.constant, 0.0, an.variance_values(self.values, self.p))

    @cached_property
    def boolean(self) -> np.ndarray:
        return ((self.values == 0.0) | (self.values == 1.0)).all(axis=-1)

    @cached_property
    def nonneg(self) -> np.ndarray:
        return (self.values >= 0.0).all(axis=-1)

    @cached_property
    def infl(self) -> np.ndarray:
        return an.influence_values(self.values, self.p)

    @cached_property
    def sum_I(self) -> np.ndarray:
        return self.infl.sum(axis=-1)

    @cached_property
    def sum_I2(self) -> np.ndarray:
        return (self.infl**2).sum(axis=-1)

    @cached_property
    def mart(self) -> an.MartingaleArrays:
        return an.martingale_values(self.values, self.p, self.perm)

    @cached_property
    def abs_d(self) -> np.ndarray:
        return self.mart.abs_means()

    @cached_property
    def sum_E2_abs_d(self) -> np.ndarray:
        return (self.abs_d**2).sum(axis=-1)

    @cached_property
    def ent_d2(self) -> np.ndarray:
        return self.mart.diff_entropies()


@dataclass
class Evaluation:
    """Vectorised verifier output; every array has the batch shape."""

    id: Ineq
    n: int
    lhs: np.ndarray
    rhs: np.ndarray
    tol: np.ndarray
    satisfied: np.ndarray
    degenerate: np.ndarray  # object array: None or reason string
    invalid: np.ndarray  # object array: None or precondition message
    constant_used: float | None
    context: dict = field(default_factory=dict)  # per-row arrays

    @property
    def valid(self) -> np.ndarray:
        return np.array([r is None for r in self.invalid.reshape(-1)]).reshape(self.invalid.shape)

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(self.rhs > 0, self.lhs / np.where(self.rhs > 0, self.rhs, 1.0), np.inf)
        return r

    @property
    def slack(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return self.lhs - self.rhs


def _obj(shape, value=None) -> np.ndarray:
    a = np.empty(shape, dtype=object)
    a.fill(value)
    return a


def _mark(target: np.ndarray, mask: np.ndarray, reason: str) -> None:
    flat = target.reshape(-1)
    for k in np.flatnonzero(np.broadcast_to(mask, target.shape)):
        if flat[k] is None:
            flat[k] = reason


def evaluate(
    id,
    values: np.ndarray,
    mu: ProductMeasure | None = None,
    *,
    ordering: CoordinateOrdering | None = None,
    tol: float = DEFAULT_TOL,
    constant: float | None = None,
    eps: float | None = None,
    split: int | None = None,
) -> Evaluation:
    """Evaluate one statement on a stack of tables of shape (B, 2^n)."""
    ident = Ineq.parse(id)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[None, :]
    n = dim_of(values)
    if n < 1:
        raise ValueError("dimension must be at least 1")
    mu = mu or ProductMeasure.uniform(n)
    if mu.n != n:
        raise PreconditionError(f"measure has {mu.n} coordinates, function has {n}")
    ordering = ordering or CoordinateOrdering.natural(n)
    if ordering.n != n:
        raise PreconditionError(f"ordering has {ordering.n} coordinates, function has {n}")
    b = _Batch(values, mu.p, ordering.perm)
    shape = values.shape[:-1]
    deg = _obj(shape)
    bad = _obj(shape)
    ctx: dict = {}
    aux_slack = None
    aux_scale = None

    def need_uniform():
        if not mu.is_uniform:
            raise PreconditionError(f"{ident.value} is stated for the uniform measure")

    def need_boolean():
        _mark(bad, ~b.boolean, f"{ident.value} requires a boolean (0/1) function")

    def need_nonneg():
        _mark(bad, ~b.nonneg, f"{ident.value} requires a nonnegative function")

    C_used = None

    def ls_constant():
        nonlocal C_used
        C_used = constant if constant is not None else log_sobolev_constant(mu)
        return C_used

    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        if ident is Ineq.EDGE_ISO:
            need_uniform()
            need_boolean()
            _mark(bad, b.mean > 0.5, "EDGE_ISO requires mu <= 1/2")
            c = constant if constant is not None else EDGE_CONST
            C_used = c
            lhs = b.sum_I
            rhs = -c * an.xlogx(b.mean)
            _mark(deg, b.mean == 0.0, "empty set")

        elif ident is Ineq.FUNC_ISO:
            need_nonneg()
            C = ls_constant()
            lhs = an.dirichlet_values(values, mu.p)
            rhs = C * b.second * np.log1p(b.var / b.mean**2)
            zero = b.second == 0.0
            rhs = np.where(zero, 0.0, np.where(b.mean == 0.0, np.inf, rhs))
            _mark(deg, zero, "zero function")
            _mark(deg, (b.mean == 0.0) & ~zero, "zero mean (rhs = +inf by convention)")

        elif ident is Ineq.LOG_SOB:
            C = ls_constant()
            lhs = an.dirichlet_values(values, mu.p)
            rhs = C * an.square_entropy_values(values, mu.p)

        elif ident in (Ineq.KKL_SUM, Ineq.CNJ_BOOL):
            need_uniform()
            need_boolean()
            if ident is Ineq.KKL_SUM:
                c = constant if constant is not None else 0.5
            else:
                c = constant if constant is not None else LN2 / 2.0
            C_used = c
            lhs = b.sum_I2
            s2 = b.var
            rhs = np.where(s2 > 0, 4.0 * s2 * np.exp(-c * b.sum_I / s2), 0.0)
            _mark(deg, b.constant, "constant function (sigma^2 = 0)")
            ctx["implied_kkl_constant"] = np.full(shape, 1.0 / (c * c))

        elif ident is Ineq.KKL_ASYMPTOTIC:
            need_uniform()
            need_boolean()
            c = constant if constant is not None else 4.0
            C_used = c
            lhs = b.sum_I2
            m = b.mean
            rhs = c * (m * (1 - m)) ** 2 * math.log(n) ** 2 / n
            _mark(deg, b.constant, "constant function")

        elif ident is Ineq.TALAGRAND:
            need_uniform()
            need_boolean()
            c = constant if constant is not None else 1.0
            C_used = c
            I = b.infl
            terms = np.where(I > 0, I / np.log(math.e / np.where(I > 0, I, 1.0)), 0.0)
            lhs = terms.sum(axis=-1)
            rhs = c * b.mean * (1 - b.mean)
            _mark(deg, b.constant, "constant function")

        elif ident is Ineq.MAIN:
            C = ls_constant()
            lhs = b.sum_E2_abs_d
            s2 = b.var
            E = an.dirichlet_values(values, mu.p)
            rhs = np.where(s2 > 0, s2 * np.exp(-E / (C * s2)), 0.0)
            _mark(deg, b.constant, "constant function (sigma^2 = 0)")
            ctx["dirichlet"] = E

        elif ident in (Ineq.CNJ_SOB, Ineq.LOG_SOB_MARTINGALE):
            if ident is Ineq.CNJ_SOB:
                need_uniform()
                need_boolean()
                C_used = constant if constant is not None else EDGE_CONST
            else:
                need_uniform()
                C_used = constant if constant is not None else 2.0
            lhs = an.dirichlet_values(values, mu.p)
            rhs = C_used * b.ent_d2.sum(axis=-1)
            ctx["ent_d2"] = b.ent_d2

        elif ident in (Ineq.FK_SUM, Ineq.FK_MAX):
            need_boolean()
            p = mu.common_bias
            if p is None:
                raise PreconditionError(f"{ident.value} needs a measure with a common bias p")
            c = constant if constant is not None else 1.0
            C_used = c
            m = b.mean
            scale = p * math.log(1.0 / p)
            if ident is Ineq.FK_SUM:
                lhs = b.sum_I2
                rhs = c * (m * (1 - m)) ** 2 / scale**2 * math.log(n) ** 2 / n
            else:
                lhs = b.infl.max(axis=-1)
                rhs = c * m * (1 - m) / scale * math.log(n) / n
            _mark(deg, b.constant, "constant function")

        elif ident is Ineq.BONAMI:
            need_uniform()
            e = BONAMI_DEFAULT_EPS if eps is None else float(eps)
            if not 0.0 <= e <= 1.0:
                raise PreconditionError(f"noise rate must lie in [0,1], got {e}")
            ctx["eps"] = np.full(shape, e)
            lhs = norm_values(values, 1.0 + e * e, b.w)
            rhs = norm_values(noise_values(values, e), 2.0, b.w)

        elif ident is Ineq.ENERGY_ADD:
            lhs = an.dirichlet_values(values, mu.p)
            rhs = b.mart.diff_energies().sum(axis=-1)

        elif ident is Ineq.SOB_ISOP:
            need_nonneg()
            lhs = an.square_entropy_values(values, mu.p)
            rhs = b.second * np.log1p(b.var / b.mean**2)
            zero = b.second == 0.0
            rhs = np.where(zero, 0.0, np.where(b.mean == 0.0, np.inf, rhs))
            _mark(deg, zero, "zero function")

        elif ident is Ineq.DI_BOUND:
            perm = np.array(ordering.perm) - 1
            pp = np.array(mu.p)[perm]
            absdiff = an.abs_diff_values(values, mu.p)[..., perm]
            bound = 2.0 * pp * (1.0 - pp) * absdiff
            per = bound - b.abs_d
            worst = np.argmin(per, axis=-1)[..., None]
            lhs = np.take_along_axis(bound, worst, axis=-1)[..., 0]
            rhs = np.take_along_axis(b.abs_d, worst, axis=-1)[..., 0]
            aux_slack = per.min(axis=-1)
            aux_scale = np.maximum(bound, b.abs_d).max(axis=-1)
            ctx["worst_step"] = worst[..., 0] + 1
            ctx["bounds"] = bound
            ctx["abs_d"] = b.abs_d

        elif ident in (Ineq.HALFCUBE_ID, Ineq.VAR_DIST, Ineq.ENT_DECOMP, Ineq.APPB_CS):
            i = n if split is None else int(split)
            if not 1 <= i <= n:
                raise PreconditionError(f"split coordinate {i} out of range 1..{n}")
            q = mu.p[i - 1]
            rest = mu.p[: i - 1] + mu.p[i:]
            w_rest = point_weights(rest)
            ctx["split"] = np.full(shape, i)
            if ident is Ineq.ENT_DECOMP:
                k = values * values
                g, h = split_axis(k, i)
                Eg = (g * w_rest).sum(axis=-1)
                Eh = (h * w_rest).sum(axis=-1)
                lhs = an.entropy_values(k, mu.p)
                # the mean correction (1-q) Eg log Eg + q Eh log Eh - Ek log Ek is
                # the two-point entropy of (Eg, Eh) under bias q
                rhs = (
                    (1 - q) * an.entropy_values(g, rest)
                    + q * an.entropy_values(h, rest)
                    + an.entropy_values(np.stack([Eg, Eh], axis=-1), (q,))
                )
            else:
                f0, f1 = split_axis(values, i)
                dist = (((f0 - f1) ** 2) * w_rest).sum(axis=-1)
                if ident is Ineq.HALFCUBE_ID:
                    lhs = an.dirichlet_values(values, mu.p)
                    rhs = (1 - q) * an.dirichlet_values(f0, rest) + q * an.dirichlet_values(f1, rest) + dist
                elif ident is Ineq.VAR_DIST:
                    m0 = (f0 * w_rest).sum(axis=-1)
                    m1 = (f1 * w_rest).sum(axis=-1)
                    s0 = np.sqrt(an.variance_values(f0, rest))
                    s1 = np.sqrt(an.variance_values(f1, rest))
                    lhs = dist
                    rhs = (s0 - s1) ** 2 + (m0 - m1) ** 2
                else:
                    nat = tuple(range(1, n))
                    m0 = an.martingale_values(f0, rest, nat)
                    m1 = an.martingale_values(f1, rest, nat)
                    a = m0.square_means()
                    bb = m1.square_means()
                    e = np.zeros(a.shape)
                    gap = np.zeros(a.shape)  # a_i - b_i, as E (d0 - d1)(d0 + d1) to avoid cancellation
                    for j, (d0, d1) in enumerate(zip(m0.diffs, m1.diffs)):
                        e[..., j] = an.expect((d0 - d1) ** 2, rest[: j + 1])
                        gap[..., j] = an.expect((d0 - d1) * (d0 + d1), rest[: j + 1])
                    gfac = a + bb + 2.0 * np.sqrt(a * bb)
                    cs_slack = gfac * e - gap**2
                    terms = np.where(gfac > 0, gap**2 / np.where(gfac > 0, gfac, 1.0), 0.0)
                    lhs = dist
                    rhs = terms.sum(axis=-1)
                    aux_slack = np.minimum(
                        cs_slack.min(axis=-1) if cs_slack.shape[-1] else np.zeros(shape),
                        dist - e.sum(axis=-1),
                    )
                    cs_scale = np.maximum(gfac * e, gap**2)
                    aux_scale = np.maximum(
                        cs_scale.max(axis=-1) if cs_scale.shape[-1] else np.zeros(shape),
                        np.maximum(dist, e.sum(axis=-1)),
                    )
                    ctx["sum_diff_sq"] = e.sum(axis=-1)
                    ctx["min_cs_slack"] = cs_slack.min(axis=-1) if cs_slack.shape[-1] else np.zeros(shape)
        else:  # pragma: no cover - enum is exhaustive
            raise ValueError(ident)

        lhs = np.asarray(lhs, dtype=np.float64) * np.ones(shape)
        rhs = np.asarray(rhs, dtype=np.float64) * np.ones(shape)
        slack = lhs - rhs
        if ident in IDENTITIES:
            scale = np.maximum(np.abs(lhs), np.abs(rhs))
            tol_arr = IDENTITY_RTOL * scale + 1e-15 * (1.0 + b.second)
            sat = np.abs(slack) <= tol_arr
        else:
            # absolute tolerance plus a floating-point rounding floor at the scale of the terms
            tol_arr = float(tol) + ROUNDING_RTOL * np.maximum(np.abs(lhs), np.abs(rhs))
            sat = slack >= -tol_arr
            if aux_slack is not None:
                sat &= aux_slack >= -(float(tol) + ROUNDING_RTOL * aux_scale)
        is_deg = np.array([r is not None for r in deg.reshape(-1)]).reshape(shape)
        # degenerate conventions: both sides vanish -> satisfied; +inf rhs -> not
        sat = np.where(is_deg, np.isfinite(rhs) & (slack >= -tol_arr), sat)

    return Evaluation(ident, n, lhs, rhs, tol_arr, sat, deg, bad, C_used, ctx)


def _stats_context(values: np.ndarray, mu: ProductMeasure, ordering: CoordinateOrdering) -> dict:
    b = _Batch(values[None, :], mu.p, ordering.perm)
    return {
        "mu": float(b.mean[0]),
        "sigma2": float(b.var[0]),
        "sum_I": float(b.sum_I[0]),
        "sum_I2": float(b.sum_I2[0]),
        "sum_E2_abs_d": float(b.sum_E2_abs_d[0]),
    }


def verify(
    id,
    f,
    mu: ProductMeasure | None = None,
    *,
    tol: float = DEFAULT_TOL,
    ordering: CoordinateOrdering | None = None,
    constant: float | None = None,
    eps: float | None = None,
    split: int | None = None,
    label: str | None = None,
) -> InequalityReport:
    """Check one statement on one function.

    Precondition failures raise PreconditionError; a failed inequality is
    reported with ``satisfied=False``.
    """
    ident = Ineq.parse(id)
    if isinstance(f, SymmetricProfile):
        f = f.dense()
    values = as_values(f)
    if values.ndim != 1:
        raise ValueError("verify() takes a single function; use evaluate() for batches")
    n = dim_of(values)
    mu = mu or ProductMeasure.uniform(n)
    ordering = ordering or CoordinateOrdering.natural(n)
    ev = evaluate(
        ident, values, mu, ordering=ordering, tol=tol, constant=constant, eps=eps, split=split
    )
    if ev.invalid[0] is not None:
        raise PreconditionError(ev.invalid[0])
    lhs = float(ev.lhs[0])
    rhs = float(ev.rhs[0])
    ctx = {"function": label or _describe(f), "measure": mu.summary()}
    if ordering.perm != tuple(range(1, n + 1)):
        ctx["ordering"] = ordering.render()
    ctx.update(_stats_context(values, mu, ordering))
    if ev.constant_used is not None:
        ctx["C"] = ev.constant_used
    for k, v in ev.context.items():
        v = np.asarray(v)[0]
        ctx[k] = v.tolist() if np.ndim(v) else (v.item() if hasattr(v, "item") else v)
    if ident in REPORT_ONLY:
        ctx["report_only"] = True
    if ident in CONJECTURES:
        ctx["conjecture"] = True
    if ident in IDENTITIES:
        ctx["identity"] = True
    return InequalityReport(
        id=ident.value,
        n=n,
        lhs=lhs,
        rhs=rhs,
        ratio=float(ev.ratio[0]),
        slack=float(ev.slack[0]),
        satisfied=bool(ev.satisfied[0]),
        tol=float(ev.tol[0]),
        degenerate=ev.degenerate[0],
        context=ctx,
    )


def _describe(f) -> str:
    from ..core import encode_hex

    if isinstance(f, BooleanFunction):
        return f"hex:n={f.n},bits={encode_hex(f)}"
    if isinstance(f, RealFunction):
        return f"real:n={f.n}"
    return "array"


class MaxInfluence(tuple):
    """(index, value) of the largest influence; ``degenerate`` is set for constant f."""

    def __new__(cls, index: int, value: float, degenerate: bool = False):
        obj = super().__new__(cls, (index, value))
        obj.degenerate = degenerate
        return obj

    @property
    def index(self) -> int:
        return self[0]

    @property
    def value(self) -> float:
        return self[1]


def kkl_max_influence(f: BooleanFunction) -> MaxInfluence:
    """Coordinate of maximal (uniform) influence, ties to the smallest index."""
    infl = an.influences(f).values
    k = int(np.argmax(infl))
    return MaxInfluence(k + 1, float(infl[k]), degenerate=bool(infl.max() == 0.0))
