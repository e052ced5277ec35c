"""Junta extraction from low total influence, and the restriction analyses around it.

``extract_junta`` follows the threshold procedure: with K = sum_i I_i and
alpha = exp(-K / ((2 - delta) eps)), keep every coordinate of influence at
least alpha and approximate f by its conditional expectation on them.  The
o(1) slack of the asymptotic statement is the explicit parameter ``delta``;
the error bound is reported next to the achieved error, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import analysis as an
from .analysis import _low_mask
from .core import BooleanFunction, RealFunction, points

MAX_RESTRICTION_COORDS = 20
EDGE_CONST = 2.0 / math.log(2.0)


def monotone_check(f: BooleanFunction) -> bool:
    """True iff f(x) <= f(x OR e_i) for every x and i (word-parallel)."""
    w = f.words
    for i in range(1, f.n + 1):
        s = 1 << (i - 1)
        if s < 64:
            low = np.uint64(_low_mask(s))
            lo = w & low
            hi = (w >> np.uint64(s)) & low
            if (lo & ~hi).any():
                return False
        else:
            pairs = w.reshape(-1, 2, s >> 6)
            if (pairs[:, 0, :] & ~pairs[:, 1, :]).any():
                return False
    return True


def _sorted_influences(f: BooleanFunction) -> tuple[np.ndarray, np.ndarray]:
    """Influences and the coordinate order by decreasing influence (stable on index)."""
    infl = an.influences(f).values
    order = np.argsort(-infl, kind="stable")
    return infl, order


@dataclass(frozen=True)
class JuntaResult:
    coords: tuple  # selected coordinates (1-based), by decreasing influence
    alpha: float
    g: RealFunction
    err: float
    K: float
    eps: float
    delta: float
    influences: tuple
    junta_bound: float  # K exp(K / ((2 - delta) eps)), the promised coordinate budget
    rounded: BooleanFunction | None = None
    rounded_err: float | None = None

    @property
    def r(self) -> int:
        return len(self.coords)

    @property
    def within_eps(self) -> bool:
        return self.err <= self.eps

    def to_json(self) -> dict:
        from .core import encode_hex

        return {
            "coords": list(self.coords),
            "r": self.r,
            "alpha": self.alpha,
            "log_alpha": math.log(self.alpha) if self.alpha > 0 else None,
            "err": self.err,
            "K": self.K,
            "eps": self.eps,
            "delta": self.delta,
            "influences": list(self.influences),
            "promised": {"err_at_most": self.eps, "coords_at_most": self.junta_bound},
            "achieved": {"err": self.err, "coords": self.r, "within_eps": self.within_eps},
            "rounded": None
            if self.rounded is None
            else {"bits_hex": encode_hex(self.rounded), "err": self.rounded_err},
        }


def junta_threshold(K: float, eps: float, delta: float = 0.5) -> float:
    """alpha = exp(-K / ((2 - delta) eps))."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not 0.0 <= delta < 2.0:
        raise ValueError(f"delta must lie in [0, 2), got {delta}")
    return math.exp(-K / ((2.0 - delta) * eps))


def extract_junta(f: BooleanFunction, eps: float, delta: float = 0.5) -> JuntaResult:
    """Approximate f by E(f | coordinates of influence >= alpha) (uniform measure)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    infl, order = _sorted_influences(f)
    K = float(infl.sum())
    if K == 0.0:
        raise ValueError("extract_junta needs a non-constant function")
    alpha = junta_threshold(K, eps, delta)
    coords = tuple(int(i) + 1 for i in order if infl[i] >= alpha)
    values = f.table().astype(np.float64)
    p = (0.5,) * f.n
    g = an.conditional_on(values, p, coords)
    err = float(np.mean((values - g) ** 2))
    rounded = BooleanFunction.from_table((g >= 0.5).astype(np.uint8))
    rerr = float(np.mean((values - rounded.table()) ** 2))
    bound = K * math.exp(min(K / ((2.0 - delta) * eps), 700.0))
    return JuntaResult(
        coords=coords,
        alpha=alpha,
        g=RealFunction(f.n, g),
        err=err,
        K=K,
        eps=float(eps),
        delta=float(delta),
        influences=tuple(float(v) for v in infl),
        junta_bound=bound,
        rounded=rounded,
        rounded_err=rerr,
    )


@dataclass(frozen=True)
class RestrictionTable:
    """mu_y = E(f | x_coords = y) for every assignment y.

    Bit k of the index of ``mu_y`` is the value of ``coords[k]``.
    """

    coords: tuple
    mu_y: np.ndarray
    mean: float  # E_y mu_y, equal to E f
    spread: float  # E_y mu_y (1 - mu_y), equal to ||f - g||^2

    def __getitem__(self, y: Sequence[int]) -> float:
        idx = sum(int(b) << k for k, b in enumerate(y))
        return float(self.mu_y[idx])


def restriction_expectations(f: BooleanFunction, coords: Sequence[int]) -> RestrictionTable:
    coords = tuple(int(c) for c in coords)
    if len(coords) > MAX_RESTRICTION_COORDS:
        raise ValueError(f"at most {MAX_RESTRICTION_COORDS} restriction coordinates")
    if len(set(coords)) != len(coords) or any(not 1 <= c <= f.n for c in coords):
        raise ValueError("coordinates must be distinct and lie in 1..n")
    table = f.table().astype(np.int64)
    pts = points(f.n)
    y_index = np.zeros(1 << f.n, dtype=np.int64)
    for k, c in enumerate(coords):
        y_index |= pts[:, c - 1].astype(np.int64) << k
    size = 1 << len(coords)
    ones = np.bincount(y_index, weights=table, minlength=size)
    cells = np.bincount(y_index, minlength=size)
    mu_y = ones / cells
    return RestrictionTable(coords, mu_y, float(mu_y.mean()), float((mu_y * (1 - mu_y)).mean()))


@dataclass
class StabilityProbe:
    mu: float
    eps: float
    delta: float
    sum_I: float
    hypothesis_bound: float
    hypothesis_holds: bool
    alpha: float
    coords: tuple
    h_norm2: float
    premise_holds: bool  # ||h||^2 <= mu - 2 mu^2
    mu_all_ones: float
    mu_max: float
    doubles: bool  # mu_all_ones >= 2 mu
    status: str
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        from dataclasses import asdict

        doc = asdict(self)
        doc["coords"] = list(self.coords)
        return doc


def stability_probe(f: BooleanFunction, eps: float, delta: float = 0.5) -> StabilityProbe:
    """Empirical probe of the conditional stability statement for monotone f.

    Checks the total-influence hypothesis, then runs the construction with
    alpha = mu^(1 + (1 + delta) eps) and restricts the selected coordinates
    to 1.  Nothing here assumes the conjecture the statement depends on.
    """
    if not monotone_check(f):
        raise ValueError("stability_probe needs a monotone function")
    mu = f.mean()
    if not 0.0 < mu <= 0.5:
        raise ValueError(f"stability_probe needs 0 < mu <= 1/2, got mu={mu}")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    infl, order = _sorted_influences(f)
    K = float(infl.sum())
    bound = (1.0 + eps) * EDGE_CONST * mu * math.log(1.0 / mu)
    holds = K <= bound * (1.0 + 1e-12)
    alpha = mu ** (1.0 + (1.0 + delta) * eps)
    coords = tuple(int(i) + 1 for i in order if infl[i] >= alpha)[:MAX_RESTRICTION_COORDS]
    rt = restriction_expectations(f, coords)
    mu_one = float(rt.mu_y[-1])
    h2 = rt.spread
    premise = h2 <= mu - 2 * mu * mu + 1e-15
    doubles = mu_one >= 2 * mu
    if not holds:
        status = "hypothesis_failed"
    elif doubles:
        status = "restriction_doubles"
    else:
        status = "restriction_below_2mu"
    return StabilityProbe(
        mu=mu,
        eps=float(eps),
        delta=float(delta),
        sum_I=K,
        hypothesis_bound=bound,
        hypothesis_holds=bool(holds),
        alpha=alpha,
        coords=coords,
        h_norm2=h2,
        premise_holds=bool(premise),
        mu_all_ones=mu_one,
        mu_max=float(rt.mu_y.max()),
        doubles=bool(doubles),
        status=status,
    )
