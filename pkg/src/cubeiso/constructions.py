"""Named function families and the Krawchouk near-extremal construction.

The Krawchouk profile k_s is generated by the three-term recurrence

    (n - 2s) k(r) = r k(r-1) + (n-r) k(r+1),   k(-1) = 0, k(0) = 1,

run forward in exact rational arithmetic (the values cancel badly near the
first root).  f_s keeps k_s on levels 0..m, where m is the last level
before the first sign change, and is zero above.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import BooleanFunction, SymmetricProfile
from .inequalities.report import InequalityReport

# ---------------------------------------------------------------------------
# boolean families


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")


def subcube(n: int, t: int) -> BooleanFunction:
    """Indicator of x_1 = ... = x_t = 1 (co-dimension t)."""
    _check_n(n)
    if not 0 <= t <= n:
        raise ValueError(f"co-dimension t must satisfy 0 <= t <= n, got t={t}, n={n}")
    return BooleanFunction.from_predicate(n, lambda x: x[:, :t].all(axis=1))


def dictator(n: int, i: int = 1) -> BooleanFunction:
    _check_n(n)
    if not 1 <= i <= n:
        raise ValueError(f"coordinate {i} out of range 1..{n}")
    return BooleanFunction.from_predicate(n, lambda x: x[:, i - 1])


def parity(n: int) -> BooleanFunction:
    _check_n(n)
    return BooleanFunction.from_predicate(n, lambda x: x.sum(axis=1) & 1)


def hamming_ball(n: int, r: int) -> BooleanFunction:
    """Points of Hamming weight at most r."""
    _check_n(n)
    if not 0 <= r <= n:
        raise ValueError(f"radius must satisfy 0 <= r <= n, got {r}")
    return BooleanFunction.from_predicate(n, lambda x: x.sum(axis=1) <= r)


def majority(n: int) -> BooleanFunction:
    _check_n(n)
    if n % 2 == 0:
        raise ValueError("majority is defined here for odd n only")
    return BooleanFunction.from_predicate(n, lambda x: 2 * x.sum(axis=1) > n)


def tribes(n: int, b: int) -> BooleanFunction:
    """OR of n/b ANDs over consecutive blocks of b coordinates."""
    _check_n(n)
    if b < 1 or n % b:
        raise ValueError(f"block size b={b} must divide n={n}")
    return BooleanFunction.from_predicate(
        n, lambda x: x.reshape(len(x), n // b, b).all(axis=2).any(axis=1)
    )


def tribes_influence(b: int, k: int) -> float:
    """Closed-form influence of every coordinate of tribes with k blocks of size b."""
    return 2.0 ** -(b - 1) * (1.0 - 2.0**-b) ** (k - 1)


# ---------------------------------------------------------------------------
# symmetric analytics


def _log_level_weights(n: int) -> np.ndarray:
    r = np.arange(n + 1)
    return (
        math.lgamma(n + 1)
        - np.array([math.lgamma(k + 1) + math.lgamma(n - k + 1) for k in r])
        - n * math.log(2.0)
    )


def _exact_level_weights(n: int) -> list[Fraction]:
    den = 1 << n
    return [Fraction(math.comb(n, r), den) for r in range(n + 1)]


def _neighbor_sums(levels: list) -> list:
    n = len(levels) - 1
    zero = levels[0] * 0
    out = []
    for r in range(n + 1):
        below = levels[r - 1] if r > 0 else zero
        above = levels[r + 1] if r < n else zero
        out.append(r * below + (n - r) * above)
    return out


def _fsum_weighted(terms) -> float:
    return math.fsum(terms)


@dataclass(frozen=True)
class SymmetricAnalytics:
    """Moments, energy, and level-1 Fourier data of a symmetric function (uniform measure).

    In exact mode the fields are Fractions; otherwise floats.
    """

    n: int
    mean: object
    second_moment: object
    variance: object
    dirichlet: object
    level1_sum: object  # sum_i hat f({i}) under chi_S = prod (2x_i - 1)
    level1: object  # common value hat f({i})
    influence: object  # E(f - f^i)^2, the same for every i
    neighbor_sums: tuple

    def as_floats(self) -> dict:
        return {
            "mean": float(self.mean),
            "second_moment": float(self.second_moment),
            "variance": float(self.variance),
            "dirichlet": float(self.dirichlet),
            "level1_sum": float(self.level1_sum),
            "level1": float(self.level1),
            "influence": float(self.influence),
        }


def symmetric_analytics(profile: SymmetricProfile) -> SymmetricAnalytics:
    """Closed-form functionals of a symmetric function from its level profile.

    With w_r = binom(n,r)/2^n and N(r) = r f(r-1) + (n-r) f(r+1):
    E f^2 = sum w_r f_r^2, E(f,f) = 2n E f^2 - 2 sum w_r f_r N(r), and
    sum_i hat f({i}) = sum_r w_r (2r - n) f_r.
    """
    n = profile.n
    if profile.numeric_mode == "exact":
        lv = list(profile.levels)
        w = _exact_level_weights(n)
        N = _neighbor_sums(lv)
        mean = sum((wr * f for wr, f in zip(w, lv)), Fraction(0))
        second = sum((wr * f * f for wr, f in zip(w, lv)), Fraction(0))
        cross = sum((wr * f * Nr for wr, f, Nr in zip(w, lv, N)), Fraction(0))
        l1 = sum((wr * (2 * r - n) * f for r, (wr, f) in enumerate(zip(w, lv))), Fraction(0))
        energy = 2 * n * second - 2 * cross
        return SymmetricAnalytics(
            n, mean, second, second - mean * mean, energy, l1, l1 / n, energy / n, tuple(N)
        )
    lv = profile.float_levels()
    logw = _log_level_weights(n)
    w = np.exp(logw)
    N = np.array(_neighbor_sums(list(lv)))
    mean = _fsum_weighted(w * lv)
    second = _fsum_weighted(w * lv * lv)
    cross = _fsum_weighted(w * lv * N)
    l1 = _fsum_weighted(w * (2 * np.arange(n + 1) - n) * lv)
    energy = 2 * n * second - 2 * cross
    return SymmetricAnalytics(
        n,
        mean,
        second,
        max(second - mean * mean, 0.0),
        energy,
        l1,
        l1 / n,
        energy / n,
        tuple(float(v) for v in N),
    )


# ---------------------------------------------------------------------------
# Krawchouk construction


@dataclass(frozen=True)
class KrawchoukBuild:
    n: int
    s: int
    mode: str
    profile: tuple  # k_s(0..n): Fractions in exact mode, floats in logfloat mode
    m: int
    f: SymmetricProfile
    residual_max: object  # largest |recurrence residual|, exactly 0 in exact mode
    support_fraction: float
    second_moment: float
    dirichlet: float
    energy_ratio: float  # E(f,f) / E f^2, at most 4s
    neighbor_margin: float  # min over support of N(r) - (n - 2s) f(r)
    nonincreasing: bool
    analytics: SymmetricAnalytics

    def diagnostics(self) -> dict:
        return {
            "n": self.n,
            "s": self.s,
            "mode": self.mode,
            "m": self.m,
            "support_fraction": self.support_fraction,
            "E_f2": self.second_moment,
            "dirichlet": self.dirichlet,
            "energy_ratio": self.energy_ratio,
            "energy_bound_4s": 4 * self.s,
            "neighbor_margin": self.neighbor_margin,
            "nonincreasing_on_support": self.nonincreasing,
            "recurrence_residual_max": float(self.residual_max),
        }


def krawchouk_profile(n: int, s: int, mode: str = "exact") -> list:
    """k_s(0..n) by the forward recurrence."""
    if mode == "exact":
        k = [Fraction(1)]
        prev = Fraction(0)
    elif mode == "logfloat":
        k = [1.0]
        prev = 0.0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    c = n - 2 * s
    for r in range(n):
        nxt = (c * k[r] - r * prev) / (n - r)
        prev = k[r]
        k.append(nxt)
    return k


def _first_sign_change(k, rel_zero: float = 0.0) -> int:
    """Largest m with k(0..m) all positive (n when no sign change occurs).

    In float mode a value below ``rel_zero`` times the running maximum counts
    as a root, so an exact rational zero is not lost to rounding.
    """
    top = 0
    for r, v in enumerate(k):
        top = max(top, abs(v))
        if v <= rel_zero * top:
            return r - 1
    return len(k) - 1


def krawchouk_build(n: int, s: int, mode: str = "exact") -> KrawchoukBuild:
    _check_n(n)
    if not 1 <= s <= n:
        raise ValueError(f"s must satisfy 1 <= s <= n, got s={s}, n={n}")
    if mode == "exact" and n > 400:
        raise ValueError("exact mode is limited to n <= 400; use mode='logfloat'")
    if not 1 <= s <= n / 4:
        warnings.warn(
            f"s={s} lies outside the recommended range 1 <= s <= n/4 for n={n}",
            RuntimeWarning,
            stacklevel=2,
        )
    k = krawchouk_profile(n, s, mode)
    c = n - 2 * s
    residuals = [
        abs(c * k[r] - (r * (k[r - 1] if r else 0) + (n - r) * k[r + 1])) for r in range(n)
    ]
    m = _first_sign_change(k, 0.0 if mode == "exact" else 1e-12)
    zero = k[0] * 0
    levels = [k[r] if r <= m else zero for r in range(n + 1)]
    prof = SymmetricProfile(n, levels, mode)
    an = symmetric_analytics(prof)
    N = an.neighbor_sums
    margin = min(N[r] - c * levels[r] for r in range(m + 1))
    if mode == "exact":
        support = Fraction(sum(math.comb(n, r) for r in range(m + 1)), 1 << n)
    else:
        lw = _log_level_weights(n)[: m + 1]
        support = float(np.exp(np.logaddexp.reduce(lw)))
    return KrawchoukBuild(
        n=n,
        s=s,
        mode=mode,
        profile=tuple(k),
        m=m,
        f=prof,
        residual_max=max(residuals),
        support_fraction=float(support),
        second_moment=float(an.second_moment),
        dirichlet=float(an.dirichlet),
        energy_ratio=float(Fraction(an.dirichlet) / Fraction(an.second_moment))
        if mode == "exact"
        else float(an.dirichlet) / float(an.second_moment),
        neighbor_margin=float(margin),
        nonincreasing=all(levels[r + 1] <= levels[r] for r in range(m)),
        analytics=an,
    )


def _log(x) -> float:
    """Natural log of a positive Fraction or float without underflow."""
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def near_tightness_report(n: int, s: int, mode: str = "exact") -> InequalityReport:
    """The MAIN inequality on f_s, evaluated through the symmetric fast path.

    f_s is monotone and symmetric, so E|d_i| = |hat f({i})| for every i and
    the left side is n hat f({i})^2.  The comparison is done in logs, so the
    ratio stays meaningful when both sides are far below double range.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        build = krawchouk_build(n, s, mode)
    an = build.analytics
    abs_l1 = abs(an.level1)
    var = an.variance
    log_lhs = math.log(n) + 2 * _log(abs_l1)
    ratio_E = float(Fraction(an.dirichlet) / Fraction(var)) if mode == "exact" else an.dirichlet / var
    log_rhs = _log(var) - ratio_E / 2.0
    log_ratio = log_lhs - log_rhs
    lhs = math.exp(log_lhs)
    rhs = math.exp(log_rhs)
    degenerate = None
    if s * s < n / 4:  # s below sqrt(n)/2: outside the sqrt(n) << s regime
        degenerate = f"s={s} is outside the regime sqrt(n) << s (s < sqrt(n)/2)"
    support = build.support_fraction
    delta = 1.0 + math.log(support) / (2 * s) if support > 0 else float("nan")
    context = {
        "function": f"krawchouk:n={n},s={s}",
        "measure": "uniform",
        "mode": mode,
        "m": build.m,
        "C": 2.0,
        "mu": float(an.mean),
        "sigma2": float(var),
        "E_f2": float(an.second_moment),
        "dirichlet": float(an.dirichlet),
        "sum_E2_abs_d": lhs,
        "log_lhs": log_lhs,
        "log_rhs": log_rhs,
        "log_ratio": log_ratio,
        "log_ratio_over_2s": log_ratio / (2 * s),
        "log_ratio_over_log_n": log_ratio / math.log(n),
        "support_fraction": support,
        "delta": delta,
    }
    return InequalityReport(
        id="MAIN",
        n=n,
        lhs=lhs,
        rhs=rhs,
        ratio=math.exp(log_ratio) if log_ratio < 700 else math.inf,
        slack=lhs - rhs,
        satisfied=lhs - rhs >= -1e-9,
        tol=1e-9,
        degenerate=degenerate,
        context=context,
    )
