"""Numerical recovery of the log-Sobolev constant of small biased cubes.

The constant is the infimum of E(f,f) / Ent(f^2) over nonconstant f.  On one
coordinate every f is (up to scaling and sign, neither of which lowers the
ratio) the two-point function (1, e^s), so the search is one-dimensional.
On two coordinates a multistart local optimiser probes tensorisation.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .. import analysis as an
from ..core import point_weights

# below this |s| the ratio is within ~s^2 of its limit and Ent(f^2) loses digits
_S_MIN = 1e-3


def sobolev_ratio(values: np.ndarray, p) -> float:
    """E(f,f) / Ent(f^2) under the product measure with biases ``p``."""
    values = np.asarray(values, dtype=np.float64)
    ent = float(an.entropy_values(values * values, p))
    if ent <= 0.0:
        return np.inf
    return float(an.dirichlet_values(values, p)) / ent


def _two_point_ratio(s: float, p: float) -> float:
    return sobolev_ratio(np.array([1.0, np.exp(s)]), (p,))


def empirical_log_sobolev_constant(p: float, n: int = 1, *, starts: int = 12, seed: int = 0) -> float:
    """Smallest ratio E(f,f)/Ent(f^2) found numerically on the n-cube with common bias p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"bias must lie in (0,1), got {p}")
    if n == 1:
        grid = np.concatenate([-np.geomspace(30.0, _S_MIN, 2000), np.geomspace(_S_MIN, 30.0, 2000)])
        vals = np.array([_two_point_ratio(s, p) for s in grid])
        k = int(np.argmin(vals))
        best = float(vals[k])
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
        if hi - lo > 0 and not (lo < 0 < hi):
            res = minimize_scalar(lambda s: _two_point_ratio(s, p), bounds=(lo, hi), method="bounded")
            best = min(best, float(res.fun))
        return best
    if n != 2:
        raise ValueError("the numerical search supports n = 1 or n = 2")
    probs = (p, p)
    rng = np.random.default_rng(seed)
    w = point_weights(probs)
    # neighbours of x in directions 1 and 2 (index bit 0 is coordinate 1)
    flip1 = np.array([1, 0, 3, 2])
    flip2 = np.array([2, 3, 0, 1])

    def objective(x):
        sq = x * x
        m = sq @ w
        pos = sq > 0
        ent = (np.where(pos, sq * np.log(np.where(pos, sq, 1.0)), 0.0) @ w) - (m * np.log(m) if m > 0 else 0.0)
        if ent <= 1e-14 * max(m, 1e-300):
            return np.inf
        energy = ((x - x[flip1]) ** 2 + (x - x[flip2]) ** 2) @ w
        return energy / ent

    best = np.inf
    for _ in range(starts):
        x0 = 1.0 + rng.normal(scale=rng.choice([0.05, 0.5, 2.0]), size=4)
        res = minimize(objective, x0, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 3000})
        if np.isfinite(res.fun):
            best = min(best, float(res.fun))
    return best
