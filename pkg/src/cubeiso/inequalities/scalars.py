"""Grid checks of the one- and few-variable inequalities behind the two inductive proofs.

Each sub-check evaluates ``lhs >= rhs`` on a grid and records the worst
normalised violation ``(rhs - lhs) / max(1, |lhs|, |rhs|)``.  A suite
passes when no sub-check exceeds the tolerance.
"""

from __future__ import annotations

import math

import numpy as np

from .report import ScalarCheck, ScalarCheckReport

LN2 = math.log(2.0)
SCALAR_TOL = 1e-12
APPA = "APPA_SCALARS"
APPB = "APPB_SCALARS"


def _xlogx(a):
    a = np.asarray(a, dtype=np.float64)
    pos = a > 0
    return np.where(pos, a * np.log(np.where(pos, a, 1.0)), 0.0)


def binary_entropy(x):
    """H(x) = -x log x - (1-x) log(1-x), natural log, H(0) = H(1) = 0."""
    x = np.asarray(x, dtype=np.float64)
    return -_xlogx(x) - _xlogx(1.0 - x)


def divergence(p, q):
    """D(p||q) between the two-point laws (p, 1-p) and (q, 1-q), q in (0,1)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    return _xlogx(p) - p * np.log(q) + _xlogx(1 - p) - (1 - p) * np.log1p(-q)


def phi(x):
    """phi(x) = 1/2 - sqrt(x(1-x)), an involution of [0, 1/2]."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 - np.sqrt(x * (1.0 - x))


def R(x):
    return binary_entropy(phi(x))


def g_fun(r):
    """g(r) = 1 + 2r + 2 sqrt(r(1+r)) = (sqrt r + sqrt(1+r))^2."""
    r = np.asarray(r, dtype=np.float64)
    return (np.sqrt(r) + np.sqrt(1.0 + r)) ** 2


def h_fun(r):
    """h(r) = (1+r)log(1+r) + r log r - (1+2r) log((1+2r)/2).

    Evaluated as log(1 + 1/(1+2r)) - r log(1 + 1/(4r(1+r))), which avoids
    the cancellation of the three large terms for big r; h(0) = log 2.
    """
    r = np.asarray(r, dtype=np.float64)
    pos = r > 0
    rs = np.where(pos, r, 1.0)
    tail = np.where(pos, rs * np.log1p(1.0 / (4.0 * rs * (1.0 + rs))), 0.0)
    return np.log1p(1.0 / (1.0 + 2.0 * r)) - tail


def gh(r):
    return g_fun(r) * h_fun(r)


def _check(name, description, lhs, rhs, coords: dict, tol) -> ScalarCheck:
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    lhs, rhs = np.broadcast_arrays(lhs, rhs)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    viol = (rhs - lhs) / scale
    viol = np.where(np.isnan(viol), np.inf, viol)
    k = int(np.argmax(viol))
    where = {key: float(np.broadcast_to(v, viol.shape).reshape(-1)[k]) for key, v in coords.items()}
    worst = float(viol.reshape(-1)[k])
    return ScalarCheck(name, description, int(viol.size), worst, where, bool(worst <= tol))


def _interior(lo, hi, m):
    return np.linspace(lo, hi, m + 2)[1:-1]


def _appa(res: int, tol: float) -> tuple[list, dict]:
    m1 = res * res
    checks = []

    y = np.linspace(-1.0, 1.0, m1)
    checks.append(
        _check(
            "a_entropy",
            "1 - sqrt(1-y^2) >= log 2 - H((1-y)/2) on [-1,1]",
            1.0 - np.sqrt(np.maximum(1.0 - y * y, 0.0)),
            LN2 - binary_entropy((1.0 - y) / 2.0),
            {"y": y},
            tol,
        )
    )

    Y, T = np.meshgrid(np.linspace(-1, 1, res), np.linspace(-1, 1, res), indexing="ij")
    checks.append(
        _check(
            "b_am_gm",
            "(1+y)(1-t)^2 + (1-y)(1+t)^2 >= 2 sqrt(1-y^2)(1-t^2) on [-1,1]^2",
            (1 + Y) * (1 - T) ** 2 + (1 - Y) * (1 + T) ** 2,
            2.0 * np.sqrt(np.maximum(1 - Y * Y, 0.0)) * (1 - T * T),
            {"y": Y, "t": T},
            tol,
        )
    )

    P, Q = np.meshgrid(np.linspace(0, 1, res), _interior(0, 1, res), indexing="ij")
    checks.append(
        _check("c_divergence", "D(p||q) >= 0", divergence(P, Q), 0.0, {"p": P, "q": Q}, tol)
    )

    # two-point step in the original variables mu_0 = 1+t, mu_1 = 1-t, v_0 = v(1+y), v_1 = v(1-y)
    t = _interior(-1, 1, res)
    yy = _interior(-1, 1, res)
    lam = np.concatenate([[0.0], np.geomspace(1e-6, 1e3, res - 1)])
    T3, Y3, L3 = np.meshgrid(t, yy, lam, indexing="ij")
    vmin = np.maximum((1 + T3) ** 2 / (1 + Y3), (1 - T3) ** 2 / (1 - Y3))
    V = vmin * (1 + L3)
    mu0, mu1 = 1 + T3, 1 - T3
    v0, v1 = V * (1 + Y3), V * (1 - Y3)
    lhs = (
        v0 * np.log(v0 / mu0**2)
        + v1 * np.log(v1 / mu1**2)
        + v0
        + v1
        - 2 * np.sqrt(np.maximum(v0 - mu0**2, 0)) * np.sqrt(np.maximum(v1 - mu1**2, 0))
        - 2 * mu0 * mu1
    )
    checks.append(
        _check(
            "d_two_point_step",
            "two-point functional isoperimetric step under mu_0 + mu_1 = 2, v_i >= mu_i^2",
            lhs,
            2 * V * np.log(V),
            {"t": T3, "y": Y3, "v": V},
            tol,
        )
    )

    x = np.linspace(0, 1, m1)
    checks.append(
        _check("e_base_case", "2x >= (1+x) log(1+x) on [0,1]", 2 * x, (1 + x) * np.log1p(x), {"x": x}, tol)
    )

    # supporting facts of the last step
    z = np.linspace(0, 0.5, m1)
    # w = phi(z) satisfies w(1-w) = (1/2 - z)^2, hence phi(w) = 1/2 - |1/2 - z| = z
    w = phi(z)
    checks.append(
        _check(
            "phi_involution",
            "phi(z)(1 - phi(z)) = (1/2 - z)^2 on [0,1/2], so phi(phi(z)) = z",
            -np.abs(w * (1 - w) - (0.5 - z) ** 2),
            0.0,
            {"z": z},
            tol,
        )
    )
    Rz = R(z)
    checks.append(
        _check(
            "R_convex",
            "second differences of R = H(phi) on [0,1/2] are nonnegative",
            Rz[2:] - 2 * Rz[1:-1] + Rz[:-2],
            0.0,
            {"x": z[1:-1]},
            tol,
        )
    )
    checks.append(
        _check("R_tangent", "R(x) >= log 2 - 2x on [0,1/2]", Rz, LN2 - 2 * z, {"x": z}, tol)
    )
    ys = y[1:-1]
    ts = np.linspace(-1, 1, m1)[::-1][1:-1]
    decomp_lhs = (
        1
        + (1 + ys) / 2 * np.log((1 + ys) ** 2 / (1 + ts) ** 2)
        + (1 - ys) / 2 * np.log((1 - ys) ** 2 / (1 - ts) ** 2)
        - ((1 + ys) / 2 * np.log1p(ys) + (1 - ys) / 2 * np.log1p(-ys))
    )
    div = 2 * divergence((1 - ys) / 2, (1 - ts) / 2)
    decomp_rhs = div + binary_entropy((1 - ys) / 2) + 1 - LN2
    term_scale = 1.0 + np.abs(div) + np.abs(decomp_lhs)
    checks.append(
        _check(
            "divergence_rewrite",
            "left side rewrites as 2D((1-y)/2||(1-t)/2) + H((1-y)/2) + 1 - log 2",
            -np.abs(decomp_lhs - decomp_rhs) / term_scale,
            0.0,
            {"y": ys, "t": ts},
            tol,
        )
    )
    return checks, {}


def _appb(res: int, tol: float) -> tuple[list, dict]:
    m1 = res * res
    checks = []
    r = np.concatenate([[0.0], np.geomspace(1e-12, 1e6, m1 - 1)])
    v = gh(r)
    checks.append(_check("gh_le_1", "g(r) h(r) <= 1 on [0, 1e6]", 1.0, v, {"r": r}, tol))
    checks.append(
        _check(
            "gh_increasing",
            "g h is nondecreasing along the grid",
            v[1:],
            v[:-1],
            {"r": r[1:]},
            tol,
        )
    )
    gh0 = float(gh(0.0))
    checks.append(
        _check("gh_at_0", "(gh)(0) = log 2", -abs(gh0 - LN2), 0.0, {"r": 0.0}, tol)
    )
    gh_inf = float(gh(1e6))
    checks.append(
        _check(
            "gh_limit",
            "(gh)(1e6) lies in [0.999, 1]",
            min(gh_inf - 0.999, 1.0 - gh_inf),
            0.0,
            {"r": 1e6},
            tol,
        )
    )
    rp = r[1:]
    q = np.sqrt(rp * (1 + rp))
    checks.append(
        _check(
            "monotonicity_criterion",
            "h(r) >= sqrt(r(1+r)) log((1+2r)^2 / (4r(1+r)))",
            h_fun(rp),
            q * np.log1p(1.0 / (4 * rp * (1 + rp))),
            {"r": rp},
            tol,
        )
    )
    t = 1.0 + np.geomspace(1e-9, 1e4, m1)
    t = np.concatenate([[1.0], t])
    checks.append(
        _check(
            "t_first",
            "(t-1) log(2t^2/(t^2+1)) >= 2 log((t^2+1)/(2t)) for t >= 1",
            (t - 1) * np.log(2 * t * t / (t * t + 1)),
            2 * np.log1p((t - 1) ** 2 / (2 * t)),
            {"t": t},
            tol,
        )
    )
    checks.append(
        _check(
            "t_second",
            "log(2t^2/(t^2+1)) >= (2t-2)/(t^2+1) for t >= 1",
            np.log1p((t * t - 1) / (t * t + 1)),
            (2 * t - 2) / (t * t + 1),
            {"t": t},
            tol,
        )
    )
    checks.append(
        _check("t_third", "t^3 + 1 >= t^2 + t for t >= 1", t**3 + 1, t * t + t, {"t": t}, tol)
    )
    return checks, {"gh_0": gh0, "gh_1e6": gh_inf, "gh_max": float(v.max())}


def scalar_checks(id: str, resolution: int = 100, tol: float = SCALAR_TOL) -> ScalarCheckReport:
    """Run the APPA_SCALARS or APPB_SCALARS suite on grids of ``resolution`` points per axis.

    One-dimensional checks use resolution^2 points, so the default already
    samples 10^4 points per check.
    """
    key = str(id).upper()
    if resolution < 100:
        raise ValueError("grid resolution must be at least 100 points per axis")
    if key == APPA:
        checks, values = _appa(resolution, tol)
    elif key == APPB:
        checks, values = _appb(resolution, tol)
    else:
        raise ValueError(f"unknown scalar suite {id!r}")
    worst = max(checks, key=lambda c: c.worst_violation)
    return ScalarCheckReport(
        id=key,
        grid=f"resolution={resolution} per axis; 1-D checks use {resolution * resolution} points",
        worst_violation=worst.worst_violation,
        worst_at=worst.worst_at,
        worst_check=worst.name,
        passed=all(c.passed for c in checks),
        tol=tol,
        checks=checks,
        values=values,
    )
