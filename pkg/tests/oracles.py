"""Slow pure-Python oracles, written without numpy or the package kernels.

Every quantity is computed by direct summation over the 2^n points, with
bit i-1 of a point index holding coordinate i.  Where two independent
routes exist (pointwise flips versus Fourier coefficients), both are
provided so the oracles can cross-check each other.
"""

from __future__ import annotations

import itertools
import math


def points(n):
    return range(1 << n)


def bit(x, i):
    """Value of coordinate i (1-based) at point x."""
    return (x >> (i - 1)) & 1


def weight(x, p):
    w = 1.0
    for i, pi in enumerate(p, start=1):
        w *= pi if bit(x, i) else 1.0 - pi
    return w


def expect(table, p=None):
    n = (len(table) - 1).bit_length()
    if p is None:
        return math.fsum(table) / len(table)
    return math.fsum(weight(x, p) * table[x] for x in points(n))


def influences_by_flips(table, p=None):
    """E(f - f^i)^2, evaluated point by point."""
    n = (len(table) - 1).bit_length()
    out = []
    for i in range(1, n + 1):
        sq = [(table[x] - table[x ^ (1 << (i - 1))]) ** 2 for x in points(n)]
        out.append(expect(sq, p))
    return out


def chi(S, x):
    v = 1
    for i in S:
        v *= 2 * bit(x, i) - 1
    return v


def subsets(n):
    for k in range(n + 1):
        yield from itertools.combinations(range(1, n + 1), k)


def fourier(table):
    """hat f(S) = 2^-n sum_x f(x) chi_S(x), keyed by sorted tuples."""
    n = (len(table) - 1).bit_length()
    return {S: math.fsum(table[x] * chi(S, x) for x in points(n)) / (1 << n) for S in subsets(n)}


def influences_by_fourier(table):
    """Uniform measure only: E(f - f^i)^2 = 4 sum_{S containing i} hat f(S)^2."""
    n = (len(table) - 1).bit_length()
    co = fourier(table)
    return [4.0 * math.fsum(c * c for S, c in co.items() if i in S) for i in range(1, n + 1)]


def conditional(table, p, fixed):
    """E(f | the coordinates in ``fixed``) as a full table, by averaging over the rest."""
    n = (len(table) - 1).bit_length()
    free = [i for i in range(1, n + 1) if i not in fixed]
    out = []
    for x in points(n):
        acc = []
        for bits in itertools.product((0, 1), repeat=len(free)):
            y = x
            w = 1.0
            for i, b in zip(free, bits):
                y = (y & ~(1 << (i - 1))) | (b << (i - 1))
                pi = 0.5 if p is None else p[i - 1]
                w *= pi if b else 1.0 - pi
            acc.append(w * table[y])
        out.append(math.fsum(acc))
    return out


def martingale_by_conditioning(table, p=None, ordering=None):
    n = (len(table) - 1).bit_length()
    ordering = list(ordering or range(1, n + 1))
    levels = [conditional(table, p, set(ordering[:j])) for j in range(n + 1)]
    return [[a - b for a, b in zip(levels[j], levels[j - 1])] for j in range(1, n + 1)]


def martingale_by_fourier(table):
    """Uniform, natural order: d_j = sum over S with max(S) = j of hat f(S) chi_S."""
    n = (len(table) - 1).bit_length()
    co = fourier(table)
    return [
        [math.fsum(c * chi(S, x) for S, c in co.items() if S and max(S) == j) for x in points(n)]
        for j in range(1, n + 1)
    ]


def entropy(g, p=None):
    m = expect(g, p)
    if m == 0.0:
        return 0.0
    terms = [v * math.log(v) if v > 0 else 0.0 for v in g]
    return expect(terms, p) - m * math.log(m)


def cnj_bool(table, route="flips"):
    """(lhs, rhs) of sum I_i^2 >= 4 sigma^2 exp(-(log 2 / 2) sum I_i / sigma^2)."""
    infl = influences_by_flips(table) if route == "flips" else influences_by_fourier(table)
    mu = expect(table)
    var = mu * (1.0 - mu)
    lhs = math.fsum(v * v for v in infl)
    rhs = 4.0 * var * math.exp(-(math.log(2.0) / 2.0) * math.fsum(infl) / var)
    return lhs, rhs


def cnj_sob(table, route="flips"):
    """(lhs, rhs) of E(f,f) >= (2/log 2) sum_i Ent(d_i^2), uniform, natural order."""
    if route == "flips":
        energy = math.fsum(influences_by_flips(table))
        diffs = martingale_by_conditioning(table)
    else:
        energy = math.fsum(influences_by_fourier(table))
        diffs = martingale_by_fourier(table)
    ent = math.fsum(entropy([d * d for d in dj]) for dj in diffs)
    return energy, (2.0 / math.log(2.0)) * ent


def exhaustive_min(n, pair):
    """Smallest lhs/rhs over non-constant boolean functions, ties to the smallest code."""
    best, code = math.inf, None
    for c in range(1, (1 << (1 << n)) - 1):
        table = [(c >> x) & 1 for x in points(n)]
        lhs, rhs = pair(table)
        r = lhs / rhs if rhs > 0 else math.inf
        if r < best:
            best, code = r, c
    return best, code


def is_monotone(table):
    n = (len(table) - 1).bit_length()
    return all(table[x] <= table[x | (1 << i)] for x in points(n) for i in range(n))
