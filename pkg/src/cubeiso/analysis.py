"""Influences, Dirichlet forms, entropy and martingale decompositions.

Every kernel works on tables with arbitrary leading batch axes (the last
axis has length 2^n), together with the per-coordinate probabilities of a
product measure.  The public functions accept BooleanFunction /
RealFunction objects as well as raw (batched) arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    AnyFunction,
    BooleanFunction,
    CoordinateOrdering,
    ProductMeasure,
    RealFunction,
    as_values,
    dim_of,
    flip_axis_view,
    merge_axis,
    point_weights,
    split_axis,
)

# --------------------------------------------------------------------------
# array kernels


def expect(values: np.ndarray, p: Sequence[float]) -> np.ndarray:
    return (values * point_weights(p)).sum(axis=-1)


def xlogx(a: np.ndarray) -> np.ndarray:
    """Elementwise a log a with 0 log 0 = 0."""
    a = np.asarray(a, dtype=np.float64)
    pos = a > 0
    return np.where(pos, a * np.log(np.where(pos, a, 1.0)), 0.0)


def entropy_values(g: np.ndarray, p: Sequence[float]) -> np.ndarray:
    """Ent(g) = m E[phi(g/m)] with m = E g and phi(r) = r log r - r + 1 >= 0.

    Subtracting E g log g and m log m directly loses absolute accuracy in
    proportion to the size of g; phi vanishes to second order at r = 1,
    so the summands here are nonnegative and near-constant g costs nothing.
    """
    w = point_weights(p)
    m = (g * w).sum(axis=-1)
    safe = np.where(m > 0, m, 1.0)
    r = g / np.expand_dims(safe, -1)
    phi = xlogx(r) - r + 1.0
    return np.where(m > 0, m * (phi * w).sum(axis=-1), 0.0)


def square_entropy_values(values: np.ndarray, p: Sequence[float]) -> np.ndarray:
    """Ent(f^2), computed from f itself.

    With a = E f, sigma^2 = E (f - a)^2 and m = E f^2 = a^2 + sigma^2, the
    relative deviation u = f^2/m - 1 is formed as ((f - a)(f + a) - sigma^2)/m,
    which stays accurate when f is large and nearly constant; then
    Ent(f^2) = m E[(1 + u) log(1 + u) - u].
    """
    w = point_weights(p)
    a = (values * w).sum(axis=-1)
    c = values - np.expand_dims(a, -1)
    var = (c * c * w).sum(axis=-1)
    m = a * a + var
    safe = np.where(m > 0, m, 1.0)
    u = (c * (values + np.expand_dims(a, -1)) - np.expand_dims(var, -1)) / np.expand_dims(safe, -1)
    one = 1.0 + u
    pos = one > 0
    phi = np.where(pos, one * np.log1p(np.where(pos, u, 0.0)), 0.0) - u
    return np.where(m > 0, m * (phi * w).sum(axis=-1), 0.0)


def variance_values(values: np.ndarray, p: Sequence[float]) -> np.ndarray:
    w = point_weights(p)
    m = (values * w).sum(axis=-1)
    centred = values - np.expand_dims(m, -1)
    return (centred * centred * w).sum(axis=-1)


def influence_values(values: np.ndarray, p: Sequence[float]) -> np.ndarray:
    """E_mu (f - f^i)^2 for every coordinate; result has a trailing axis of length n."""
    n = dim_of(values)
    w = point_weights(p)
    out = [((values - flip_axis_view(values, i)) ** 2 * w).sum(axis=-1) for i in range(1, n + 1)]
    if not out:
        return np.zeros(values.shape[:-1] + (0,))
    return np.stack(out, axis=-1)


def abs_diff_values(values: np.ndarray, p: Sequence[float]) -> np.ndarray:
    """E_mu |f - f^i| for every coordinate."""
    n = dim_of(values)
    w = point_weights(p)
    out = [(np.abs(values - flip_axis_view(values, i)) * w).sum(axis=-1) for i in range(1, n + 1)]
    if not out:
        return np.zeros(values.shape[:-1] + (0,))
    return np.stack(out, axis=-1)


def dirichlet_values(values: np.ndarray, p: Sequence[float]) -> np.ndarray:
    return influence_values(values, p).sum(axis=-1)


def reorder(values: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Relabel coordinates so that bit k of the new index is coordinate perm[k]."""
    n = dim_of(values)
    if tuple(perm) == tuple(range(1, n + 1)):
        return values
    lead = values.shape[:-1]
    a = values.reshape(lead + (2,) * n)
    nl = len(lead)
    # axis nl + (n - c) holds coordinate c; new axis nl + (n - 1 - k) must hold perm[k]
    axes = list(range(nl)) + [nl + n - perm[n - 1 - j] for j in range(n)]
    return np.ascontiguousarray(a.transpose(axes)).reshape(values.shape)


def unorder(values: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Inverse of reorder."""
    inv = [0] * len(perm)
    for k, c in enumerate(perm):
        inv[c - 1] = k + 1
    return reorder(values, inv)


@dataclass
class MartingaleArrays:
    """Compact martingale data for (batched) tables.

    ``prefix[j]`` is f_j = E(f | first j ordered coordinates) stored on 2^j
    points (bit k of the compact index is the (k+1)-th ordered coordinate);
    ``diffs[j-1]`` is d_j on the same 2^j points; ``probs[k]`` is the bias
    of the (k+1)-th ordered coordinate.
    """

    prefix: list
    diffs: list
    probs: tuple

    def _per_step(self, fn) -> np.ndarray:
        out = [fn(d, self.probs[: j + 1]) for j, d in enumerate(self.diffs)]
        if not out:
            return np.zeros(self.prefix[0].shape[:-1] + (0,))
        return np.stack(out, axis=-1)

    def abs_means(self) -> np.ndarray:
        return self._per_step(lambda d, q: expect(np.abs(d), q))

    def square_means(self) -> np.ndarray:
        return self._per_step(lambda d, q: expect(d * d, q))

    def diff_entropies(self) -> np.ndarray:
        """Ent(d_j^2) for every j."""
        return self._per_step(lambda d, q: entropy_values(d * d, q))

    def diff_energies(self) -> np.ndarray:
        """E(d_j, d_j) for every j (unexposed coordinates contribute nothing)."""
        return self._per_step(dirichlet_values)


def martingale_values(values: np.ndarray, p: Sequence[float], perm: Sequence[int]) -> MartingaleArrays:
    n = dim_of(values)
    probs = tuple(p[c - 1] for c in perm)
    cur = reorder(values, perm)
    prefix = [None] * (n + 1)
    prefix[n] = cur
    for j in range(n, 0, -1):
        lo, hi = split_axis(cur, j)
        q = probs[j - 1]
        cur = (1.0 - q) * lo + q * hi
        prefix[j - 1] = cur
    diffs = []
    for j in range(1, n + 1):
        prev = prefix[j - 1]
        f = prefix[j]
        lead = f.shape[:-1]
        d = f.reshape(lead + (2, 1 << (j - 1))) - prev.reshape(lead + (1, 1 << (j - 1)))
        diffs.append(d.reshape(f.shape))
    return MartingaleArrays(prefix, diffs, probs)


def expand_compact(compact: np.ndarray, perm: Sequence[int], n: int) -> np.ndarray:
    """Dense table (natural coordinates) of a function of the first j ordered coordinates."""
    j = dim_of(compact)
    lead = compact.shape[:-1]
    dense = np.broadcast_to(
        compact.reshape(lead + (1, 1 << j)), lead + (1 << (n - j), 1 << j)
    ).reshape(lead + (1 << n,))
    return unorder(np.ascontiguousarray(dense), perm)


# --------------------------------------------------------------------------
# public API


@dataclass(frozen=True, eq=False)
class InfluenceVector:
    n: int
    values: np.ndarray
    flavor: str  # "boolean-probability" or "real-quadratic"

    def total(self) -> float:
        return float(self.values.sum())

    def sum_squares(self) -> float:
        return float((self.values**2).sum())

    def __getitem__(self, i: int) -> float:
        """Influence of coordinate i (1-based)."""
        return float(self.values[i - 1])


def _measure(mu: ProductMeasure | None, n: int) -> ProductMeasure:
    if mu is None:
        return ProductMeasure.uniform(n)
    if mu.n != n:
        raise ValueError(f"measure has {mu.n} coordinates, function has {n}")
    return mu


def boolean_influence_counts(f: BooleanFunction) -> np.ndarray:
    """Number of points x with f(x) != f(x XOR e_i), per coordinate, exactly.

    Word-parallel: within a word the partner of bit b is bit b XOR s; across
    words (s >= 64) the partner word is j XOR (s / 64).
    """
    n = f.n
    w = f.words
    counts = np.zeros(n, dtype=np.int64)
    for i in range(1, n + 1):
        s = 1 << (i - 1)
        if s < 64:
            low = _low_mask(s)
            x = (w ^ (w >> np.uint64(s))) & np.uint64(low)
            counts[i - 1] = 2 * int(np.bitwise_count(x).sum())
        else:
            t = s >> 6
            pairs = w.reshape(-1, 2, t)
            counts[i - 1] = 2 * int(np.bitwise_count(pairs[:, 0, :] ^ pairs[:, 1, :]).sum())
    return counts


def _low_mask(s: int) -> int:
    """64-bit mask of positions b with bit log2(s) of b clear."""
    m = 0
    for b in range(64):
        if not b & s:
            m |= 1 << b
    return m


def influences(f: AnyFunction | np.ndarray, mu: ProductMeasure | None = None) -> InfluenceVector:
    """Influence of each coordinate.

    Boolean functions get Pr_mu[f(x) != f(x XOR e_i)]; under the uniform
    measure this is an exact count divided once by 2^n.  Real functions get
    E_mu (f - f^i)^2; for 0/1 tables the two agree.
    """
    if isinstance(f, BooleanFunction):
        mu = _measure(mu, f.n)
        if mu.is_uniform:
            counts = boolean_influence_counts(f)
            return InfluenceVector(f.n, counts / float(1 << f.n), "boolean-probability")
        vals = influence_values(f.table().astype(np.float64), mu.p)
        return InfluenceVector(f.n, vals, "boolean-probability")
    values = as_values(f)
    n = dim_of(values)
    mu = _measure(mu, n)
    flavor = "boolean-probability" if np.isin(values, (0.0, 1.0)).all() else "real-quadratic"
    return InfluenceVector(n, influence_values(values, mu.p), flavor)


def dirichlet_form(f: AnyFunction | np.ndarray, mu: ProductMeasure | None = None):
    """E(f,f) = sum_i E_mu (f(x) - f(x XOR e_i))^2."""
    values = as_values(f)
    n = dim_of(values)
    mu = _measure(mu, n)
    out = dirichlet_values(values, mu.p)
    return float(out) if out.ndim == 0 else out


def entropy(g: AnyFunction | np.ndarray, mu: ProductMeasure | None = None):
    """Ent(g) = E g log g - E g log E g for g >= 0, with 0 log 0 = 0."""
    values = as_values(g)
    if (values < 0).any():
        raise ValueError("entropy requires a nonnegative function")
    n = dim_of(values)
    mu = _measure(mu, n)
    out = entropy_values(values, mu.p)
    return float(out) if out.ndim == 0 else out


def mean(f: AnyFunction | np.ndarray, mu: ProductMeasure | None = None):
    values = as_values(f)
    mu = _measure(mu, dim_of(values))
    out = expect(values, mu.p)
    return float(out) if out.ndim == 0 else out


def variance(f: AnyFunction | np.ndarray, mu: ProductMeasure | None = None):
    """sigma^2(f) = E f^2 - E^2 f; exactly zero for constant tables."""
    values = as_values(f)
    mu = _measure(mu, dim_of(values))
    out = variance_values(values, mu.p)
    const = (values == values[..., :1]).all(axis=-1)
    out = np.where(const, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class MartingaleDecomposition:
    ordering: CoordinateOrdering
    arrays: MartingaleArrays
    abs_means: np.ndarray  # E|d_i|
    square_means: np.ndarray  # E d_i^2

    @property
    def n(self) -> int:
        return self.ordering.n

    @property
    def diffs(self) -> list[RealFunction]:
        """d_1..d_n as dense functions on {0,1}^n."""
        return [self.diff(j) for j in range(1, self.n + 1)]

    def diff(self, j: int) -> RealFunction:
        return RealFunction(self.n, expand_compact(self.arrays.diffs[j - 1], self.ordering.perm, self.n))

    def conditional(self, j: int) -> RealFunction:
        """f_j = E(f | F_j) as a dense function."""
        if j == 0:
            return RealFunction.constant(self.n, float(self.arrays.prefix[0][0]))
        return RealFunction(self.n, expand_compact(self.arrays.prefix[j], self.ordering.perm, self.n))

    def compact_diff(self, j: int) -> np.ndarray:
        return self.arrays.diffs[j - 1]


def martingale(
    f: AnyFunction | np.ndarray,
    mu: ProductMeasure | None = None,
    ordering: CoordinateOrdering | None = None,
) -> MartingaleDecomposition:
    """Doob martingale of f along the filtration exposing coordinates in ``ordering``."""
    values = as_values(f)
    if values.ndim != 1:
        raise ValueError("martingale() takes a single function; use martingale_values for batches")
    n = dim_of(values)
    mu = _measure(mu, n)
    ordering = ordering or CoordinateOrdering.natural(n)
    if ordering.n != n:
        raise ValueError("ordering and function dimensions differ")
    arr = martingale_values(values, mu.p, ordering.perm)
    return MartingaleDecomposition(ordering, arr, arr.abs_means(), arr.square_means())


def conditional_on(values: np.ndarray, p: Sequence[float], coords: Sequence[int]) -> np.ndarray:
    """E(f | x_c for c in coords), returned as a dense table.

    Averages out every coordinate outside ``coords`` with its two-point
    weights; cost n 2^n.
    """
    n = dim_of(values)
    keep = set(coords)
    out = values
    for c in range(n, 0, -1):
        if c in keep:
            continue
        lo, hi = split_axis(out, c)
        avg = (1.0 - p[c - 1]) * lo + p[c - 1] * hi
        out = merge_axis(avg, avg, c)
    return out
