"""Walsh-Fourier analysis under the uniform measure.

Characters are chi_S(x) = prod_{i in S} (2 x_i - 1), so a nondecreasing
function has nonnegative level-1 coefficients.  Coefficient arrays are
indexed by the subset mask S (bit i-1 set iff i in S).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    AnyFunction,
    CapExceeded,
    ProductMeasure,
    RealFunction,
    as_values,
    dense_cap,
    dim_of,
    popcounts,
)


@dataclass(frozen=True, eq=False)
class FourierSpectrum:
    n: int
    coeffs: np.ndarray

    def __getitem__(self, subset) -> float:
        if isinstance(subset, (int, np.integer)):
            return float(self.coeffs[subset])
        mask = 0
        for i in subset:
            mask |= 1 << (i - 1)
        return float(self.coeffs[mask])

    def level_weights(self) -> np.ndarray:
        """Sum of squared coefficients at each level 0..n."""
        return np.bincount(popcounts(self.n), weights=self.coeffs**2, minlength=self.n + 1)

    def level1(self) -> np.ndarray:
        return np.array([self.coeffs[1 << i] for i in range(self.n)])


def _butterfly(a: np.ndarray, inverse: bool) -> np.ndarray:
    size = a.shape[-1]
    lead = a.shape[:-1]
    h = 1
    while h < size:
        v = a.reshape(lead + (size // (2 * h), 2, h))
        lo = v[..., 0, :].copy()
        hi = v[..., 1, :]
        if inverse:
            v[..., 0, :] = lo - hi
            v[..., 1, :] = lo + hi
        else:
            v[..., 0, :] = lo + hi
            v[..., 1, :] = hi - lo
        h *= 2
    return a


def walsh_coefficients(values: np.ndarray) -> np.ndarray:
    """Forward transform of (batched) tables along the last axis."""
    a = np.array(values, dtype=np.float64, copy=True)
    _butterfly(a, inverse=False)
    a *= 2.0 ** -dim_of(a)
    return a


def inverse_walsh(coeffs: np.ndarray) -> np.ndarray:
    a = np.array(coeffs, dtype=np.float64, copy=True)
    return _butterfly(a, inverse=True)


def fwht(f: AnyFunction) -> FourierSpectrum:
    """Fast Walsh-Hadamard transform, O(n 2^n)."""
    values = as_values(f)
    n = dim_of(values)
    if n > dense_cap():
        raise CapExceeded(f"dimension {n} exceeds dense cap {dense_cap()}")
    c = walsh_coefficients(values)
    c.setflags(write=False)
    return FourierSpectrum(n, c)


def inverse_fwht(spec: FourierSpectrum) -> RealFunction:
    return RealFunction(spec.n, inverse_walsh(spec.coeffs))


def noise_values(values: np.ndarray, eps: float) -> np.ndarray:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"noise rate must lie in [0,1], got {eps}")
    n = dim_of(values)
    scale = float(eps) ** popcounts(n).astype(np.float64)
    return inverse_walsh(walsh_coefficients(values) * scale)


def noise_operator(f: AnyFunction, eps: float) -> RealFunction:
    """T_eps f: multiply each level-|S| coefficient by eps^|S|."""
    values = as_values(f)
    return RealFunction(dim_of(values), noise_values(values, eps))


def norm_values(values: np.ndarray, p: float, weights: np.ndarray) -> np.ndarray:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return ((np.abs(values) ** p) * weights).sum(axis=-1) ** (1.0 / p)


def p_norm(f: AnyFunction, p: float, mu: ProductMeasure | None = None) -> float:
    """(E_mu |f|^p)^(1/p); uniform measure when mu is omitted."""
    values = as_values(f)
    n = dim_of(values)
    mu = mu or ProductMeasure.uniform(n)
    if mu.n != n:
        raise ValueError("measure and function dimensions differ")
    return float(norm_values(values, p, mu.weights()))
