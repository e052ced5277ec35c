"""Representations of functions on the discrete cube {0,1}^n.

Index convention (shared by every module): a point x of the cube is stored
as the integer sum(x_i * 2**(i-1)), so coordinate 1 is the least significant
bit.  A truth table / value table is indexed by that integer.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence, Union

import numpy as np

MAX_BOOLEAN_N = 30
DEFAULT_DENSE_CAP = 24

_dense_cap = DEFAULT_DENSE_CAP


def dense_cap() -> int:
    """Largest dimension accepted for dense real-valued tables."""
    return _dense_cap


def set_dense_cap(n: int) -> None:
    global _dense_cap
    if not 1 <= n <= MAX_BOOLEAN_N:
        raise ValueError(f"dense cap must lie in [1, {MAX_BOOLEAN_N}], got {n}")
    _dense_cap = n


class CapExceeded(ValueError):
    """Raised when a dense representation would exceed the configured cap."""


def _check_dim(n: int, cap: int) -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"dimension must be an integer, got {n!r}")
    if n < 1:
        raise ValueError(f"dimension must be at least 1, got {n}")
    if n > cap:
        raise CapExceeded(f"dimension {n} exceeds dense cap {cap}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


# --------------------------------------------------------------------------
# bit helpers


def popcounts(n: int) -> np.ndarray:
    """Hamming weight of every point of {0,1}^n, as an int array of length 2^n."""
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)


def flip_axis_view(values: np.ndarray, i: int) -> np.ndarray:
    """Return values composed with x -> x XOR e_i along the last axis (i is 1-based)."""
    size = values.shape[-1]
    h = 1 << (i - 1)
    a = values.reshape(values.shape[:-1] + (size // (2 * h), 2, h))
    return a[..., ::-1, :].reshape(values.shape)


def split_axis(values: np.ndarray, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a table along coordinate i into the x_i = 0 and x_i = 1 halves."""
    size = values.shape[-1]
    h = 1 << (i - 1)
    a = values.reshape(values.shape[:-1] + (size // (2 * h), 2, h))
    lead = values.shape[:-1]
    return (
        np.ascontiguousarray(a[..., 0, :]).reshape(lead + (size // 2,)),
        np.ascontiguousarray(a[..., 1, :]).reshape(lead + (size // 2,)),
    )


def merge_axis(lo: np.ndarray, hi: np.ndarray, i: int) -> np.ndarray:
    """Inverse of split_axis."""
    half = lo.shape[-1]
    h = 1 << (i - 1)
    lead = lo.shape[:-1]
    a = np.stack(
        [lo.reshape(lead + (half // h, h)), hi.reshape(lead + (half // h, h))], axis=-2
    )
    return a.reshape(lead + (2 * half,))


# --------------------------------------------------------------------------
# function types


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """Packed truth table of f: {0,1}^n -> {0,1}.

    ``words`` holds the 2^n bits little-endian in 64-bit words; for n < 6 the
    single word is zero above bit 2^n.
    """

    n: int
    words: np.ndarray

    def __post_init__(self) -> None:
        _check_dim(self.n, MAX_BOOLEAN_N)
        w = np.ascontiguousarray(self.words, dtype="<u8").reshape(-1)
        if w.shape[0] != _word_count(self.n):
            raise ValueError(
                f"expected {_word_count(self.n)} words for n={self.n}, got {w.shape[0]}"
            )
        if self.n < 6 and int(w[0]) >> (1 << self.n):
            raise ValueError("bits set beyond 2^n")
        object.__setattr__(self, "words", _readonly(w.copy()))

    # construction ------------------------------------------------------
    @classmethod
    def from_table(cls, table: Sequence[int] | np.ndarray) -> "BooleanFunction":
        t = np.asarray(table)
        size = t.shape[0]
        if t.ndim != 1 or size < 2 or size & (size - 1):
            raise ValueError("truth table length must be a power of two >= 2")
        if not np.isin(t, (0, 1)).all():
            raise ValueError("truth table entries must be 0 or 1")
        n = size.bit_length() - 1
        packed = np.packbits(t.astype(np.uint8), bitorder="little")
        if n < 6:
            return cls(n, np.array([int.from_bytes(packed.tobytes(), "little")], dtype="<u8"))
        return cls(n, packed.view("<u8"))

    @classmethod
    def from_int(cls, n: int, code: int) -> "BooleanFunction":
        _check_dim(n, MAX_BOOLEAN_N)
        if code < 0 or code >> (1 << n):
            raise ValueError(f"code does not fit in 2^{n} bits")
        nbytes = max(8, (1 << n) // 8)
        raw = code.to_bytes(nbytes, "little")
        return cls(n, np.frombuffer(raw, dtype="<u8"))

    @classmethod
    def from_predicate(cls, n: int, pred) -> "BooleanFunction":
        """Build from a vectorised predicate on the (2^n, n) 0/1 point matrix."""
        pts = points(n)
        return cls.from_table(np.asarray(pred(pts), dtype=np.uint8))

    # views -------------------------------------------------------------
    def table(self) -> np.ndarray:
        """Truth table as a uint8 array of length 2^n."""
        bits = np.unpackbits(self.words.view(np.uint8), bitorder="little")
        return bits[: 1 << self.n]

    def to_int(self) -> int:
        return int.from_bytes(self.words.tobytes(), "little")

    def to_real(self) -> "RealFunction":
        return RealFunction(self.n, self.table().astype(np.float64))

    def count(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def mean(self) -> float:
        return self.count() / (1 << self.n)

    def __call__(self, x: int) -> int:
        return (int(self.words[x >> 6]) >> (x & 63)) & 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.words, other.words)

    def __hash__(self) -> int:
        return hash((self.n, self.words.tobytes()))

    def __repr__(self) -> str:
        h = encode_hex(self)
        if len(h) > 32:
            h = h[:16] + "..." + h[-8:]
        return f"BooleanFunction(n={self.n}, hex={h})"


def _word_count(n: int) -> int:
    return max(1, (1 << n) >> 6)


@dataclass(frozen=True, eq=False)
class RealFunction:
    """Dense table of a real-valued function on {0,1}^n."""

    n: int
    values: np.ndarray
    cap: int = field(default=0, repr=False, compare=False)

    def __post_init__(self) -> None:
        _check_dim(self.n, self.cap or dense_cap())
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if v.shape[0] != 1 << self.n:
            raise ValueError(f"expected {1 << self.n} values, got {v.shape[0]}")
        if not np.isfinite(v).all():
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", _readonly(v))

    @classmethod
    def from_boolean(cls, f: BooleanFunction) -> "RealFunction":
        return f.to_real()

    @classmethod
    def constant(cls, n: int, c: float) -> "RealFunction":
        return cls(n, np.full(1 << n, float(c)))

    def __call__(self, x: int) -> float:
        return float(self.values[x])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RealFunction):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.n, self.values.tobytes()))

    def __repr__(self) -> str:
        return f"RealFunction(n={self.n})"

    def is_boolean(self) -> bool:
        return bool(np.isin(self.values, (0.0, 1.0)).all())

    def to_boolean(self) -> BooleanFunction:
        if not self.is_boolean():
            raise ValueError("function is not 0/1 valued")
        return BooleanFunction.from_table(self.values.astype(np.uint8))


@dataclass(frozen=True)
class SymmetricProfile:
    """A function depending only on Hamming weight: f(x) = levels[|x|].

    ``numeric_mode`` is ``"exact"`` (levels are Fractions) or ``"logfloat"``
    (levels are floats; level weights are handled in the log domain).
    """

    n: int
    levels: tuple
    numeric_mode: str = "logfloat"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("dimension must be at least 1")
        if len(self.levels) != self.n + 1:
            raise ValueError(f"expected {self.n + 1} levels, got {len(self.levels)}")
        if self.numeric_mode == "exact":
            lv = tuple(Fraction(v) for v in self.levels)
        elif self.numeric_mode == "logfloat":
            lv = tuple(float(v) for v in self.levels)
            if not all(math.isfinite(v) for v in lv):
                raise ValueError("levels must be finite")
        else:
            raise ValueError(f"unknown numeric mode {self.numeric_mode!r}")
        object.__setattr__(self, "levels", lv)

    def float_levels(self) -> np.ndarray:
        return np.array([float(v) for v in self.levels])

    def dense(self, cap: int | None = None) -> RealFunction:
        _check_dim(self.n, cap or dense_cap())
        return RealFunction(self.n, self.float_levels()[popcounts(self.n)], cap=cap or 0)

    def to_logfloat(self) -> "SymmetricProfile":
        return SymmetricProfile(self.n, self.float_levels().tolist(), "logfloat")


@dataclass(frozen=True)
class ProductMeasure:
    """Product measure on {0,1}^n with Pr[x_i = 1] = p[i-1]."""

    p: tuple

    def __post_init__(self) -> None:
        p = tuple(float(v) for v in self.p)
        if not p:
            raise ValueError("measure needs at least one coordinate")
        for v in p:
            if not 0.0 < v < 1.0:
                raise ValueError(f"probabilities must lie in (0,1), got {v}")
        object.__setattr__(self, "p", p)

    @classmethod
    def uniform(cls, n: int) -> "ProductMeasure":
        return cls((0.5,) * n)

    @classmethod
    def biased(cls, n: int, p: float) -> "ProductMeasure":
        return cls((p,) * n)

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def is_uniform(self) -> bool:
        return all(v == 0.5 for v in self.p)

    @property
    def common_bias(self) -> float | None:
        first = self.p[0]
        return first if all(v == first for v in self.p) else None

    def weights(self) -> np.ndarray:
        return point_weights(self.p)

    def weight(self, x: int) -> float:
        w = 1.0
        for i, pi in enumerate(self.p):
            w *= pi if (x >> i) & 1 else 1.0 - pi
        return w

    def summary(self) -> str:
        if self.is_uniform:
            return "uniform"
        b = self.common_bias
        if b is not None:
            return f"mu_p(p={b:.12g})"
        return "product(" + ",".join(f"{v:.6g}" for v in self.p) + ")"


def point_weights(p: Sequence[float]) -> np.ndarray:
    """Dense weight vector for a product measure; entry x is prod p_i^x_i (1-p_i)^(1-x_i)."""
    w = np.ones(1)
    for pi in p:
        # new coordinate becomes the most significant bit
        w = np.concatenate([w * (1.0 - pi), w * pi])
    return w


@dataclass(frozen=True)
class CoordinateOrdering:
    """Order in which a martingale filtration exposes coordinates (1-based)."""

    perm: tuple

    def __post_init__(self) -> None:
        perm = tuple(int(v) for v in self.perm)
        if sorted(perm) != list(range(1, len(perm) + 1)):
            raise ValueError(f"not a permutation of 1..{len(perm)}: {perm}")
        object.__setattr__(self, "perm", perm)

    @classmethod
    def natural(cls, n: int) -> "CoordinateOrdering":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def parse(cls, text: str) -> "CoordinateOrdering":
        return cls(tuple(int(t) for t in text.split(",") if t.strip()))

    @property
    def n(self) -> int:
        return len(self.perm)

    def render(self) -> str:
        return ",".join(map(str, self.perm))


AnyFunction = Union[BooleanFunction, RealFunction]


def points(n: int) -> np.ndarray:
    """All points of {0,1}^n as a (2^n, n) uint8 matrix; column i-1 is x_i."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def as_values(f: AnyFunction | np.ndarray) -> np.ndarray:
    """Float table(s) of a function; arrays are passed through (batched tables allowed)."""
    if isinstance(f, BooleanFunction):
        return f.table().astype(np.float64)
    if isinstance(f, RealFunction):
        return f.values
    if isinstance(f, SymmetricProfile):
        return f.dense().values
    a = np.asarray(f, dtype=np.float64)
    size = a.shape[-1]
    if size < 1 or size & (size - 1):
        raise ValueError("table length must be a power of two")
    return a


def dim_of(values: np.ndarray) -> int:
    return values.shape[-1].bit_length() - 1


# --------------------------------------------------------------------------
# operations


def restrict_halves(f: RealFunction, i: int) -> tuple[RealFunction, RealFunction]:
    """Restrictions of f to the half-cubes x_i = 0 and x_i = 1.

    The remaining coordinates keep their original relative order.
    """
    if not 1 <= i <= f.n:
        raise IndexError(f"coordinate {i} out of range 1..{f.n}")
    if f.n < 2:
        raise ValueError("restriction of a 1-dimensional function has dimension 0")
    lo, hi = split_axis(f.values, i)
    return RealFunction(f.n - 1, lo), RealFunction(f.n - 1, hi)


def merge_halves(f0: RealFunction, f1: RealFunction, i: int) -> RealFunction:
    """Inverse of restrict_halves: f0 becomes the x_i = 0 half."""
    if f0.n != f1.n:
        raise ValueError("halves must have equal dimension")
    if not 1 <= i <= f0.n + 1:
        raise IndexError(f"coordinate {i} out of range 1..{f0.n + 1}")
    return RealFunction(f0.n + 1, merge_axis(f0.values, f1.values, i))


def xor_shift(f: RealFunction, i: int) -> RealFunction:
    """f^i(x) = f(x XOR e_i)."""
    if not 1 <= i <= f.n:
        raise IndexError(f"coordinate {i} out of range 1..{f.n}")
    return RealFunction(f.n, flip_axis_view(f.values, i))


_HEX_RE = re.compile(r"^[0-9a-fA-F]+$")


def hex_digits(n: int) -> int:
    return max(1, (1 << n) // 4)


def encode_hex(f: BooleanFunction) -> str:
    """Uppercase hex of the integer whose bit x is f(x), zero padded to 2^n/4 digits."""
    if f.n < 3:
        return format(f.to_int(), "X")
    raw = f.words.tobytes()[: (1 << f.n) // 8]
    return raw[::-1].hex().upper()


def decode_hex(n: int, text: str) -> BooleanFunction:
    _check_dim(n, MAX_BOOLEAN_N)
    text = text.strip()
    if text.lower().startswith("0x"):
        text = text[2:]
    if len(text) != hex_digits(n):
        raise ValueError(f"expected {hex_digits(n)} hex digits for n={n}, got {len(text)}")
    if not _HEX_RE.match(text):
        raise ValueError(f"non-hex characters in {text!r}")
    if n < 3:
        return BooleanFunction.from_int(n, int(text, 16))
    raw = bytes.fromhex(text)[::-1]
    if n < 6:
        raw = raw + bytes(8 - len(raw))
    return BooleanFunction(n, np.frombuffer(raw, dtype="<u8"))


# --------------------------------------------------------------------------
# JSON function files


def function_to_json(f: BooleanFunction | RealFunction | SymmetricProfile) -> dict:
    if isinstance(f, BooleanFunction):
        return {"n": f.n, "kind": "boolean", "bits_hex": encode_hex(f)}
    if isinstance(f, RealFunction):
        return {"n": f.n, "kind": "real", "values": f.values.tolist()}
    if isinstance(f, SymmetricProfile):
        return {"n": f.n, "kind": "symmetric", "levels": f.float_levels().tolist()}
    raise TypeError(f"cannot serialise {type(f).__name__}")


def function_from_json(doc: dict) -> BooleanFunction | RealFunction | SymmetricProfile:
    try:
        n = int(doc["n"])
        kind = doc["kind"]
    except KeyError as exc:
        raise ValueError(f"function document missing field {exc}") from None
    if kind == "boolean":
        return decode_hex(n, doc["bits_hex"])
    if kind == "real":
        return RealFunction(n, np.asarray(doc["values"], dtype=np.float64))
    if kind == "symmetric":
        return SymmetricProfile(n, tuple(doc["levels"]), "logfloat")
    raise ValueError(f"unknown function kind {kind!r}")


def save_function(f, path: str | Path, extra: dict | None = None) -> None:
    doc = function_to_json(f)
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_function(path: str | Path):
    return function_from_json(json.loads(Path(path).read_text()))
