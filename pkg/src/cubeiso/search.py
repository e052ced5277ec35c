"""Search engines over spaces of boolean functions.

All scans split the space into fixed-size chunks (independent of the worker
count), evaluate each chunk with the vectorised verifier, and reduce the
chunk results in chunk order.  The reduction keeps the minimal ratio and
breaks ties by the smallest encoding, so results do not depend on how many
threads did the work.
"""

from __future__ import annotations

import csv
import functools
import io
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from . import analysis as an
from .core import (
    BooleanFunction,
    CoordinateOrdering,
    ProductMeasure,
    encode_hex,
)
from .inequalities import (
    CONJECTURES,
    GROUP_INVARIANT,
    REPORT_ONLY,
    Ineq,
    evaluate,
    verify,
)

CHUNK = 1 << 13
MAX_MONOTONE_N = 6
MAX_LOCAL_N = 20
FRONTIER_COLUMNS = ("encoding_hex", "mu", "sum_I", "sum_I2", "lhs", "rhs", "ratio")
DEDEKIND = {0: 2, 1: 3, 2: 6, 3: 20, 4: 168, 5: 7581, 6: 7828354}


class SpaceTooLarge(ValueError):
    """The requested exhaustive space needs an explicit long-run override."""


# ---------------------------------------------------------------------------
# tables from codes


def tables_from_codes(codes: np.ndarray, n: int) -> np.ndarray:
    """(B, 2^n) 0/1 tables of functions given by integer codes (n <= 6)."""
    codes = np.asarray(codes, dtype=np.uint64)
    shifts = np.arange(1 << n, dtype=np.uint64)
    return ((codes[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)


def code_of_table(table: np.ndarray) -> int:
    return BooleanFunction.from_table(table).to_int()


# ---------------------------------------------------------------------------
# monotone functions


def monotone_codes(n: int) -> np.ndarray:
    """Codes of all monotone functions on n variables, ascending.

    A function on n variables splits on coordinate n into (f0, f1) on n-1
    variables and is monotone iff both halves are and f0 <= f1 pointwise.
    """
    if n < 0 or n > MAX_MONOTONE_N:
        raise ValueError(f"monotone enumeration supports 0 <= n <= {MAX_MONOTONE_N}")
    codes = np.array([0, 1], dtype=np.uint64)  # n = 0: constants
    for k in range(1, n + 1):
        half = np.uint64(1 << (k - 1))
        out = []
        for lo in np.array_split(codes, max(1, len(codes) // 2048)):
            ok = (lo[:, None] & ~codes[None, :]) == 0
            i, j = np.nonzero(ok)
            out.append(lo[i] | (codes[j] << half))
        codes = np.sort(np.concatenate(out))
    return codes


def enumerate_monotone(n: int) -> Iterator[BooleanFunction]:
    """Every monotone boolean function on n >= 1 variables, once each, by code."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    for c in monotone_codes(n):
        yield BooleanFunction.from_int(n, int(c))


def is_monotone_table(tables: np.ndarray) -> np.ndarray:
    n = tables.shape[-1].bit_length() - 1
    ok = np.ones(tables.shape[:-1], dtype=bool)
    for i in range(n):
        h = 1 << i
        v = tables.reshape(tables.shape[:-1] + (-1, 2, h))
        ok &= (v[..., 0, :] <= v[..., 1, :]).all(axis=(-1, -2))
    return ok


# ---------------------------------------------------------------------------
# canonical forms


@functools.lru_cache(maxsize=None)
def _perm_index_maps(n: int) -> np.ndarray:
    """For every permutation pi, the map x -> pi.x on point indices."""
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> np.arange(n)) & 1
    maps = []
    for perm in itertools.permutations(range(n)):
        # bit k of the new point is bit perm[k] of the old one
        maps.append((bits[:, list(perm)] << np.arange(n)).sum(axis=1))
    out = np.array(maps, dtype=np.int32)
    out.setflags(write=False)
    return out


def canonicalize(f: BooleanFunction) -> BooleanFunction:
    """Least encoding over coordinate permutations and input complementations.

    The hex encoding compares like the integer code, whose most significant
    bit is f(1...1).  Writing the candidate as s(y) = f(pi.y xor v) read at
    y = 0, 1, 2, ... (with v absorbing the complement of all inputs), the
    least code is the lexicographically least sequence s.  Candidates are
    pruned block by block; duplicate permuted tables are merged first.
    """
    n = f.n
    if n > 8:
        raise ValueError("canonical forms are computed for n <= 8")
    N = 1 << n
    t = f.table()
    permuted = t[_perm_index_maps(n)]  # (n!, N)
    packed = np.ascontiguousarray(np.packbits(permuted, axis=1))
    _, first = np.unique(packed.view(np.dtype((np.void, packed.shape[1]))), return_index=True)
    tables = permuted[np.sort(first)]
    full = N - 1
    vs = np.arange(N) ^ full
    cand_t = np.repeat(np.arange(len(tables)), N)
    cand_v = np.tile(vs, len(tables))
    y0 = 0
    block = 8
    while y0 < N and len(cand_t) > 1:
        ys = np.arange(y0, min(N, y0 + block))
        seq = tables[cand_t[:, None], ys[None, :] ^ cand_v[:, None]]
        keys = (seq.astype(np.uint64) << np.arange(len(ys) - 1, -1, -1, dtype=np.uint64)).sum(axis=1)
        keep = keys == keys.min()
        cand_t, cand_v = cand_t[keep], cand_v[keep]
        y0 += len(ys)
        block = min(64, block * 2)
    seq = tables[cand_t[0], np.arange(N) ^ cand_v[0]]
    return BooleanFunction.from_table(seq[::-1].copy())


# ---------------------------------------------------------------------------
# results


@dataclass
class SearchResult:
    id: str
    n: int
    space: str
    best_ratio: float | None
    witness: dict | None
    functions_scanned: int
    functions_evaluated: int
    violations: int
    discovery: bool
    canonicalization: bool
    tol: float
    measure: str = "uniform"
    ordering: str | None = None
    local_minimal: bool | None = None
    first_violation: str | None = None
    duration: float = 0.0
    frontier: list = field(default_factory=list, repr=False)

    @property
    def report_only(self) -> bool:
        return Ineq(self.id) in REPORT_ONLY

    @property
    def hard_violation(self) -> bool:
        """A violation that should make a scripted run exit 1."""
        return self.violations > 0 and not self.report_only

    def to_json(self, include_duration: bool = False) -> dict:
        doc = asdict(self)
        doc.pop("frontier")
        if not include_duration:
            doc.pop("duration")
        if doc["best_ratio"] is not None and not math.isfinite(doc["best_ratio"]):
            doc["best_ratio"] = None
        return doc

    def dumps(self, include_duration: bool = False) -> str:
        return json.dumps(self.to_json(include_duration), sort_keys=True, indent=2)

    def frontier_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FRONTIER_COLUMNS)
        for row in self.frontier:
            w.writerow([row[c] if not isinstance(row[c], float) else repr(row[c]) for c in FRONTIER_COLUMNS])
        return buf.getvalue()


@dataclass
class _ChunkResult:
    scanned: int = 0
    evaluated: int = 0
    violations: int = 0
    best_ratio: float = math.inf
    best_code: int | None = None
    first_violation: int | None = None
    frontier: dict = field(default_factory=dict)  # weight -> (ratio, code, lhs, rhs)

    def merge(self, other: "_ChunkResult") -> None:
        self.scanned += other.scanned
        self.evaluated += other.evaluated
        self.violations += other.violations
        if other.best_code is not None and _better(other.best_ratio, other.best_code, self.best_ratio, self.best_code):
            self.best_ratio, self.best_code = other.best_ratio, other.best_code
        if other.first_violation is not None and (
            self.first_violation is None or other.first_violation < self.first_violation
        ):
            self.first_violation = other.first_violation
        for k, v in other.frontier.items():
            cur = self.frontier.get(k)
            if cur is None or _better(v[0], v[1], cur[0], cur[1]):
                self.frontier[k] = v


def _better(r1, c1, r2, c2) -> bool:
    if c2 is None:
        return True
    return r1 < r2 or (r1 == r2 and c1 < c2)


def _eval_chunk(ident, tables, codes, mu, ordering, tol, constant, frontier) -> _ChunkResult:
    out = _ChunkResult(scanned=len(codes))
    vals = tables.astype(np.float64)
    nonconst = ~(tables == tables[:, :1]).all(axis=1)
    ev = evaluate(ident, vals, mu, ordering=ordering, tol=tol, constant=constant)
    valid = nonconst & ev.valid
    if not valid.any():
        return out
    idx = np.flatnonzero(valid)
    ratio = ev.ratio[idx]
    sat = ev.satisfied[idx]
    out.evaluated = int(len(idx))
    out.violations = int((~sat).sum())
    if out.violations:
        out.first_violation = min(int(codes[k]) for k in idx[~sat])
    best = ratio.min()
    ties = idx[ratio == best]
    out.best_ratio = float(best)
    out.best_code = min(int(codes[k]) for k in ties)
    if frontier:
        weights = tables[idx].sum(axis=1)
        for w in np.unique(weights):
            sel = weights == w
            r = ratio[sel]
            b = r.min()
            kk = idx[sel][r == b]
            code = min(int(codes[k]) for k in kk)
            pos = next(k for k in kk if int(codes[k]) == code)
            out.frontier[int(w)] = (float(b), code, float(ev.lhs[pos]), float(ev.rhs[pos]))
    return out


def _run_chunks(ident, chunks, mu, ordering, tol, constant, threads, frontier) -> _ChunkResult:
    def work(chunk):
        tables, codes = chunk()
        return _eval_chunk(ident, tables, codes, mu, ordering, tol, constant, frontier)

    total = _ChunkResult()
    if threads <= 1:
        for ch in chunks:
            total.merge(work(ch))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for res in pool.map(work, chunks):
                total.merge(res)
    return total


def _witness(ident, n, code, mu, ordering, tol, constant) -> dict:
    f = BooleanFunction.from_int(n, code)
    rep = verify(ident, f, mu, tol=tol, ordering=ordering, constant=constant)
    infl = an.influences(f, mu)
    return {
        "encoding_hex": encode_hex(f),
        "mu": float(an.mean(f, mu)),
        "influences": infl.values.tolist(),
        "sum_I": infl.total(),
        "sum_I2": infl.sum_squares(),
        "lhs": rep.lhs if math.isfinite(rep.lhs) else None,
        "rhs": rep.rhs if math.isfinite(rep.rhs) else None,
        "ratio": rep.ratio if math.isfinite(rep.ratio) else None,
        "satisfied": rep.satisfied,
    }


def _frontier_rows(n, front, mu) -> list[dict]:
    rows = []
    for w in sorted(front):
        ratio, code, lhs, rhs = front[w]
        f = BooleanFunction.from_int(n, code)
        infl = an.influences(f, mu)
        rows.append(
            {
                "encoding_hex": encode_hex(f),
                "mu": float(an.mean(f, mu)),
                "sum_I": infl.total(),
                "sum_I2": infl.sum_squares(),
                "lhs": lhs,
                "rhs": rhs,
                "ratio": ratio,
            }
        )
    return rows


def _code_chunks(codes_or_range, n: int):
    """Lazily materialised (tables, codes) chunks of a code range or array."""
    if isinstance(codes_or_range, range):
        r = codes_or_range
        for start in range(r.start, r.stop, CHUNK):
            stop = min(r.stop, start + CHUNK)

            def make(start=start, stop=stop):
                codes = np.arange(start, stop, dtype=np.uint64)
                return tables_from_codes(codes, n), codes

            yield make
    else:
        arr = codes_or_range
        for start in range(0, len(arr), CHUNK):
            part = arr[start : start + CHUNK]

            def make(part=part):
                return tables_from_codes(part, n), part

            yield make


def _finish(ident, n, space, total, mu, ordering, tol, constant, canonical, t0, frontier) -> SearchResult:
    witness = None
    best = None
    if total.best_code is not None:
        code = total.best_code
        best = total.best_ratio
        if canonical:
            if ident not in GROUP_INVARIANT or not mu.is_uniform:
                raise ValueError(f"{ident.value} is not invariant under the cube symmetry group")
            code = canonicalize(BooleanFunction.from_int(n, code)).to_int()
        witness = _witness(ident, n, code, mu, ordering, tol, constant)
    first = None
    if total.first_violation is not None:
        first = encode_hex(BooleanFunction.from_int(n, total.first_violation))
    nat = ordering.perm == tuple(range(1, n + 1))
    return SearchResult(
        id=ident.value,
        n=n,
        space=space,
        best_ratio=best,
        witness=witness,
        functions_scanned=total.scanned,
        functions_evaluated=total.evaluated,
        violations=total.violations,
        discovery=bool(total.violations and ident in CONJECTURES),
        canonicalization=canonical,
        tol=tol,
        measure=mu.summary(),
        ordering=None if nat else ordering.render(),
        first_violation=first,
        duration=time.perf_counter() - t0,
        frontier=_frontier_rows(n, total.frontier, mu) if frontier else [],
    )


def exhaustive_search(
    id,
    n: int,
    space: str = "all",
    *,
    mu: ProductMeasure | None = None,
    ordering: CoordinateOrdering | None = None,
    tol: float = 1e-9,
    constant: float | None = None,
    threads: int = 1,
    canonical: bool = False,
    long_run: bool = False,
    frontier: bool = True,
    seed: int | None = None,
    count: int | None = None,
) -> SearchResult:
    """Minimise lhs/rhs of an inequality over a space of boolean functions.

    Spaces: ``all`` (n <= 4, n = 5 with ``long_run``), ``monotone`` (n <= 6),
    ``balanced`` (|A| = 2^(n-1), n <= 4 or ``long_run``), and ``random``
    (``count`` uniform tables drawn from ``seed``).  Constant functions are
    counted as scanned but skipped as degenerate, as are functions outside
    the id's preconditions (e.g. mu > 1/2 for EDGE_ISO).
    """
    ident = Ineq.parse(id)
    if n < 1:
        raise ValueError("dimension must be at least 1")
    mu = mu or ProductMeasure.uniform(n)
    ordering = ordering or CoordinateOrdering.natural(n)
    t0 = time.perf_counter()
    if space == "all":
        if n > 5 or (n == 5 and not long_run):
            raise SpaceTooLarge(f"space 'all' at n={n} has 2^{1 << n} functions; n=5 needs long_run")
        chunks = _code_chunks(range(0, 1 << (1 << n)), n)
    elif space == "monotone":
        chunks = _code_chunks(monotone_codes(n), n)
    elif space == "balanced":
        if n > 5 or (n == 5 and not long_run):
            raise SpaceTooLarge(f"balanced space at n={n} needs long_run")
        half = 1 << (n - 1)
        codes = np.array(
            [sum(1 << i for i in c) for c in itertools.combinations(range(1 << n), half)],
            dtype=np.uint64,
        )
        chunks = _code_chunks(codes, n)
    elif space == "random":
        if seed is None or count is None:
            raise ValueError("random space needs seed and count")
        if n > MAX_LOCAL_N:
            raise ValueError(f"random space supports n <= {MAX_LOCAL_N}")
        chunks = _random_chunks(n, seed, count)
        space = f"random(seed={seed},count={count})"
    else:
        raise ValueError(f"unknown space {space!r}")
    total = _run_chunks(ident, chunks, mu, ordering, tol, constant, threads, frontier)
    return _finish(ident, n, space, total, mu, ordering, tol, constant, canonical, t0, frontier)


def _random_chunks(n: int, seed: int, count: int):
    size = max(1, CHUNK >> max(0, n - 8))
    for k, start in enumerate(range(0, count, size)):
        m = min(size, count - start)

        def make(k=k, m=m):
            rng = np.random.default_rng([seed, k])
            tables = rng.integers(0, 2, size=(m, 1 << n), dtype=np.uint8)
            codes = [code_of_table(t) for t in tables]
            return tables, codes

        yield make


# ---------------------------------------------------------------------------
# local search


def _ratios(ident, tables, mu, ordering, tol, constant) -> np.ndarray:
    ev = evaluate(ident, tables.astype(np.float64), mu, ordering=ordering, tol=tol, constant=constant)
    r = ev.ratio.copy()
    bad = (tables == tables[:, :1]).all(axis=1) | ~ev.valid | np.isnan(r)
    r[bad] = np.inf
    return r


def local_search(
    id,
    n: int,
    seed: int,
    restarts: int = 1,
    steps: int = 100,
    *,
    start: BooleanFunction | None = None,
    mu: ProductMeasure | None = None,
    ordering: CoordinateOrdering | None = None,
    tol: float = 1e-9,
    constant: float | None = None,
    max_neighbors: int = 4096,
) -> SearchResult:
    """Steepest-descent hill climbing on single-entry truth-table flips.

    The first climb starts from ``start`` (or a random table drawn from
    ``seed``), later climbs from fresh random tables.  ``restarts=0``
    evaluates the start function only.  When 2^n exceeds ``max_neighbors``
    each step scans a seeded random subset of the neighbours.
    """
    ident = Ineq.parse(id)
    if not 1 <= n <= MAX_LOCAL_N:
        raise ValueError(f"local search supports 1 <= n <= {MAX_LOCAL_N}")
    mu = mu or ProductMeasure.uniform(n)
    ordering = ordering or CoordinateOrdering.natural(n)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    N = 1 << n
    if start is not None:
        if start.n != n:
            raise ValueError("start function has the wrong dimension")
        cur0 = start.table().copy()
    else:
        cur0 = rng.integers(0, 2, size=N, dtype=np.uint8)
    best_t = cur0.copy()
    best_r = float(_ratios(ident, cur0[None], mu, ordering, tol, constant)[0])
    scanned = 1
    local_min = None
    for climb in range(restarts):
        cur = cur0.copy() if climb == 0 else rng.integers(0, 2, size=N, dtype=np.uint8)
        cur_r = float(_ratios(ident, cur[None], mu, ordering, tol, constant)[0])
        scanned += 1
        minimal = False
        for _ in range(steps):
            pos = np.arange(N) if N <= max_neighbors else np.sort(rng.choice(N, max_neighbors, replace=False))
            nb = np.repeat(cur[None], len(pos), axis=0)
            nb[np.arange(len(pos)), pos] ^= 1
            r = _ratios(ident, nb, mu, ordering, tol, constant)
            scanned += len(pos)
            k = int(np.argmin(r))
            if not r[k] < cur_r:
                minimal = N <= max_neighbors
                break
            cur = nb[k]
            cur_r = float(r[k])
        if climb == 0:
            local_min = minimal
        if cur_r < best_r or (cur_r == best_r and code_of_table(cur) < code_of_table(best_t)):
            best_t, best_r = cur.copy(), cur_r
    code = code_of_table(best_t)
    witness = _witness(ident, n, code, mu, ordering, tol, constant)
    violations = 0 if witness["satisfied"] else 1
    nat = ordering.perm == tuple(range(1, n + 1))
    return SearchResult(
        id=ident.value,
        n=n,
        space=f"local(seed={seed},restarts={restarts})",
        best_ratio=best_r if math.isfinite(best_r) else None,
        witness=witness,
        functions_scanned=scanned,
        functions_evaluated=scanned,
        violations=violations,
        discovery=bool(violations and ident in CONJECTURES),
        canonicalization=False,
        tol=tol,
        measure=mu.summary(),
        ordering=None if nat else ordering.render(),
        local_minimal=local_min,
        first_violation=witness["encoding_hex"] if violations else None,
        duration=time.perf_counter() - t0,
    )


def neighborhood_min(
    id,
    f: BooleanFunction,
    *,
    mu: ProductMeasure | None = None,
    ordering: CoordinateOrdering | None = None,
    tol: float = 1e-9,
    constant: float | None = None,
) -> tuple[float, BooleanFunction]:
    """Smallest ratio among all single-entry flips of f, with the neighbour attaining it.

    Ties go to the lowest flipped point.  Used to report local
    minimality claims such as "no neighbour drops below 1".
    """
    ident = Ineq.parse(id)
    n = f.n
    if n > MAX_LOCAL_N:
        raise ValueError(f"neighbourhood scans support n <= {MAX_LOCAL_N}")
    mu = mu or ProductMeasure.uniform(n)
    ordering = ordering or CoordinateOrdering.natural(n)
    base = f.table()
    N = 1 << n
    nb = np.repeat(base[None], N, axis=0)
    nb[np.arange(N), np.arange(N)] ^= 1
    r = _ratios(ident, nb, mu, ordering, tol, constant)
    k = int(np.argmin(r))
    return float(r[k]), BooleanFunction.from_table(nb[k])
