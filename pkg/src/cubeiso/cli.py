"""Command-line front end.

Exit codes: 0 when everything checked holds (or is report-only), 1 when a
proven inequality fails or a conjecture counterexample is found, 2 on
usage, parse, precondition, or capacity errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as an
from . import constructions as cons
from .core import (
    BooleanFunction,
    CapExceeded,
    CoordinateOrdering,
    ProductMeasure,
    SymmetricProfile,
    decode_hex,
    dense_cap,
    function_to_json,
    load_function,
    save_function,
    set_dense_cap,
)
from .inequalities import (
    PreconditionError,
    reports_to_csv,
    scalar_checks,
    verify,
)
from .junta import extract_junta, stability_probe
from .search import SpaceTooLarge, exhaustive_search, local_search
from .spectral import fwht

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2

PARAM_ORDER = ("n", "t", "r", "b", "s", "seed", "density", "bits", "path")
FAMILY_KEYS = {
    "subcube": ({"n", "t"}, {"n", "t"}),
    "dictator": ({"n"}, {"n"}),
    "parity": ({"n"}, {"n"}),
    "ball": ({"n", "r"}, {"n", "r"}),
    "majority": ({"n"}, {"n"}),
    "tribes": ({"n", "b"}, {"n", "b"}),
    "krawchouk": ({"n", "s"}, {"n", "s"}),
    "random-boolean": ({"n", "seed", "density"}, {"n", "seed"}),
    "hex": ({"n", "bits"}, {"n", "bits"}),
    "file": ({"path"}, {"path"}),
}
INT_KEYS = {"n", "t", "r", "b", "s", "seed"}


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class FunctionSpec:
    """``family:key=value,...`` description of a function."""

    family: str
    params: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "FunctionSpec":
        family, _, rest = text.strip().partition(":")
        family = family.strip().lower()
        if family not in FAMILY_KEYS:
            raise SpecError(f"unknown function family {family!r}")
        allowed, required = FAMILY_KEYS[family]
        params: dict = {}
        if rest:
            for item in rest.split(","):
                key, eq, value = item.partition("=")
                key = key.strip()
                if not eq or not key:
                    raise SpecError(f"malformed parameter {item!r} (expected key=value)")
                if key not in allowed:
                    raise SpecError(f"unknown key {key!r} for family {family!r}")
                if key in params:
                    raise SpecError(f"duplicate key {key!r}")
                params[key] = _coerce(key, value.strip())
        missing = required - params.keys()
        if missing:
            raise SpecError(f"family {family!r} needs {', '.join(sorted(missing))}")
        return cls(family, params)

    def render(self) -> str:
        items = [f"{k}={_fmt(self.params[k])}" for k in PARAM_ORDER if k in self.params]
        return self.family + (":" + ",".join(items) if items else "")

    def build(self):
        p = self.params
        fam = self.family
        if fam == "subcube":
            return cons.subcube(p["n"], p["t"])
        if fam == "dictator":
            return cons.dictator(p["n"])
        if fam == "parity":
            return cons.parity(p["n"])
        if fam == "ball":
            return cons.hamming_ball(p["n"], p["r"])
        if fam == "majority":
            return cons.majority(p["n"])
        if fam == "tribes":
            return cons.tribes(p["n"], p["b"])
        if fam == "krawchouk":
            return cons.krawchouk_build(p["n"], p["s"]).f
        if fam == "random-boolean":
            n = p["n"]
            density = p.get("density", 0.5)
            if not 0.0 <= density <= 1.0:
                raise SpecError("density must lie in [0,1]")
            rng = np.random.default_rng(p["seed"])
            return BooleanFunction.from_table((rng.random(1 << n) < density).astype(np.uint8))
        if fam == "hex":
            return decode_hex(p["n"], p["bits"])
        if fam == "file":
            return load_function(p["path"])
        raise SpecError(fam)  # pragma: no cover


def _coerce(key: str, value: str):
    try:
        if key in INT_KEYS:
            return int(value)
        if key == "density":
            return float(value)
    except ValueError:
        raise SpecError(f"parameter {key} expects a number, got {value!r}") from None
    if key == "bits" and not re.fullmatch(r"(0x)?[0-9A-Fa-f]+", value):
        raise SpecError(f"bits must be hexadecimal, got {value!r}")
    return value


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


# ---------------------------------------------------------------------------
# helpers


def _measure(args, n: int) -> ProductMeasure:
    if getattr(args, "measure", None):
        probs = tuple(float(x) for x in args.measure.split(","))
        mu = ProductMeasure(probs)
        if mu.n != n:
            raise ValueError(f"--measure lists {mu.n} probabilities for n={n}")
        return mu
    if getattr(args, "p", None) is not None:
        return ProductMeasure.biased(n, args.p)
    return ProductMeasure.uniform(n)


def _ordering(args, n: int) -> CoordinateOrdering | None:
    if getattr(args, "ordering", None):
        o = CoordinateOrdering.parse(args.ordering)
        if o.n != n:
            raise ValueError(f"ordering has {o.n} entries for n={n}")
        return o
    return None


def _emit(doc, args, text: str | None = None) -> None:
    out = text if text is not None else json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)
    if getattr(args, "out", None):
        Path(args.out).write_text(out + ("" if out.endswith("\n") else "\n"))
    else:
        sys.stdout.write(out + ("" if out.endswith("\n") else "\n"))


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    spec = FunctionSpec.parse(args.spec)
    f = spec.build()
    if isinstance(f, SymmetricProfile):
        f = f.dense()
    n = f.n
    mu = _measure(args, n)
    ordering = _ordering(args, n) or CoordinateOrdering.natural(n)
    infl = an.influences(f, mu)
    k = int(np.argmax(infl.values))
    mart = an.martingale(f, mu, ordering)
    doc = {
        "function": spec.render(),
        "n": n,
        "measure": mu.summary(),
        "mu": an.mean(f, mu),
        "sigma2": an.variance(f, mu),
        "influences": infl.values.tolist(),
        "influence_flavor": infl.flavor,
        "sum_I": infl.total(),
        "sum_I2": infl.sum_squares(),
        "max_influence": {"index": k + 1, "value": float(infl.values[k])},
        "dirichlet": an.dirichlet_form(f, mu),
        "martingale": {
            "ordering": ordering.render(),
            "E_abs_d": mart.abs_means.tolist(),
            "E_d2": mart.square_means.tolist(),
            "sum_E2_abs_d": float((mart.abs_means**2).sum()),
        },
    }
    if isinstance(f, BooleanFunction):
        doc["bits_hex"] = function_to_json(f)["bits_hex"]
    if mu.is_uniform and n <= dense_cap():
        doc["fourier_level_weights"] = fwht(f).level_weights().tolist()
    _emit(doc, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = FunctionSpec.parse(args.spec)
    f = spec.build()
    if isinstance(f, SymmetricProfile):
        f = f.dense()
    n = f.n
    rep = verify(
        args.id,
        f,
        _measure(args, n),
        tol=args.tol,
        ordering=_ordering(args, n),
        constant=args.constant,
        eps=args.eps,
        split=args.split,
        label=spec.render(),
    )
    if args.format == "csv":
        _emit(None, args, reports_to_csv([rep]))
    else:
        _emit(rep.to_json(), args)
    return EXIT_VIOLATION if rep.violated else EXIT_OK


def cmd_scalars(args) -> int:
    rep = scalar_checks(args.id, resolution=args.resolution)
    _emit(rep.to_json(), args)
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def cmd_search(args) -> int:
    n = args.n
    mu = _measure(args, n)
    ordering = _ordering(args, n)
    if args.space == "local":
        if args.seed is None:
            raise ValueError("--seed is required for local search")
        start = None
        if args.start:
            start = FunctionSpec.parse(args.start).build()
            if not isinstance(start, BooleanFunction):
                raise ValueError("--start must describe a boolean function")
        res = local_search(
            args.id,
            n,
            args.seed,
            args.restarts,
            args.steps,
            start=start,
            mu=mu,
            ordering=ordering,
            tol=args.tol,
            constant=args.constant,
        )
    else:
        if args.space == "random" and args.seed is None:
            raise ValueError("--seed is required for the random space")
        res = exhaustive_search(
            args.id,
            n,
            args.space,
            mu=mu,
            ordering=ordering,
            tol=args.tol,
            constant=args.constant,
            threads=args.threads,
            canonical=args.canonical,
            long_run=args.long_run,
            seed=args.seed,
            count=args.count,
        )
    if args.frontier:
        Path(args.frontier).write_text(res.frontier_csv())
    _emit(None, args, res.dumps(include_duration=args.timing))
    return EXIT_VIOLATION if res.hard_violation else EXIT_OK


def cmd_construct(args) -> int:
    spec = FunctionSpec.parse(args.spec)
    if spec.family == "krawchouk":
        build = cons.krawchouk_build(spec.params["n"], spec.params["s"], args.mode)
        report = cons.near_tightness_report(build.n, build.s, args.mode)
        extra = {"diagnostics": build.diagnostics(), "near_tightness": report.to_json()}
        f = build.f
    else:
        f = spec.build()
        extra = {}
    extra["spec"] = spec.render()
    doc = function_to_json(f)
    doc.update(extra)
    if args.out:
        save_function(f, args.out, extra)
        summary = {k: v for k, v in doc.items() if k not in ("bits_hex", "values", "levels")}
        summary["out"] = str(args.out)
        sys.stdout.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    else:
        _emit(doc, args)
    return EXIT_OK


def cmd_junta(args) -> int:
    spec = FunctionSpec.parse(args.spec)
    f = spec.build()
    if not isinstance(f, BooleanFunction):
        raise ValueError("junta commands need a boolean function")
    if args.probe:
        _emit(stability_probe(f, args.eps, args.delta).to_json(), args)
    else:
        res = extract_junta(f, args.eps, args.delta)
        doc = res.to_json()
        doc["function"] = spec.render()
        _emit(doc, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_measure(p) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", type=float, help="common bias Pr[x_i = 1] of a product measure")
    g.add_argument("--measure", help="comma-separated per-coordinate biases p_1,...,p_n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cubeiso", description="Edge-isoperimetric analysis of functions on the discrete cube."
    )
    parser.add_argument("--dense-cap", type=_positive_int, help="largest n for dense real tables")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="influences, moments, Fourier levels, martingale stats")
    a.add_argument("spec")
    _add_measure(a)
    a.add_argument("--ordering")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="check one inequality or identity on one function")
    v.add_argument("id")
    v.add_argument("spec")
    _add_measure(v)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--ordering")
    v.add_argument("--constant", type=float, help="override the constant of the statement")
    v.add_argument("--eps", type=float, help="noise rate for BONAMI")
    v.add_argument("--split", type=int, help="split coordinate for half-cube ids")
    v.add_argument("--format", choices=("json", "csv"), default="json")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    sc = sub.add_parser("scalars", help="grid checks of the one-variable scalar inequalities")
    sc.add_argument("id", choices=("APPA_SCALARS", "APPB_SCALARS"), type=str.upper)
    sc.add_argument("--resolution", type=int, default=100)
    sc.add_argument("--out")
    sc.set_defaults(func=cmd_scalars)

    s = sub.add_parser("search", help="extremise an inequality over a space of boolean functions")
    s.add_argument("id")
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--space", choices=("all", "monotone", "balanced", "random", "local"), default="all")
    _add_measure(s)
    s.add_argument("--ordering")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--constant", type=float)
    s.add_argument("--threads", type=_positive_int, default=1)
    s.add_argument("--canonical", action="store_true", help="report the canonical form of the witness")
    s.add_argument("--long-run", action="store_true", help="allow n=5 exhaustive spaces")
    s.add_argument("--seed", type=int)
    s.add_argument("--count", type=_positive_int, default=1000, help="sample size for --space random")
    s.add_argument("--restarts", type=int, default=1)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--start", help="function spec to start local search from")
    s.add_argument("--frontier", help="write the min-ratio frontier CSV here")
    s.add_argument("--timing", action="store_true", help="include wall-clock duration in the JSON")
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    c = sub.add_parser("construct", help="build a named function and write the JSON function file")
    c.add_argument("spec")
    c.add_argument("--mode", choices=("exact", "logfloat"), default="exact")
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)

    j = sub.add_parser("junta", help="junta extraction or the stability probe")
    j.add_argument("spec")
    j.add_argument("--eps", type=float, required=True)
    j.add_argument("--delta", type=float, default=0.5)
    j.add_argument("--probe", action="store_true", help="run the stability probe instead")
    j.add_argument("--out")
    j.set_defaults(func=cmd_junta)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    previous_cap = dense_cap()
    try:
        if args.dense_cap:
            set_dense_cap(args.dense_cap)
        return args.func(args)
    except (SpecError, PreconditionError, CapExceeded, SpaceTooLarge, ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    finally:
        set_dense_cap(previous_cap)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
