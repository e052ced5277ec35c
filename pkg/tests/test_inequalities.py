from __future__ import annotations

import csv
import io
import math

import jsonschema
import numpy as np
import pytest

from cubeiso import analysis as an
from cubeiso.constructions import dictator, majority, parity, subcube, tribes
from cubeiso.core import BooleanFunction, CoordinateOrdering, ProductMeasure, RealFunction
from cubeiso.inequalities import (
    IDENTITIES,
    PROVEN,
    REPORT_FIELDS,
    REPORT_ONLY,
    Ineq,
    InequalityReport,
    PreconditionError,
    evaluate,
    kkl_max_influence,
    log_sobolev_constant,
    reports_to_csv,
    scalar_checks,
    two_point_constant,
    verify,
)
from cubeiso.schemas import load_schema

LN2 = math.log(2.0)
UNIFORM_ONLY = {
    Ineq.EDGE_ISO,
    Ineq.KKL_SUM,
    Ineq.KKL_ASYMPTOTIC,
    Ineq.TALAGRAND,
    Ineq.CNJ_BOOL,
    Ineq.CNJ_SOB,
    Ineq.BONAMI,
    Ineq.LOG_SOB_MARTINGALE,
}


def all_tables(n):
    codes = np.arange(1 << (1 << n), dtype=np.uint64)
    return ((codes[:, None] >> np.arange(1 << n, dtype=np.uint64)) & np.uint64(1)).astype(np.float64)


class TestExamples:
    def test_edge_iso_dictator(self):
        r = verify("EDGE_ISO", dictator(8))
        assert (r.lhs, r.rhs, r.ratio) == (1.0, 1.0, 1.0)
        assert r.satisfied

    def test_kkl_sum_subcube(self):
        r = verify("KKL_SUM", subcube(8, 3))
        assert r.lhs == 0.1875
        assert r.rhs == pytest.approx(7 / 16 * math.exp(-24 / 7), rel=1e-14)
        assert r.rhs == pytest.approx(0.01419, abs=1e-5)
        assert r.satisfied

    def test_energy_add_random_real(self, rng):
        r = verify("ENERGY_ADD", RealFunction(6, rng.normal(size=64)))
        assert abs(r.slack) <= 1e-10 * r.lhs
        assert r.satisfied

    def test_cnj_bool_subcube(self):
        t = 10
        r = verify("CNJ_BOOL", subcube(12, t))
        infl = 2.0 ** (1 - t)
        var = 2.0**-t * (1 - 2.0**-t)
        lhs = t * infl * infl
        rhs = 4 * var * math.exp(-(LN2 / 2) * t * infl / var)
        assert r.lhs == pytest.approx(lhs, rel=1e-13)
        assert r.rhs == pytest.approx(rhs, rel=1e-12)
        assert r.ratio == pytest.approx(t, rel=1e-2)

    def test_bonami_default_eps(self, rng):
        r = verify("BONAMI", RealFunction(5, rng.normal(size=32)))
        assert r.context["eps"] == pytest.approx(1 / math.sqrt(3), rel=1e-15)
        assert r.satisfied


class TestLogSobolevConstant:
    def test_uniform_is_two(self):
        assert log_sobolev_constant(ProductMeasure.uniform(3)) == 2.0
        assert two_point_constant(0.5) == 2.0

    def test_bias_point_one(self):
        assert two_point_constant(0.1) == pytest.approx((0.8 / 0.09) / math.log(9), rel=1e-14)

    def test_small_bias_asymptotics(self):
        p = 1e-6
        assert two_point_constant(p) * p * math.log(1 / p) == pytest.approx(1.0, abs=1e-2)

    def test_symmetric_in_p(self):
        assert two_point_constant(0.2) == pytest.approx(two_point_constant(0.8), rel=1e-14)

    def test_mixed_takes_minimum(self):
        mu = ProductMeasure((0.5, 0.1, 0.3))
        assert log_sobolev_constant(mu) == min(two_point_constant(p) for p in mu.p)

    @pytest.mark.parametrize("p", [0.0, 1.0, 1.2])
    def test_rejects_bad_bias(self, p):
        with pytest.raises(ValueError):
            two_point_constant(p)


class TestMaxInfluence:
    def test_dictator(self):
        assert tuple(kkl_max_influence(dictator(6))) == (1, 1.0)

    def test_subcube(self):
        assert tuple(kkl_max_influence(subcube(8, 3))) == (1, 0.25)

    def test_tribes(self):
        m = kkl_max_influence(tribes(6, 2))
        assert (m.index, m.value) == (1, 9 / 32)

    def test_constant_is_degenerate(self):
        assert kkl_max_influence(BooleanFunction.from_int(3, 0)).degenerate


class TestExhaustiveSmall:
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("ident", sorted(PROVEN - IDENTITIES, key=lambda i: i.value))
    def test_proven_hold_on_every_function(self, ident, n):
        ev = evaluate(ident, all_tables(n))
        ok = ev.satisfied | ~ev.valid
        assert ok.all(), np.flatnonzero(~ok)[:5]

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("ident", sorted(IDENTITIES, key=lambda i: i.value))
    def test_identities_on_every_function(self, ident, n):
        assert evaluate(ident, all_tables(n)).satisfied.all()


class TestDegenerate:
    @pytest.mark.parametrize("ident", ["MAIN", "CNJ_BOOL"])
    def test_constant_function(self, ident):
        r = verify(ident, BooleanFunction.from_int(3, 255))
        assert r.lhs == 0.0 and r.rhs == 0.0
        assert r.degenerate is not None and r.satisfied

    def test_func_iso_zero_function(self):
        r = verify("FUNC_ISO", RealFunction.constant(3, 0.0))
        assert r.degenerate is not None and r.satisfied

    def test_zero_martingale_term(self):
        r = verify("CNJ_SOB", dictator(4))
        assert r.context["ent_d2"][1:] == [0.0, 0.0, 0.0]


class TestPreconditions:
    def test_edge_iso_large_measure(self):
        with pytest.raises(PreconditionError):
            verify("EDGE_ISO", BooleanFunction.from_int(2, 0b1110))

    @pytest.mark.parametrize("ident", ["EDGE_ISO", "KKL_SUM", "CNJ_BOOL"])
    def test_boolean_only(self, ident):
        with pytest.raises(PreconditionError):
            verify(ident, RealFunction(2, np.array([0.0, 0.5, 0.2, 0.1])))

    @pytest.mark.parametrize("ident", ["FUNC_ISO", "SOB_ISOP"])
    def test_nonnegative_only(self, ident):
        with pytest.raises(PreconditionError):
            verify(ident, RealFunction(1, np.array([-1.0, 1.0])))

    @pytest.mark.parametrize("ident", sorted(UNIFORM_ONLY, key=lambda i: i.value))
    def test_uniform_only(self, ident):
        with pytest.raises(PreconditionError):
            verify(ident, majority(3), ProductMeasure.biased(3, 0.3))

    def test_unknown_id(self):
        with pytest.raises(ValueError):
            verify("NOT_AN_ID", dictator(2))

    def test_dimension_mismatch(self):
        with pytest.raises(PreconditionError):
            verify("MAIN", dictator(3), ProductMeasure.uniform(4))


class TestProperties:
    def test_main_affine_invariance(self, rng):
        for _ in range(50):
            v = rng.normal(size=32)
            mu = ProductMeasure(tuple(rng.uniform(0.1, 0.9, 5)))
            base = verify("MAIN", RealFunction(5, v), mu)
            for a in (2.0, -3.0):
                for b in (0.0, 1.0):
                    r = verify("MAIN", RealFunction(5, a * v + b), mu)
                    assert r.satisfied == base.satisfied
                    assert r.lhs == pytest.approx(a * a * base.lhs, rel=1e-10)
                    assert r.rhs == pytest.approx(a * a * base.rhs, rel=1e-10)

    def test_log_sob_implies_func_iso(self, rng):
        for _ in range(300):
            v = rng.exponential(size=16) * (rng.random(16) < 0.7)
            f = RealFunction(4, v)
            ls = verify("LOG_SOB", f)
            if ls.slack >= 0:
                assert verify("FUNC_ISO", f).slack >= -1e-12

    def test_kkl_from_main(self, rng):
        for _ in range(300):
            f = BooleanFunction.from_table(rng.integers(0, 2, 64, dtype=np.uint8))
            infl = an.influences(f).values
            abs_d = an.martingale(f).abs_means
            assert (abs_d <= infl / 2 + 1e-15).all()
            assert (infl**2).sum() >= 4 * (abs_d**2).sum() - 1e-15

    def test_determinism(self, rng):
        f = RealFunction(6, rng.normal(size=64))
        for ident in ("MAIN", "LOG_SOB", "ENERGY_ADD", "DI_BOUND"):
            assert verify(ident, f).dumps() == verify(ident, f).dumps()

    @pytest.mark.parametrize("ident", ["HALFCUBE_ID", "ENT_DECOMP", "ENERGY_ADD"])
    def test_identities_under_product_measures(self, rng, ident):
        for _ in range(100):
            n = int(rng.integers(2, 8))
            v = rng.exponential(size=1 << n)
            mu = ProductMeasure(tuple(rng.uniform(0.05, 0.95, n)))
            split = int(rng.integers(1, n + 1))
            r = verify(ident, RealFunction(n, v), mu, split=split if ident != "ENERGY_ADD" else None)
            assert abs(r.lhs - r.rhs) <= 1e-10 * max(abs(r.lhs), abs(r.rhs))

    @pytest.mark.parametrize("ident", ["VAR_DIST", "APPB_CS", "DI_BOUND", "LOG_SOB", "MAIN", "SOB_ISOP"])
    def test_product_measure_inequalities(self, rng, ident):
        for _ in range(100):
            n = int(rng.integers(1, 7))
            v = rng.exponential(size=1 << n)
            mu = ProductMeasure(tuple(rng.uniform(0.05, 0.95, n)))
            assert verify(ident, RealFunction(n, v), mu).satisfied

    def test_log_sob_martingale_real(self, rng):
        for _ in range(100):
            assert verify("LOG_SOB_MARTINGALE", RealFunction(5, rng.normal(size=32))).satisfied

    def test_ordering_changes_cnj_sob_rhs_only(self):
        f = BooleanFunction.from_int(3, 0b11101000)
        a = verify("CNJ_SOB", f)
        b = verify("CNJ_SOB", f, ordering=CoordinateOrdering((3, 1, 2)))
        assert a.lhs == b.lhs
        assert b.context["ordering"] == "3,1,2"


class TestReportOnly:
    @pytest.mark.parametrize("ident", sorted(REPORT_ONLY, key=lambda i: i.value))
    def test_never_violated(self, ident):
        f = majority(7)
        r = verify(ident, f, constant=1e6)
        assert r.report_only and not r.violated
        assert r.context["report_only"] is True

    def test_conjecture_flag(self):
        r = verify("CNJ_SOB", BooleanFunction.from_int(3, 1), constant=100.0)
        assert r.conjecture and not r.satisfied and r.violated


class TestSerialisation:
    def test_schema_and_round_trip(self, rng):
        schema = load_schema("report")
        for ident in Ineq:
            f = majority(5)
            mu = None
            r = verify(ident, f, mu)
            jsonschema.validate(r.to_json(), schema)
            back = InequalityReport.from_json(r.to_json())
            assert back.to_json() == r.to_json()

    def test_csv_header(self):
        text = reports_to_csv([verify("MAIN", dictator(3)), verify("KKL_SUM", parity(3))])
        rows = list(csv.reader(io.StringIO(text)))
        head = rows[0]
        assert tuple(head[:8]) == REPORT_FIELDS[:-1]
        assert head[8:] == sorted(head[8:]) and all(k.startswith("context.") for k in head[8:])
        assert len(rows) == 3 and all(len(r) == len(head) for r in rows)

    def test_nonfinite_becomes_null(self):
        r = verify("CNJ_SOB", parity(3))
        assert r.to_json()["ratio"] is None


class TestScalarSuites:
    @pytest.mark.parametrize("ident", ["APPA_SCALARS", "APPB_SCALARS"])
    def test_pass(self, ident):
        rep = scalar_checks(ident)
        assert rep.passed
        assert rep.passed == (rep.worst_violation <= rep.tol)
        jsonschema.validate(rep.to_json(), load_schema("scalar_report"))

    def test_symmetry_point(self):
        rep = scalar_checks("APPA_SCALARS")
        a = next(c for c in rep.checks if c.name == "a_entropy")
        assert a.passed

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            scalar_checks("APPA_SCALARS", resolution=50)

    def test_unknown(self):
        with pytest.raises(ValueError):
            scalar_checks("APPC_SCALARS")
