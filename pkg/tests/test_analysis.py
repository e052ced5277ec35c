from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from cubeiso import analysis as an
from cubeiso.constructions import dictator, parity, subcube, tribes
from cubeiso.core import (
    BooleanFunction,
    CoordinateOrdering,
    ProductMeasure,
    RealFunction,
    restrict_halves,
)


def random_boolean(rng, n):
    return BooleanFunction.from_table(rng.integers(0, 2, 1 << n, dtype=np.uint8))


def random_measure(rng, n):
    return ProductMeasure(tuple(rng.uniform(0.05, 0.95, n)))


class TestInfluences:
    def test_subcube(self):
        assert an.influences(subcube(8, 3)).values.tolist() == [0.25] * 3 + [0.0] * 5

    def test_parity(self):
        assert an.influences(parity(5)).values.tolist() == [1.0] * 5

    def test_tribes(self):
        assert an.influences(tribes(6, 2)).values.tolist() == [9 / 32] * 6

    def test_one_based_indexing(self):
        infl = an.influences(subcube(4, 1))
        assert infl[1] == 1.0 and infl[2] == 0.0

    def test_boolean_and_real_flavors_agree(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 9))
            f = random_boolean(rng, n)
            mu = random_measure(rng, n)
            a = an.influences(f, mu)
            b = an.influences(f.table().astype(np.float64) * 1.0, mu)
            np.testing.assert_allclose(a.values, b.values, rtol=1e-13, atol=1e-15)
            assert ((0 <= a.values) & (a.values <= 1)).all()

    def test_uniform_boolean_is_exact(self, rng):
        for _ in range(100):
            f = random_boolean(rng, 7)
            counts = an.boolean_influence_counts(f)
            assert an.influences(f).values.tolist() == (counts / 128).tolist()

    def test_against_oracle_under_product_measure(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 6))
            v = rng.normal(size=1 << n)
            mu = random_measure(rng, n)
            got = an.influences(RealFunction(n, v), mu).values
            np.testing.assert_allclose(got, oracles.influences_by_flips(v.tolist(), mu.p), rtol=1e-12)


class TestScalars:
    def test_dirichlet_examples(self):
        assert an.dirichlet_form(dictator(5)) == 1.0
        assert an.dirichlet_form(parity(3)) == 3.0
        assert an.dirichlet_form(RealFunction(2, 2.0 * dictator(2).table())) == 4.0

    def test_entropy_examples(self):
        assert an.entropy(RealFunction.constant(3, 2.0)) == pytest.approx(0.0, abs=1e-15)
        assert an.entropy(dictator(3)) == pytest.approx(0.5 * math.log(2), rel=1e-15)

    def test_entropy_lower_bound(self, rng):
        for _ in range(100):
            g = rng.exponential(size=32)
            rhs = g.mean() * math.log(g.mean() / np.sqrt(g).mean() ** 2)
            assert an.entropy(RealFunction(5, g)) >= rhs - 1e-12

    def test_entropy_against_oracle(self, rng):
        v = rng.uniform(0, 3, 16)
        mu = random_measure(rng, 4)
        assert an.entropy(RealFunction(4, v), mu) == pytest.approx(oracles.entropy(v.tolist(), mu.p), rel=1e-12)

    def test_variance_examples(self, rng):
        assert an.variance(RealFunction.constant(4, 3.0)) == 0.0
        assert an.variance(dictator(4)) == 0.25
        for _ in range(20):
            f = random_boolean(rng, 6)
            m = f.mean()
            assert an.variance(f) == pytest.approx(m * (1 - m), abs=1e-15)


class TestMartingale:
    def test_dictator(self):
        m = an.martingale(dictator(3))
        np.testing.assert_array_equal(m.diff(1).values, dictator(3).table() - 0.5)
        assert m.abs_means.tolist() == [0.5, 0.0, 0.0]

    def test_irrelevant_coordinate_has_zero_diff(self, rng):
        f = BooleanFunction.from_predicate(4, lambda x: x[:, 0] ^ (x[:, 1] & x[:, 3]))
        m = an.martingale(f, ordering=CoordinateOrdering((4, 3, 2, 1)))
        assert not m.diff(2).values.any()

    def test_sum_and_orthogonality(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 9))
            v = rng.normal(size=1 << n)
            mu = random_measure(rng, n)
            order = CoordinateOrdering(tuple(int(i) + 1 for i in rng.permutation(n)))
            m = an.martingale(RealFunction(n, v), mu, order)
            total = sum(d.values for d in m.diffs)
            np.testing.assert_allclose(total, v - an.mean(v, mu), atol=1e-10)
            assert m.square_means.sum() == pytest.approx(an.variance(v, mu), rel=1e-10, abs=1e-14)

    def test_measurability(self, rng):
        n = 5
        order = (3, 5, 1, 4, 2)
        m = an.martingale(RealFunction(n, rng.normal(size=32)), ordering=CoordinateOrdering(order))
        for j in range(1, n + 1):
            d = m.diff(j).values
            for i in order[j:]:
                flipped = d[np.arange(32) ^ (1 << (i - 1))]
                np.testing.assert_array_equal(d, flipped)

    def test_against_conditioning_oracle(self, rng):
        n = 4
        v = rng.normal(size=16)
        mu = random_measure(rng, n)
        order = (2, 4, 1, 3)
        m = an.martingale(RealFunction(n, v), mu, CoordinateOrdering(order))
        ref = oracles.martingale_by_conditioning(v.tolist(), mu.p, order)
        for j in range(n):
            np.testing.assert_allclose(m.diff(j + 1).values, ref[j], atol=1e-13)

    def test_energy_additivity(self, rng):
        for _ in range(1000):
            n = int(rng.integers(1, 9))
            v = rng.normal(size=1 << n)
            order = CoordinateOrdering(tuple(int(i) + 1 for i in rng.permutation(n)))
            m = an.martingale(v, ordering=order)
            lhs = an.dirichlet_form(v)
            rhs = math.fsum(an.dirichlet_form(d) for d in m.diffs)
            assert abs(lhs - rhs) <= 1e-10 * lhs

    def test_di_bound(self, rng):
        for _ in range(500):
            n = int(rng.integers(1, 8))
            f = random_boolean(rng, n)
            mu = random_measure(rng, n)
            m = an.martingale(f, mu)
            v = f.table().astype(float)
            w = mu.weights()
            for i in range(1, n + 1):
                flip = v[np.arange(1 << n) ^ (1 << (i - 1))]
                bound = 2 * mu.p[i - 1] * (1 - mu.p[i - 1]) * (w * np.abs(v - flip)).sum()
                assert m.abs_means[i - 1] <= bound + 1e-12

    def test_half_cube_reconstruction(self, rng):
        n = 6
        f = RealFunction(n, rng.normal(size=64))
        m = an.martingale(f)
        f0, f1 = restrict_halves(f, 1)
        h0, h1 = an.martingale(f0), an.martingale(f1)
        x1 = np.arange(64) & 1
        rest = np.arange(64) >> 1
        for i in range(2, n + 1):
            rebuilt = np.where(x1 == 0, h0.diff(i - 1).values[rest], h1.diff(i - 1).values[rest])
            np.testing.assert_allclose(m.diff(i).values, rebuilt, atol=1e-13)


class TestConditional:
    def test_restriction_identity(self, rng):
        for _ in range(50):
            f = random_boolean(rng, 7)
            coords = tuple(int(c) + 1 for c in rng.choice(7, 3, replace=False))
            g = an.conditional_on(f.table().astype(float), (0.5,) * 7, coords)
            v = f.table()
            assert ((v - g) ** 2).mean() == pytest.approx((g * (1 - g)).mean(), abs=1e-12)
