from __future__ import annotations

import numpy as np
import pytest

from cubeiso.inequalities import empirical_log_sobolev_constant, sobolev_ratio, two_point_constant


class TestSobolevRatio:
    def test_constant_has_no_entropy(self):
        assert sobolev_ratio(np.array([2.0, 2.0]), (0.3,)) == np.inf

    def test_never_below_constant(self, rng):
        for p in (0.1, 0.25, 0.5):
            c = two_point_constant(p)
            for _ in range(200):
                v = rng.normal(size=4)
                assert sobolev_ratio(v, (p, p)) >= c * (1 - 1e-10)


class TestEmpirical:
    @pytest.mark.parametrize("p", [0.2, 0.5])
    def test_one_dimension(self, p):
        assert empirical_log_sobolev_constant(p) == pytest.approx(two_point_constant(p), abs=1e-3)

    def test_rejects(self):
        with pytest.raises(ValueError):
            empirical_log_sobolev_constant(0.0)
        with pytest.raises(ValueError):
            empirical_log_sobolev_constant(0.3, n=3)
