import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from floeda.fields import FieldGrid
from floeda.metrics import nrmse, pcc

fields = hnp.arrays(
    np.float64, (6, 6, 2),
    elements=st.floats(-10, 10, allow_nan=False, allow_infinity=False),
)


class TestNrmse:
    def test_perfect_estimate(self):
        t = np.random.default_rng(0).normal(size=(8, 8, 2))
        assert nrmse(t, t) == 0.0

    def test_zero_estimate(self):
        t = np.random.default_rng(1).normal(size=(8, 8, 2))
        assert nrmse(np.zeros_like(t), t) == pytest.approx(1.0, rel=1e-14)

    def test_double_estimate(self):
        t = np.random.default_rng(2).normal(size=(8, 8, 2))
        assert nrmse(2 * t, t) == pytest.approx(1.0, rel=1e-14)

    def test_zero_truth_rejected(self):
        with pytest.raises(ValueError):
            nrmse(np.ones((4, 4, 2)), np.zeros((4, 4, 2)))

    def test_accepts_field_grids(self):
        t = FieldGrid(np.random.default_rng(3).normal(size=(8, 8, 2)))
        assert nrmse(t, t) == 0.0

    @settings(max_examples=30, deadline=None)
    @given(est=fields, truth=fields)
    def test_nonnegative_and_triangle_like(self, est, truth):
        if np.linalg.norm(truth) == 0:
            return
        val = nrmse(est, truth)
        assert val >= 0
        # scaling both fields leaves the metric unchanged
        assert nrmse(3 * est, 3 * truth) == pytest.approx(val, rel=1e-10, abs=1e-12)


class TestPcc:
    def test_perfect_correlation(self):
        t = np.random.default_rng(4).normal(size=(8, 8, 2))
        assert pcc(t, t) == pytest.approx(1.0, rel=1e-13)

    def test_anticorrelation(self):
        t = np.random.default_rng(5).normal(size=(8, 8, 2))
        assert pcc(-t, t) == pytest.approx(-1.0, rel=1e-13)

    def test_offset_invariance(self):
        t = np.random.default_rng(6).normal(size=(8, 8, 2))
        assert pcc(t + 4.2, t) == pytest.approx(1.0, rel=1e-12)

    def test_constant_field_rejected(self):
        t = np.random.default_rng(7).normal(size=(4, 4, 2))
        with pytest.raises(ValueError):
            pcc(np.full((4, 4, 2), 2.0), t)
        with pytest.raises(ValueError):
            pcc(t, np.zeros((4, 4, 2)))

    @settings(max_examples=30, deadline=None)
    @given(est=fields, truth=fields)
    def test_bounded(self, est, truth):
        e, t = est - est.mean(), truth - truth.mean()
        if np.linalg.norm(e) == 0 or np.linalg.norm(t) == 0:
            return
        assert -1 - 1e-12 <= pcc(est, truth) <= 1 + 1e-12
