import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.stats import spearmanr

from heliocot.errors import DegenerateVarianceError, InsufficientDataError, ShapeError
from heliocot.stats import fit_line, outlier_indices, pearson, spearman, studentized_residuals

series = st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=40)


def paired(min_size=3):
    return st.integers(min_size, 40).flatmap(
        lambda n: st.tuples(
            st.lists(st.floats(-1e3, 1e3), min_size=n, max_size=n),
            st.lists(st.floats(-1e3, 1e3), min_size=n, max_size=n),
        )
    )


def spread(v):
    v = np.asarray(v)
    return np.ptp(v) > 1e-3 * (np.abs(v).max() + 1.0)


class TestPearson:
    def test_hand_example(self):
        # covariance 4/4, variances 5/4 each -> 4/5
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, rel=1e-12)

    def test_positive_line(self):
        xs = [0.3, 1.7, 2.2, 9.0]
        assert pearson(xs, [2 * x + 1 for x in xs]) == pytest.approx(1.0, abs=1e-15)

    def test_negative_line(self):
        xs = [0.3, 1.7, 2.2, 9.0]
        assert pearson(xs, [-x for x in xs]) == pytest.approx(-1.0, abs=1e-15)

    def test_constant(self):
        with pytest.raises(DegenerateVarianceError):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(DegenerateVarianceError):
            pearson([1, 2, 3], [4, 4, 4])

    def test_shape(self):
        with pytest.raises(ShapeError):
            pearson([1, 2, 3], [1, 2])

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            pearson([1, 2], [2, 1])

    def test_against_numpy(self):
        rng = np.random.default_rng(1)
        x, y = rng.normal(size=200), rng.normal(size=200)
        y += 0.4 * x
        assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], rel=1e-12)

    @given(paired())
    def test_symmetric_and_bounded(self, xy):
        xs, ys = xy
        assume(spread(xs) and spread(ys))
        r = pearson(xs, ys)
        assert -1.0 <= r <= 1.0
        assert r == pytest.approx(pearson(ys, xs), abs=1e-12)

    @given(paired(), st.floats(0.01, 100), st.floats(-100, 100))
    def test_negates_under_negative_scale(self, xy, a, b):
        xs, ys = xy
        assume(spread(xs) and spread(ys))
        neg = [-a * x + b for x in xs]
        assert pearson(neg, ys) == pytest.approx(-pearson(xs, ys), abs=1e-9)


class TestSpearman:
    def test_monotone_nonlinear(self):
        xs = [1, 2, 3, 4, 5]
        assert spearman(xs, [x**3 for x in xs]) == pytest.approx(1.0)

    def test_ties_against_scipy(self):
        xs = [0, 0, 0, 1, 2, 2, 5, 7]
        ys = [3, 1, 2, 2, 9, 9, 8, 10]
        assert spearman(xs, ys) == pytest.approx(spearmanr(xs, ys).statistic, rel=1e-12)


class TestFitLine:
    def test_exact_line(self):
        xs = [0.0, 0.2, 0.4, 0.9, 1.0]
        fit = fit_line(xs, [0.5 * x + 0.1 for x in xs])
        assert fit.slope == pytest.approx(0.5, rel=1e-12)
        assert fit.intercept == pytest.approx(0.1, rel=1e-12)
        assert fit.r2 == pytest.approx(1.0)
        assert fit.n == 5

    def test_constant_x(self):
        with pytest.raises(DegenerateVarianceError):
            fit_line([2, 2, 2], [1, 2, 3])

    def test_against_polyfit(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(0, 1, 80)
        y = -0.7 * x + 0.9 + rng.normal(0, 0.05, 80)
        fit = fit_line(x, y)
        slope, intercept = np.polyfit(x, y, 1)
        assert fit.slope == pytest.approx(slope, rel=1e-10)
        assert fit.intercept == pytest.approx(intercept, rel=1e-10)

    @given(paired())
    def test_r2_is_r_squared(self, xy):
        xs, ys = xy
        assume(spread(xs) and spread(ys))
        fit = fit_line(xs, ys)
        assert abs(fit.r2 - fit.r * fit.r) <= 1e-12
        assert 0.0 <= fit.r2 <= 1.0


class TestOutliers:
    def test_planted_outlier_flagged(self):
        rng = np.random.default_rng(4)
        x = np.linspace(0, 1, 40)
        y = 0.3 * x + 0.2 + rng.normal(0, 0.01, 40)
        y[17] += 0.5
        fit = fit_line(x, y)
        assert outlier_indices(x, y, fit) == [17]

    def test_exact_fit_has_none(self):
        x = np.linspace(0, 1, 10)
        y = -x + 1
        fit = fit_line(x, y)
        assert np.all(studentized_residuals(x, y, fit) == 0)
        assert outlier_indices(x, y, fit) == []

    def test_against_direct_leave_one_out(self):
        rng = np.random.default_rng(9)
        x = rng.uniform(0, 1, 15)
        y = 2 * x + rng.normal(0, 0.1, 15)
        fit = fit_line(x, y)
        t = studentized_residuals(x, y, fit)
        for i in range(15):
            keep = np.arange(15) != i
            loo = fit_line(x[keep], y[keep])
            resid = y[keep] - loo.predict(x[keep])
            s2 = np.dot(resid, resid) / (14 - 2)
            dx = x[keep] - x[keep].mean()
            # prediction error variance for the held-out point
            var = s2 * (1 + 1 / 14 + (x[i] - x[keep].mean()) ** 2 / np.dot(dx, dx))
            expected = (y[i] - loo.predict(x[i])) / np.sqrt(var)
            assert t[i] == pytest.approx(expected, rel=1e-8)
