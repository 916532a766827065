"""Correlation and least-squares line fitting."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateVarianceError, InsufficientDataError, ShapeError

# Studentized residual magnitude above which a point is flagged.
OUTLIER_T = 3.0


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r: float
    r2: float
    n: int

    def predict(self, x):
        return self.slope * np.asarray(x, dtype=np.float64) + self.intercept


def _paired(xs, ys, min_n):
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ShapeError(f"paired series differ in shape: {x.shape} vs {y.shape}")
    if x.size < min_n:
        raise InsufficientDataError(f"need at least {min_n} pairs, got {x.size}")
    return x, y


def centered(x):
    """Deviations from the mean, recentered once to shave rounding residue."""
    d = x - x.mean()
    return d - d.mean()


def ols(x, y):
    """Slope and intercept of the least-squares line of ``y`` on ``x``.

    ``x`` must not be constant; callers check that and raise their own error.
    """
    dx = centered(x)
    slope = float(np.dot(dx, y - y.mean()) / np.dot(dx, dx))
    return slope, float(y.mean() - slope * x.mean())


def pearson(xs, ys):
    """Product-moment correlation coefficient."""
    x, y = _paired(xs, ys, 3)
    dx, dy = centered(x), centered(y)
    sxx, syy = float(np.dot(dx, dx)), float(np.dot(dy, dy))
    if sxx == 0.0 or not _varies(x):
        raise DegenerateVarianceError("x series is constant")
    if syy == 0.0 or not _varies(y):
        raise DegenerateVarianceError("y series is constant")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _varies(v):
    return bool(np.any(v != v[0]))


def spearman(xs, ys):
    """Rank correlation: Pearson on average ranks (ties share their mean rank)."""
    x, y = _paired(xs, ys, 3)
    return pearson(rankdata(x), rankdata(y))


def fit_line(xs, ys):
    """Ordinary least squares of ``ys`` on ``xs``."""
    r = pearson(xs, ys)
    x, y = _paired(xs, ys, 3)
    slope, intercept = ols(x, y)
    return RegressionResult(slope, intercept, r, r * r, int(x.size))


def studentized_residuals(xs, ys, fit):
    """Externally studentized residuals of a simple linear fit.

    Points are returned as 0 when the fit is exact to rounding, where
    the residual scale carries no information.
    """
    x, y = _paired(xs, ys, 3)
    n = x.size
    resid = y - fit.predict(x)
    dx = centered(x)
    lev = 1.0 / n + dx**2 / np.dot(dx, dx)
    sse = float(np.dot(resid, resid))
    scale = max(float(np.abs(y).max()), float(np.abs(dx).max() * abs(fit.slope)), 1e-300)
    if n <= 3 or math.sqrt(sse / n) <= 1e-9 * scale:
        return np.zeros(n)
    one_minus_h = np.clip(1.0 - lev, 1e-12, None)
    # leave-one-out residual variance
    s2_loo = (sse - resid**2 / one_minus_h) / (n - 3)
    s2_loo = np.clip(s2_loo, 1e-300, None)
    return resid / np.sqrt(s2_loo * one_minus_h)


def outlier_indices(xs, ys, fit, threshold=OUTLIER_T):
    t = studentized_residuals(xs, ys, fit)
    return [int(i) for i in np.flatnonzero(np.abs(t) > threshold)]
