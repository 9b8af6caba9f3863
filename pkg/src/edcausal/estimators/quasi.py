"""Segmented regression for interrupted time series and sharp regression discontinuity."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..data import Dataset
from ..errors import EmptyArm, InsufficientRows, InsufficientSegment
from .ols import CoefficientReport, least_squares

ITS_TERMS = ["intercept", "time", "level_change", "slope_change"]
RD_TERMS = ["beta0", "beta1", "beta2", "beta3"]


def its_segmented(series: Sequence[tuple[float, float]], interruption: float) -> CoefficientReport:
    """OLS on [1, t, post, (t - t0) * post] with post = 1[t >= t0].

    ``level_change`` is the jump at the interruption and ``slope_change`` the change
    in trend after it.
    """
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("series must be a sequence of (time, value) pairs")
    t, y = arr[:, 0], arr[:, 1]
    post = (t >= interruption).astype(float)
    if post.sum() < 2 or (1 - post).sum() < 2:
        raise InsufficientSegment("need at least two observations on each side of the interruption")
    X = np.column_stack([np.ones_like(t), t, post, (t - interruption) * post])
    return least_squares(X, y, ITS_TERMS)


def rd_estimate(data: Dataset, running: str, outcome: str, cutoff: float, bandwidth: float) -> CoefficientReport:
    """Sharp RD: O = b0 + b1 A + b2 Z + b3 A Z within the bandwidth, A centred at the cutoff.

    Z = 1[A >= cutoff]; ``beta2`` is the jump at the cutoff and ``beta3`` the change in
    slope. All four are reported.
    """
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    a = data[running].astype(float) - cutoff
    keep = np.abs(a) <= bandwidth
    a = a[keep]
    y = data[outcome].astype(float)[keep]
    z = (a >= 0).astype(float)
    above, below = int(z.sum()), int((1 - z).sum())
    if above == 0 or below == 0:
        raise EmptyArm(f"no units {'at or above' if above == 0 else 'below'} the cutoff within the bandwidth")
    if above < 2 or below < 2:
        raise InsufficientRows("need at least two units on each side of the cutoff")
    X = np.column_stack([np.ones_like(a), a, z, a * z])
    return least_squares(X, y, RD_TERMS)
