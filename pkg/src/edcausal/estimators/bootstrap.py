"""Nonparametric case-resampling bootstrap with percentile intervals."""
from __future__ import annotations

from dataclasses import replace
from typing import Callable

import numpy as np

from ..data import Dataset
from ..errors import BootstrapUnstable, CausalError
from ..noise import replicate_rng
from .ols import CoefficientReport, TermEstimate

Estimator = Callable[[Dataset], CoefficientReport]


def bootstrap_ci(
    data: Dataset,
    estimator: Estimator,
    B: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    min_success: float = 0.95,
) -> CoefficientReport:
    """Point estimates on ``data`` plus percentile intervals from ``B`` resamples.

    Replicate ``b`` draws its rows from a generator seeded by ``(seed, b)``, so the
    intervals do not depend on evaluation order. Replicates on which the estimator
    raises a domain error are counted in ``n_failed``; if fewer than
    ``min_success * B`` succeed the whole call raises :class:`BootstrapUnstable`.
    """
    if B < 100:
        raise ValueError("interval output needs B >= 100")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    point = estimator(data)
    names = point.names
    draws = []
    failed = 0
    for b in range(B):
        rows = replicate_rng(seed, b).integers(0, data.n, data.n)
        try:
            rep = estimator(data.take(rows))
        except CausalError:
            failed += 1
            continue
        draws.append([rep[name].estimate for name in names])
    if B - failed < min_success * B:
        raise BootstrapUnstable(f"{failed} of {B} bootstrap replicates failed")
    draws = np.asarray(draws)
    alpha = 1.0 - level
    low, high = np.quantile(draws, [alpha / 2, 1 - alpha / 2], axis=0)
    terms = [
        TermEstimate(t.name, t.estimate, t.se, t.t, t.p, float(lo), float(hi))
        for t, lo, hi in zip(point.terms, low, high)
    ]
    return replace(point, terms=terms, level=level, B=B, seed=seed, n_failed=failed)
