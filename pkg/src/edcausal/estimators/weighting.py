"""Inverse probability of treatment weights and marginal structural models."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..data import Dataset
from ..errors import LengthMismatch, ZeroDenominator
from .gformula import _check_times, history_columns
from .ols import CoefficientReport, fit_ols


@dataclass
class WeightVector:
    unstabilized: np.ndarray
    stabilized: np.ndarray
    use_stabilized: bool = True

    @property
    def values(self) -> np.ndarray:
        return self.stabilized if self.use_stabilized else self.unstabilized

    @property
    def mean_stabilized(self) -> float:
        return float(np.mean(self.stabilized))

    def __len__(self) -> int:
        return len(self.unstabilized)

    def to_csv(self, path=None) -> str:
        lines = ["unit,W,SW"]
        lines += [f"{i},{w!r},{s!r}" for i, (w, s) in enumerate(zip(self.unstabilized.tolist(), self.stabilized.tolist()))]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _codes(data: Dataset, cols: Sequence[str]) -> np.ndarray:
    code = np.zeros(data.n, dtype=np.int64)
    for c in cols:
        code = 2 * code + data[c]
    return code


def _prob_observed(data: Dataset, x: str, cols: Sequence[str]) -> np.ndarray:
    """Saturated empirical P(X = observed value | cols) for each row."""
    code = _codes(data, cols)
    size = 2 ** len(cols)
    count = np.bincount(code, minlength=size)
    treated = np.bincount(code, weights=data[x], minlength=size)
    p1 = treated[code] / count[code]
    return np.where(data[x] == 1, p1, 1.0 - p1)


def _prob_from_table(data: Dataset, x: str, cols: Sequence[str], table: Mapping) -> np.ndarray:
    keys = np.column_stack([data[c] for c in cols]) if cols else np.zeros((data.n, 0), dtype=int)
    p1 = np.empty(data.n)
    cache = {}
    for i, key in enumerate(map(tuple, keys.tolist())):
        if key not in cache:
            if key not in table:
                raise ZeroDenominator(f"propensity table for {x} has no entry for stratum {key}")
            cache[key] = float(table[key])
        p1[i] = cache[key]
    return np.where(data[x] == 1, p1, 1.0 - p1)


def iptw_weights(
    data: Dataset,
    treatments: Sequence[str],
    confounders: Sequence[Sequence[str]],
    stabilized: bool = True,
    numerator: str = "history",
    propensity_table: Mapping[str, Mapping[tuple, float]] | None = None,
) -> WeightVector:
    """Per-unit IPTW weights for a sequence of binary treatments.

    The denominator is the product over time of P(observed X_t | earlier
    treatments, confounders through t); the stabilized numerator uses earlier
    treatments only (``numerator="history"``) or nothing at all
    (``numerator="marginal"``). Probabilities are saturated stratum frequencies
    unless ``propensity_table[X_t]`` maps history tuples (ordered as
    :func:`history_columns`) to P(X_t = 1).
    """
    _check_times(treatments, confounders)
    if numerator not in ("history", "marginal"):
        raise ValueError("numerator must be 'history' or 'marginal'")
    denom = np.ones(data.n)
    numer = np.ones(data.n)
    for t, x in enumerate(treatments):
        cols = history_columns(treatments, confounders, t)
        data.require_binary(x, *cols)
        if propensity_table is not None and x in propensity_table:
            p = _prob_from_table(data, x, cols, propensity_table[x])
        else:
            p = _prob_observed(data, x, cols)
        if np.any(p <= 0):
            raise ZeroDenominator(f"some units received a value of {x} with estimated probability 0")
        denom *= p
        numer *= _prob_observed(data, x, list(treatments[:t]) if numerator == "history" else [])
    return WeightVector(1.0 / denom, numer / denom, use_stabilized=stabilized)


def fit_msm(
    data: Dataset,
    weights: WeightVector | Iterable[float],
    outcome: str,
    terms: Sequence,
) -> CoefficientReport:
    """Weighted least squares of the outcome on treatment terms only, robust (HC0) errors."""
    w = weights.values if isinstance(weights, WeightVector) else np.asarray(list(weights), dtype=float)
    if len(w) != data.n:
        raise LengthMismatch(f"{len(w)} weights for {data.n} rows")
    return fit_ols(data, outcome, terms, weights=w, se="robust")


def weighted_cov(a: np.ndarray, b: np.ndarray, weights: np.ndarray | None = None) -> float:
    w = np.ones(len(a)) if weights is None else np.asarray(weights, dtype=float)
    w = w / w.sum()
    ma, mb = w @ a, w @ b
    return float(w @ ((a - ma) * (b - mb)))
