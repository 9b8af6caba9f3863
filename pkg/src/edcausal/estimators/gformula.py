"""Backdoor standardization, positivity diagnostics and the g-formula.

All three rely on conditional exchangeability given the supplied confounders. That
assumption cannot be tested from data and nothing here tries to.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..dag import CausalDag
from ..data import Dataset
from ..errors import PositivityViolation, UnknownColumn
from ..scm import saturated_coefficients
from .ols import fit_ols, parse_term


def _stratum_text(pairs) -> str:
    return ", ".join(f"{k}={v}" for k, v in pairs) or "all rows"


def _weights(data: Dataset, weights) -> np.ndarray:
    if weights is None:
        return np.ones(data.n)
    w = np.asarray(weights, dtype=float)
    if w.shape != (data.n,):
        raise ValueError(f"{w.shape[0]} weights for {data.n} rows")
    return w


@dataclass
class AdjustedMeans:
    treatment: str
    outcome: str
    means: dict[int, float]

    @property
    def ate(self) -> float:
        return self.means[1] - self.means[0]

    def to_dict(self) -> dict:
        return {
            "treatment": self.treatment,
            "outcome": self.outcome,
            "means": {str(k): v for k, v in self.means.items()},
            "ate": self.ate,
        }


def standardize(
    data: Dataset, treatment: str, outcome: str, adjustment: Sequence[str], weights=None
) -> AdjustedMeans:
    """E[Y | do(X=x)] = sum_z E[Y | X=x, Z=z] P(Z=z), for x in {0, 1}.

    ``weights`` are frequency weights; passing the probabilities of an enumerated
    joint distribution evaluates the formula exactly on that distribution.
    """
    adjustment = list(adjustment)
    data.require_binary(treatment, *adjustment)
    y = data[outcome].astype(float)
    w = _weights(data, weights)
    total = w.sum()
    x = data[treatment]
    means = {}
    empty = []
    for level in (0, 1):
        acc = 0.0
        for bits in itertools.product((0, 1), repeat=len(adjustment)):
            zmask = np.ones(data.n, dtype=bool)
            for col, b in zip(adjustment, bits):
                zmask &= data[col] == b
            pz = w[zmask].sum() / total
            if pz == 0:
                continue
            cell = zmask & (x == level)
            wc = w[cell].sum()
            if wc == 0:
                empty.append(((treatment, level),) + tuple(zip(adjustment, bits)))
                continue
            acc += pz * (w[cell] @ y[cell]) / wc
        means[level] = acc
    if empty:
        listed = "; ".join(_stratum_text(s) for s in empty)
        raise PositivityViolation(f"no rows in strata with positive confounder probability: {listed}", empty)
    return AdjustedMeans(treatment, outcome, means)


# ---------------------------------------------------------------------------
# positivity


@dataclass
class PositivityStratum:
    treatment: str
    stratum: tuple[tuple[str, int], ...]
    count: float
    probability: float | None  # empirical P(treatment = 1 | stratum)
    flag: str  # "ok", "boundary" or "empty"

    def __str__(self) -> str:
        prob = "-" if self.probability is None else f"{self.probability:.4f}"
        return f"{self.treatment} | {_stratum_text(self.stratum)}: n={self.count:g}, P=1: {prob} [{self.flag}]"


@dataclass
class PositivityReport:
    strata: list[PositivityStratum]

    def flagged(self, flag: str) -> list[PositivityStratum]:
        return [s for s in self.strata if s.flag == flag]

    def find(self, treatment: str, **stratum: int) -> PositivityStratum:
        want = set(stratum.items())
        for s in self.strata:
            if s.treatment == treatment and set(s.stratum) == want:
                return s
        raise KeyError((treatment, stratum))

    @property
    def ok(self) -> bool:
        return all(s.flag == "ok" for s in self.strata)

    def to_text(self) -> str:
        return "\n".join(str(s) for s in self.strata) + "\n"


def history_columns(treatments: Sequence[str], confounders: Sequence[Sequence[str]], t: int) -> list[str]:
    """Conditioning columns for treatment ``t``: earlier treatments and confounders through t."""
    cols = []
    for s in range(t + 1):
        cols.extend(confounders[s])
        if s < t:
            cols.append(treatments[s])
    return cols


def _check_times(treatments, confounders):
    if len(confounders) != len(treatments):
        raise ValueError("give one confounder set per treatment time (use [] for none)")


def positivity_check(data: Dataset, treatments: Sequence[str], confounders: Sequence[Sequence[str]]) -> PositivityReport:
    """Empirical P(X_t = 1 | treatment and confounder history) for every history stratum."""
    _check_times(treatments, confounders)
    out = []
    for t, x in enumerate(treatments):
        cols = history_columns(treatments, confounders, t)
        data.require_binary(x, *cols)
        for bits in itertools.product((0, 1), repeat=len(cols)):
            mask = np.ones(data.n, dtype=bool)
            for col, b in zip(cols, bits):
                mask &= data[col] == b
            count = int(mask.sum())
            if count == 0:
                out.append(PositivityStratum(x, tuple(zip(cols, bits)), 0, None, "empty"))
                continue
            p = float(data[x][mask].mean())
            flag = "boundary" if p in (0.0, 1.0) else "ok"
            out.append(PositivityStratum(x, tuple(zip(cols, bits)), count, p, flag))
    return PositivityReport(out)


# ---------------------------------------------------------------------------
# g-formula


def _sequence(treatments, confounders, dag: CausalDag | None):
    seq = []
    for t, x in enumerate(treatments):
        conf = list(confounders[t])
        if dag is not None:
            order = dag.topological_order()
            conf.sort(key=order.index)
        seq.extend(("L", c) for c in conf)
        seq.append(("X", x))
    return seq


def g_formula(
    data: Dataset,
    treatments: Sequence[str],
    confounders: Sequence[Sequence[str]],
    outcome: str,
    regime: Sequence[int],
    *,
    weights=None,
    dag: CausalDag | None = None,
    outcome_terms: Sequence | None = None,
) -> float:
    """Plug-in estimate of E[outcome] under the joint treatment ``regime``.

    Confounder transitions are stratified empirical frequencies, summed over every
    confounder history. By default each confounder is conditioned on the full
    treatment/confounder history before it and the outcome mean is the stratum
    mean given the full history. With ``dag``, each confounder (and a stratified
    outcome) conditions only on its DAG parents, i.e. the truncated factorization.
    With ``outcome_terms``, the outcome mean comes from an OLS fit on those terms
    instead of stratum means, which lets the sum reach histories that no unit
    followed. Any needed stratum with no rows raises :class:`PositivityViolation`.
    """
    _check_times(treatments, confounders)
    regime = tuple(int(r) for r in regime)
    if len(regime) != len(treatments):
        raise ValueError("regime must assign every treatment")
    binary_cols = list(treatments) + [c for cs in confounders for c in cs]
    data.require_binary(*binary_cols)
    if outcome not in data:
        raise UnknownColumn(f"no column named {outcome!r}")
    w = _weights(data, weights)
    y = data[outcome].astype(float)
    seq = _sequence(treatments, confounders, dag)
    position = {name: i for i, (_, name) in enumerate(seq)}
    fixed = dict(zip(treatments, regime))

    def conditioning(name: str | None) -> list[str]:
        upto = len(seq) if name is None else position[name]
        earlier = [v for _, v in seq[:upto]]
        if dag is None:
            return earlier
        target = outcome if name is None else name
        parents = [p for p in dag.parents(target) if p in data]
        late = [p for p in parents if p not in earlier]
        if late:
            raise ValueError(f"parents {late} of {target!r} are not earlier in the treatment/confounder sequence")
        return parents

    conds = {name: conditioning(name) for kind, name in seq if kind == "L"}
    outcome_cond = conditioning(None)
    indicator = {(c, b): data[c] == b for c in binary_cols for b in (0, 1)}

    model = None
    if outcome_terms is not None:
        known = {v for _, v in seq}
        stray = sorted({v for term in outcome_terms for v in parse_term(term)} - known)
        if stray:
            raise ValueError(f"outcome terms use {stray}, which are not treatments or confounders")
        model = fit_ols(data, outcome, outcome_terms, weights=None if weights is None else w)

    def stratum(cols, values) -> np.ndarray:
        mask = np.ones(data.n, dtype=bool)
        for c in cols:
            mask &= indicator[(c, values[c])]
        return mask

    def outcome_mean(values) -> float:
        if model is not None:
            est = model.estimates
            total = est["intercept"]
            for name, coef in est.items():
                if name != "intercept":
                    total += coef * np.prod([values[v] for v in name.split("*")])
            return float(total)
        mask = stratum(outcome_cond, values)
        wm = w[mask].sum()
        if wm == 0:
            pairs = [(c, values[c]) for c in outcome_cond]
            raise PositivityViolation(f"no rows to estimate E[{outcome} | {_stratum_text(pairs)}]", [tuple(pairs)])
        return float(w[mask] @ y[mask] / wm)

    def walk(i: int, values: dict, prob: float) -> float:
        if i == len(seq):
            return prob * outcome_mean(values)
        kind, name = seq[i]
        if kind == "X":
            return walk(i + 1, {**values, name: fixed[name]}, prob)
        cols = conds[name]
        mask = stratum(cols, values)
        wm = w[mask].sum()
        if wm == 0:
            pairs = [(c, values[c]) for c in cols]
            raise PositivityViolation(f"no rows to estimate P({name} | {_stratum_text(pairs)})", [tuple(pairs)])
        acc = 0.0
        for b in (0, 1):
            pb = w[mask & indicator[(name, b)]].sum() / wm
            if pb > 0:
                acc += walk(i + 1, {**values, name: b}, prob * pb)
        return acc

    return walk(0, {}, 1.0)


@dataclass
class GFormulaResult:
    regime_means: dict[tuple[int, ...], float]
    coefficients: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "regime_means": {",".join(map(str, r)): v for r, v in self.regime_means.items()},
            "coefficients": self.coefficients,
        }


def g_formula_msm(
    data: Dataset,
    treatments: Sequence[str],
    confounders: Sequence[Sequence[str]],
    outcome: str,
    **kwargs,
) -> GFormulaResult:
    """g-formula under all 2^T regimes, solved into saturated MSM coefficients."""
    means = {
        r: g_formula(data, treatments, confounders, outcome, r, **kwargs)
        for r in itertools.product((0, 1), repeat=len(treatments))
    }
    return GFormulaResult(means, saturated_coefficients(treatments, means))
