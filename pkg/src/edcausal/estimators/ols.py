"""Least squares with interaction terms, and the coefficient report shared by all estimators."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from ..data import Dataset
from ..errors import InsufficientRows, LengthMismatch, RankDeficient, UnknownColumn

Term = tuple[str, ...]


@dataclass
class TermEstimate:
    name: str
    estimate: float
    se: float | None = None
    t: float | None = None
    p: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None

    @property
    def has_interval(self) -> bool:
        return self.ci_low is not None

    @property
    def interval_excludes_estimate(self) -> bool:
        """Percentile intervals can miss the point estimate under odd resampling; report, don't fail."""
        return self.has_interval and not (self.ci_low <= self.estimate <= self.ci_high)

    def covers(self, value: float) -> bool:
        return self.has_interval and self.ci_low <= value <= self.ci_high


@dataclass
class CoefficientReport:
    terms: list[TermEstimate]
    n: int
    residual_variance: float | None = None
    level: float | None = None
    B: int | None = None
    seed: int | None = None
    n_failed: int = 0
    label: str = ""
    extra: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> TermEstimate:
        for term in self.terms:
            if term.name == name:
                return term
        raise KeyError(name)

    def __contains__(self, name) -> bool:
        return any(t.name == name for t in self.terms)

    @property
    def names(self) -> list[str]:
        return [t.name for t in self.terms]

    @property
    def estimates(self) -> dict[str, float]:
        return {t.name: t.estimate for t in self.terms}

    def to_dict(self) -> dict:
        out = asdict(self)
        out["terms"] = [_clean(asdict(t)) for t in self.terms]
        return _clean(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        header = ["term", "estimate", "se", "t", "p", "ci_low", "ci_high"]
        rows = [header]
        for t in self.terms:
            rows.append([t.name] + [_fmt(v) for v in (t.estimate, t.se, t.t, t.p, t.ci_low, t.ci_high)])
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = []
        if self.label:
            lines.append(self.label)
        for r in rows:
            lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))))
        meta = f"n = {self.n}"
        if self.B:
            meta += f"; bootstrap B = {self.B}, level = {self.level}, seed = {self.seed}, failed = {self.n_failed}"
        lines.append(meta)
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    if abs(value) != 0 and (abs(value) < 1e-4 or abs(value) >= 1e6):
        return f"{value:.4e}"
    return f"{value:.4f}"


def _clean(obj):
    # JSON has no NaN/inf
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def parse_term(term) -> Term:
    if isinstance(term, str):
        return tuple(part.strip() for part in term.split("*") if part.strip())
    return tuple(term)


def term_label(term: Term) -> str:
    return "*".join(term) if term else "intercept"


def design_matrix(data: Dataset, terms: Iterable, intercept: bool = True) -> tuple[np.ndarray, list[str]]:
    """Columns for intercept plus one elementwise product per term."""
    parsed = [parse_term(t) for t in terms]
    cols, names = [], []
    if intercept:
        cols.append(np.ones(data.n))
        names.append("intercept")
    for term in parsed:
        if not term:
            raise ValueError("empty term")
        col = np.ones(data.n)
        for name in term:
            if name not in data:
                raise UnknownColumn(f"no column named {name!r}")
            col = col * data[name]
        cols.append(col)
        names.append(term_label(term))
    return np.column_stack(cols), names


def _first_dependent(X: np.ndarray, names: Sequence[str]) -> str:
    for j in range(1, X.shape[1] + 1):
        if np.linalg.matrix_rank(X[:, :j]) < j:
            return names[j - 1]
    return names[-1]


def least_squares(
    X: np.ndarray,
    y: np.ndarray,
    names: Sequence[str],
    weights: np.ndarray | None = None,
    se: str = "classical",
) -> CoefficientReport:
    n, k = X.shape
    if n <= k:
        raise InsufficientRows(f"{n} rows cannot support {k} coefficients")
    if weights is None:
        Xw, yw = X, y
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (n,):
            raise LengthMismatch(f"{weights.shape[0]} weights for {n} rows")
        root = np.sqrt(weights)
        Xw, yw = X * root[:, None], y * root
    beta, _, rank, _ = np.linalg.lstsq(Xw, yw, rcond=None)
    if rank < k:
        raise RankDeficient(_first_dependent(Xw, names))
    resid = yw - Xw @ beta
    df = n - k
    sigma2 = float(resid @ resid) / df
    bread = np.linalg.inv(Xw.T @ Xw)
    if se == "classical":
        cov = sigma2 * bread
    elif se == "robust":
        meat = (Xw * (resid**2)[:, None]).T @ Xw
        cov = bread @ meat @ bread
    else:
        raise ValueError(f"unknown standard-error type {se!r}")
    ses = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstat = np.where(ses > 0, beta / ses, np.where(beta == 0, 0.0, np.sign(beta) * np.inf))
    pvals = 2.0 * stats.t.sf(np.abs(tstat), df)
    terms = [
        TermEstimate(name, float(b), float(s), float(t), float(p))
        for name, b, s, t, p in zip(names, beta, ses, tstat, pvals)
    ]
    return CoefficientReport(terms, n=n, residual_variance=sigma2)


def fit_ols(data: Dataset, outcome: str, terms: Iterable, weights=None, se: str = "classical") -> CoefficientReport:
    """OLS (or WLS with ``weights``) of ``outcome`` on an intercept plus ``terms``.

    Terms are column names or products written ``"X1*X2"`` (or tuples). Standard
    errors are homoskedastic unless ``se="robust"`` (HC0 sandwich); p-values are
    two-sided t tests with n - k degrees of freedom.
    """
    X, names = design_matrix(data, terms)
    return least_squares(X, data[outcome].astype(float), names, weights=weights, se=se)


def with_label(report: CoefficientReport, label: str) -> CoefficientReport:
    return replace(report, label=label)
