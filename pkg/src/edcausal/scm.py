"""Structural causal models over binary linear-probability nodes and Gaussian outcomes.

Simulation draws all exogenous noise from :mod:`edcausal.noise`, keyed on the node's
index in the lexicographically sorted node list. Interventions leave the node set
unchanged, so a unit sees the same noise under every regime; that is what makes
:func:`potential_outcomes` consistent with the factual draw.
"""
from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import noise
from .dag import CausalDag, Role, build_dag, intervene
from .data import BINARY, CONTINUOUS, Dataset
from .errors import (
    BoundaryProbabilityWarning,
    MissingEquation,
    NonPositiveSigma,
    ParentMismatch,
    ProbabilityOutOfRange,
    RegimeExplosion,
    UnknownNode,
    UnsupportedEquationForm,
    ValueOutOfSupport,
)

_EPS = 1e-12


@dataclass(frozen=True)
class BernoulliLinear:
    """P(node = 1) = intercept + sum(coef * parent)."""

    intercept: float
    coefficients: Mapping[str, float] = field(default_factory=dict)

    @property
    def parents(self) -> set[str]:
        return set(self.coefficients)

    def probability(self, values: Mapping[str, np.ndarray | float]):
        p = self.intercept
        for parent, coef in sorted(self.coefficients.items()):
            p = p + coef * values[parent]
        return p


@dataclass(frozen=True)
class GaussianLinear:
    """node ~ N(intercept + sum(coef * prod(parents)), sigma**2).

    ``terms`` is a sequence of ``(parents, coef)``; a term with several parents is
    an interaction.
    """

    intercept: float
    terms: Sequence[tuple[tuple[str, ...], float]]
    sigma: float

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((tuple(parents), float(coef)) for parents, coef in self.terms)
        )

    @property
    def parents(self) -> set[str]:
        return {p for parents, _ in self.terms for p in parents}

    def mean(self, values: Mapping[str, np.ndarray | float]):
        mu = self.intercept
        for parents, coef in self.terms:
            prod = 1.0
            for p in parents:
                prod = prod * values[p]
            mu = mu + coef * prod
        return mu


@dataclass(frozen=True)
class Constant:
    """Equation left behind by an intervention."""

    value: float
    binary: bool = True

    @property
    def parents(self) -> set[str]:
        return set()


Equation = BernoulliLinear | GaussianLinear | Constant


def _is_binary_eq(eq) -> bool:
    return isinstance(eq, BernoulliLinear) or (isinstance(eq, Constant) and eq.binary)


@dataclass(frozen=True)
class BoundaryStratum:
    node: str
    pattern: tuple[tuple[str, int], ...]
    probability: float

    def __str__(self) -> str:
        stratum = ", ".join(f"{k}={v}" for k, v in self.pattern) or "no parents"
        return f"P({self.node}=1) = {self.probability:g} at ({stratum})"


class StructuralModel:
    """A validated DAG plus one equation per node. Build with :func:`build_scm`."""

    def __init__(self, dag: CausalDag, equations: Mapping[str, Equation], boundary=()):
        self.dag = dag
        self.equations = {v: equations[v] for v in dag.topological_order()}
        self.boundary = tuple(boundary)

    @property
    def nodes(self) -> tuple[str, ...]:
        """Topological order, ties broken lexicographically."""
        return self.dag.topological_order()

    def is_binary(self, node: str) -> bool:
        return _is_binary_eq(self.equation(node))

    def equation(self, node: str) -> Equation:
        if node not in self.equations:
            raise UnknownNode(f"unknown node {node!r}")
        return self.equations[node]

    def stream(self, node: str) -> int:
        return self.dag.nodes.index(node)

    def __repr__(self) -> str:
        return f"StructuralModel(nodes={list(self.nodes)})"


def build_scm(dag: CausalDag, equations: Mapping[str, Equation], warn: bool = True) -> StructuralModel:
    """Validate equations against the DAG.

    Linear probabilities are checked on every parent bit-pattern. Values of exactly
    0 or 1 are accepted and recorded on ``model.boundary`` (with a
    :class:`BoundaryProbabilityWarning` when ``warn``); anything outside [0, 1]
    raises :class:`ProbabilityOutOfRange`.
    """
    for node in equations:
        if node not in dag:
            raise UnknownNode(f"equation given for undeclared node {node!r}")
    for node in dag.nodes:
        if node not in equations:
            raise MissingEquation(f"no equation for node {node!r}")
    boundary = []
    for node in dag.topological_order():
        eq = equations[node]
        declared = set(dag.parents(node))
        if eq.parents != declared:
            raise ParentMismatch(
                f"{node}: equation uses parents {sorted(eq.parents)} but the DAG has {sorted(declared)}"
            )
        if isinstance(eq, GaussianLinear):
            if not eq.sigma > 0:
                raise NonPositiveSigma(f"{node}: sigma must be positive, got {eq.sigma}")
        elif isinstance(eq, BernoulliLinear):
            parents = sorted(eq.parents)
            for p in parents:
                if not _is_binary_eq(equations[p]):
                    raise UnsupportedEquationForm(f"{node}: linear-probability node has continuous parent {p!r}")
            for bits in itertools.product((0, 1), repeat=len(parents)):
                pattern = dict(zip(parents, bits))
                prob = eq.probability(pattern)
                if prob < -_EPS or prob > 1 + _EPS:
                    raise ProbabilityOutOfRange(node, pattern, prob)
                if prob < _EPS or prob > 1 - _EPS:
                    boundary.append(BoundaryStratum(node, tuple(pattern.items()), round(prob)))
        elif isinstance(eq, Constant):
            pass
        else:
            raise UnsupportedEquationForm(f"{node}: unknown equation type {type(eq).__name__}")
    if warn:
        for b in boundary:
            warnings.warn(f"boundary probability: {b}", BoundaryProbabilityWarning, stacklevel=2)
    return StructuralModel(dag, equations, boundary)


def model_from_equations(
    equations: Mapping[str, Equation], roles: Mapping[str, Role] | None = None, warn: bool = True
) -> StructuralModel:
    """Build the DAG implied by the equations' parent sets, then validate."""
    roles = roles or {}
    dag = build_dag(
        {v: roles.get(v, Role.GENERIC) for v in equations},
        [(p, v) for v, eq in equations.items() for p in sorted(eq.parents)],
    )
    return build_scm(dag, equations, warn=warn)


# ---------------------------------------------------------------------------
# simulation


def _evaluate(model: StructuralModel, seed: int, start: int, stop: int) -> dict[str, np.ndarray]:
    n = stop - start
    values: dict[str, np.ndarray] = {}
    for node in model.nodes:
        eq = model.equations[node]
        k = model.stream(node)
        if isinstance(eq, Constant):
            values[node] = np.full(n, eq.value, dtype=np.int64 if eq.binary else np.float64)
        elif isinstance(eq, BernoulliLinear):
            p = eq.probability(values)
            u = noise.uniforms(seed, 2 * k, start, stop)
            values[node] = (u < p).astype(np.int64)
        else:
            z = noise.standard_normals(seed, k, start, stop)
            values[node] = eq.mean(values) + eq.sigma * z
    return values


def _as_dataset(model: StructuralModel, values: Mapping[str, np.ndarray]) -> Dataset:
    kinds = {v: BINARY if model.is_binary(v) else CONTINUOUS for v in model.nodes}
    return Dataset({v: values[v] for v in model.nodes}, kinds)


def simulate(model: StructuralModel, n: int, seed: int, first_unit: int = 0) -> Dataset:
    """Draw units ``first_unit .. first_unit + n - 1``.

    Splitting a range into consecutive blocks and concatenating the results gives
    exactly the single-call dataset.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    return _as_dataset(model, _evaluate(model, seed, first_unit, first_unit + n))


def apply_intervention(model: StructuralModel, assignment: Mapping[str, float]) -> StructuralModel:
    """do(assignment): constant equations for the targets, their in-edges removed."""
    if not assignment:
        return model
    equations = dict(model.equations)
    for node, value in assignment.items():
        eq = model.equation(node)
        if _is_binary_eq(eq):
            if value not in (0, 1):
                raise ValueOutOfSupport(f"{node} is binary; cannot set it to {value!r}")
            equations[node] = Constant(int(value), binary=True)
        else:
            if not np.isfinite(value):
                raise ValueOutOfSupport(f"{node} must be set to a finite value")
            equations[node] = Constant(float(value), binary=False)
    return build_scm(intervene(model.dag, assignment), equations, warn=False)


# ---------------------------------------------------------------------------
# counterfactuals


@dataclass
class PotentialOutcomeTable:
    """Per-unit outcomes under every joint regime of the treatments, sharing noise."""

    treatments: tuple[str, ...]
    outcome: str
    regimes: tuple[tuple[int, ...], ...]
    values: np.ndarray  # (n, len(regimes))
    factual: Dataset
    factual_regime: np.ndarray  # index into ``regimes`` per unit

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, regime: Sequence[int]) -> np.ndarray:
        return self.values[:, self.regimes.index(tuple(regime))]

    @property
    def factual_outcome(self) -> np.ndarray:
        return self.factual[self.outcome]

    def outcome_at_factual_regime(self) -> np.ndarray:
        return self.values[np.arange(self.n), self.factual_regime]


def potential_outcomes(
    model: StructuralModel,
    treatments: Sequence[str],
    outcome: str,
    n: int,
    seed: int,
    max_regimes: int = 2**12,
) -> PotentialOutcomeTable:
    treatments = tuple(treatments)
    for t in treatments + (outcome,):
        model.equation(t)
    for t in treatments:
        if not model.is_binary(t):
            raise ValueError(f"treatment {t!r} must be binary")
    if 2 ** len(treatments) > max_regimes:
        raise RegimeExplosion(f"{2 ** len(treatments)} regimes exceeds the cap of {max_regimes}")
    factual = simulate(model, n, seed)
    regimes = tuple(itertools.product((0, 1), repeat=len(treatments)))
    values = np.empty((n, len(regimes)))
    for j, regime in enumerate(regimes):
        post = apply_intervention(model, dict(zip(treatments, regime)))
        values[:, j] = _evaluate(post, seed, 0, n)[outcome]
    code = np.zeros(n, dtype=np.int64)
    for t in treatments:
        code = code * 2 + factual[t]
    return PotentialOutcomeTable(treatments, outcome, regimes, values, factual, code)


# ---------------------------------------------------------------------------
# ground truth for marginal structural models


def saturated_terms(treatments: Sequence[str]) -> list[tuple[str, ...]]:
    """Main effects then interactions by order: X1, X2, X1*X2, ..."""
    treatments = list(treatments)
    out = []
    for size in range(1, len(treatments) + 1):
        out.extend(itertools.combinations(treatments, size))
    return out


def term_name(term: Sequence[str]) -> str:
    return "*".join(term) if term else "intercept"


def saturated_coefficients(treatments: Sequence[str], regime_means: Mapping[tuple, float]) -> dict[str, float]:
    """Solve the saturated regime-indicator model from the mean outcome of each regime."""
    terms = [()] + saturated_terms(treatments)
    regimes = list(itertools.product((0, 1), repeat=len(treatments)))
    index = {t: i for i, t in enumerate(treatments)}
    design = np.array([[np.prod([r[index[v]] for v in term]) for term in terms] for r in regimes], dtype=float)
    rhs = np.array([regime_means[r] for r in regimes], dtype=float)
    coef = np.linalg.solve(design, rhs)
    return {term_name(t): float(c) for t, c in zip(terms, coef)}


def _analytic_mean(model: StructuralModel, outcome: str) -> float:
    expected: dict[str, float] = {}
    for node in model.nodes:
        eq = model.equations[node]
        if isinstance(eq, Constant):
            expected[node] = float(eq.value)
        elif isinstance(eq, BernoulliLinear):
            expected[node] = float(eq.probability(expected))
        else:
            for parents, _ in eq.terms:
                random = [p for p in parents if not isinstance(model.equations[p], Constant)]
                if len(random) > 1:
                    raise UnsupportedEquationForm(
                        f"{node}: product of random nodes {random} has no closed-form expectation"
                    )
            expected[node] = float(eq.mean(expected))
    return expected[outcome]


def true_msm_coefficients(
    model: StructuralModel,
    treatments: Sequence[str],
    outcome: str,
    method: str = "auto",
    mc_samples: int = 10**6,
    seed: int = 0,
) -> dict[str, float]:
    """Coefficients of the saturated marginal structural model E[outcome | do(regime)].

    ``method="analytic"`` propagates expectations through each post-intervention
    model, which is exact whenever no equation multiplies two random nodes.
    ``"monte-carlo"`` averages ``mc_samples`` draws per regime (common random
    numbers across regimes). ``"auto"`` tries the analytic path first.
    """
    treatments = tuple(treatments)
    model.equation(outcome)
    for t in treatments:
        if not model.is_binary(t):
            raise UnsupportedEquationForm(f"treatment {t!r} is not binary")
    if method not in ("auto", "analytic", "monte-carlo"):
        raise ValueError(f"unknown method {method!r}")
    means = {}
    for regime in itertools.product((0, 1), repeat=len(treatments)):
        post = apply_intervention(model, dict(zip(treatments, regime)))
        if method != "monte-carlo":
            try:
                means[regime] = _analytic_mean(post, outcome)
                continue
            except UnsupportedEquationForm:
                if method == "analytic":
                    raise
        means[regime] = float(np.mean(simulate(post, mc_samples, seed)[outcome]))
    return saturated_coefficients(treatments, means)


# ---------------------------------------------------------------------------
# JSON


def _equation_to_dict(eq: Equation) -> dict:
    if isinstance(eq, BernoulliLinear):
        return {"kind": "bernoulli", "intercept": eq.intercept, "coefficients": dict(sorted(eq.coefficients.items()))}
    if isinstance(eq, GaussianLinear):
        return {
            "kind": "gaussian",
            "intercept": eq.intercept,
            "terms": [{"parents": list(p), "coef": c} for p, c in eq.terms],
            "sigma": eq.sigma,
        }
    return {"kind": "constant", "value": eq.value, "binary": eq.binary}


def _equation_from_dict(node: str, payload: Mapping) -> Equation:
    kind = payload.get("kind")
    if kind == "bernoulli":
        return BernoulliLinear(float(payload["intercept"]), {k: float(v) for k, v in payload.get("coefficients", {}).items()})
    if kind == "gaussian":
        terms = [(tuple(t["parents"]), float(t["coef"])) for t in payload.get("terms", [])]
        return GaussianLinear(float(payload["intercept"]), terms, float(payload["sigma"]))
    if kind == "constant":
        return Constant(payload["value"], bool(payload.get("binary", True)))
    raise ValueError(f"{node}: unknown equation kind {kind!r}")


def scm_to_dict(model: StructuralModel) -> dict:
    return {
        "dag": model.dag.to_dict(),
        "equations": {v: _equation_to_dict(model.equations[v]) for v in model.nodes},
    }


def scm_from_dict(payload: Mapping, warn: bool = True) -> StructuralModel:
    dag = CausalDag.from_dict(payload["dag"])
    equations = {v: _equation_from_dict(v, e) for v, e in payload["equations"].items()}
    return build_scm(dag, equations, warn=warn)


def load_scm(path, warn: bool = True) -> StructuralModel:
    with open(path) as fh:
        return scm_from_dict(json.load(fh), warn=warn)


def save_scm(model: StructuralModel, path) -> None:
    Path(path).write_text(json.dumps(scm_to_dict(model), indent=2) + "\n")
