"""Catalog of the education-study simulation designs and table reproduction.

Each scenario bundles a structural model, the columns an analyst may see, the
treatment sequence, and the coefficients each method should recover. Verdicts are
mechanical: a term "matches" when the truth lies in its bootstrap interval (or,
without intervals, within ``tolerance`` of the estimate).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

from .dag import Role
from .data import Dataset
from .errors import InvalidMethodForScenario, UnknownScenario
from .estimators import bootstrap_ci, fit_msm, fit_ols, g_formula_msm, iptw_weights
from .estimators.ols import CoefficientReport, TermEstimate
from .scm import (
    BernoulliLinear as Bern,
    GaussianLinear as Gauss,
    StructuralModel,
    model_from_equations,
    saturated_terms,
    simulate,
    term_name,
    true_msm_coefficients,
)

MATCHES = "matches-truth"
BIASED = "biased-as-paper-claims"
MISMATCH = "mismatch"

TV_TREATMENTS = ("X1", "X2", "X3")
TV_TERMS = [term_name(t) for t in saturated_terms(TV_TREATMENTS)]


@dataclass(frozen=True)
class MethodSpec:
    """How one method is run on a scenario and which terms it is expected to get wrong.

    ``biased`` terms are expected to miss the truth; ``may_differ`` terms carry no
    specific expectation, so either outcome is acceptable.
    """

    name: str
    kind: str  # "ols", "msm-iptw" or "g-formula"
    adjust: tuple[str, ...] = ()
    biased: frozenset = frozenset()
    may_differ: frozenset = frozenset()
    label: str = ""


@dataclass
class ScenarioSpec:
    id: str
    model: StructuralModel
    observed: tuple[str, ...]
    treatments: tuple[str, ...]
    outcome: str
    truth: dict[str, float]
    anchor: str
    confounders: tuple[tuple[str, ...], ...] = ()
    methods: dict[str, MethodSpec] = field(default_factory=dict)
    default_methods: tuple[str, ...] = ()
    iptw_numerator: str = "history"
    notes: str = ""

    @property
    def terms(self) -> list[str]:
        return [term_name(t) for t in saturated_terms(self.treatments)]

    def msm_truth(self) -> dict[str, float]:
        return true_msm_coefficients(self.model, self.treatments, self.outcome)

    def truth_for(self, method: MethodSpec) -> dict[str, float]:
        return self.truth if method.kind == "ols" else self.msm_truth()

    def to_scm_dict(self) -> dict:
        from .scm import scm_to_dict

        out = scm_to_dict(self.model)
        out["scenario"] = {
            "id": self.id,
            "observed": list(self.observed),
            "treatments": list(self.treatments),
            "confounders": [list(c) for c in self.confounders],
            "outcome": self.outcome,
            "truth": self.truth,
            "anchor": self.anchor,
        }
        return out


# ---------------------------------------------------------------------------
# model definitions


def _roles(equations) -> dict[str, Role]:
    role = {"X": Role.TREATMENT, "L": Role.OBSERVED_CONFOUNDER, "W": Role.OBSERVED_CONFOUNDER,
            "U": Role.UNOBSERVED_CONFOUNDER, "O": Role.OUTCOME}
    return {v: role.get(v[0], Role.GENERIC) for v in equations}


def _model(equations) -> StructuralModel:
    return model_from_equations(equations, _roles(equations), warn=False)


def _tv_outcome(extra: dict[str, float], sigma: float = 0.2) -> Gauss:
    terms = [(("X1",), 2.0), (("X2",), 5.0), (("X3",), 6.0), (("X1", "X2"), 1.0), (("X1", "X3"), 1.0),
             (("X2", "X3"), 1.0), (("L1",), 4.0), (("L2",), 4.0), (("L3",), 3.0)]
    terms += [((k,), v) for k, v in extra.items()]
    return Gauss(0.2, terms, sigma)


_TV_TRUTH = {"intercept": 0.2, "X1": 2.0, "X2": 5.0, "X3": 6.0, "X1*X2": 1.0, "X1*X3": 1.0, "X2*X3": 1.0, "X1*X2*X3": 0.0}
_TV_CONFOUNDERS = (("L1",), ("L2",), ("L3",))
_TV_OLS = TV_TERMS + ["L1", "L2", "L3"]


def _single_posttest() -> ScenarioSpec:
    eqs = {
        "W1": Bern(0.8),
        "U1": Bern(0.4),
        "U2": Bern(0.6),
        "X": Bern(0.30, {"U1": 0.2, "U2": 0.5, "W1": -0.3}),
        "O1": Gauss(5.0, [(("X",), 7.0), (("W1",), 4.0), (("U1",), -2.0), (("U2",), -2.0)], 0.6),
    }
    both = frozenset({"intercept", "X"})
    methods = {
        "ols-none": MethodSpec("ols-none", "ols", (), both, label="Control for No Confounders"),
        "ols-w1": MethodSpec("ols-w1", "ols", ("W1",), both, label="Control for W1"),
        "ols-w1-u1": MethodSpec("ols-w1-u1", "ols", ("W1", "U1"), both, label="Control for W1 and U1"),
        "ols-w1-u1-u2": MethodSpec("ols-w1-u1-u2", "ols", ("W1", "U1", "U2"), label="Control for W1, U1 and U2"),
    }
    methods["ols"] = MethodSpec("ols", "ols", ("W1",), both, label="Control for observed confounders (W1)")
    return ScenarioSpec(
        id="single-posttest",
        model=_model(eqs),
        observed=("W1", "X", "O1"),
        treatments=("X",),
        outcome="O1",
        truth={"intercept": 5.0, "X": 7.0},
        anchor="Simulation Result for a design with a single intervention",
        confounders=(("W1", "U1", "U2"),),
        methods=methods,
        default_methods=("ols-none", "ols-w1", "ols-w1-u1", "ols-w1-u1-u2"),
        notes="U-adjusted rows read the unobserved columns on purpose.",
    )


def _tv_no_unmeasured() -> ScenarioSpec:
    eqs = {
        "L1": Bern(0.5),
        "X1": Bern(0.2, {"L1": 0.4}),
        "L2": Bern(0.2, {"L1": 0.6}),
        "X2": Bern(0.3, {"X1": 0.5, "L2": 0.2}),
        "L3": Bern(0.3, {"L2": 0.5}),
        "X3": Bern(0.3, {"X2": 0.4, "L3": 0.1}),
        "O": _tv_outcome({}),
    }
    methods = {
        "ols": MethodSpec("ols", "ols", ("L1", "L2", "L3"), label="Outcome regression"),
        "msm-iptw": MethodSpec("msm-iptw", "msm-iptw", label="MSM (IPTW)"),
        "g-formula": MethodSpec("g-formula", "g-formula", label="G-formula"),
    }
    return ScenarioSpec(
        id="tv-no-unmeasured",
        model=_model(eqs),
        observed=("L1", "X1", "L2", "X2", "L3", "X3", "O"),
        treatments=TV_TREATMENTS,
        outcome="O",
        truth=dict(_TV_TRUTH),
        anchor="Simulation Result for Time-Varying Treatments, Confounders with No Unmeasured Confounders",
        confounders=_TV_CONFOUNDERS,
        methods=methods,
        default_methods=("ols",),
    )


def _tv_unmeasured(variant: str) -> ScenarioSpec:
    u_effects = {"base": (2.0, 3.0, 1.0), "case1": (0.1, 0.2, 0.3), "case2": (8.0, 9.0, 10.0)}[variant]
    eqs = {
        "U1": Bern(0.6),
        "U2": Bern(0.6, {"U1": 0.3}),
        "U3": Bern(0.4, {"U2": 0.3}),
        "L1": Bern(0.5, {"U1": 0.4}),
        "X1": Bern(0.2, {"L1": 0.4, "U1": 0.3}),
        "L2": Bern(0.2, {"L1": 0.6, "U2": 0.1}),
        "X2": Bern(0.3, {"X1": 0.2, "L2": 0.2, "U2": 0.2}),
        "L3": Bern(0.3, {"L2": 0.5, "U3": 0.1}),
        "X3": Bern(0.1, {"X2": 0.4, "L3": 0.2, "U3": 0.2}),
        "O": _tv_outcome(dict(zip(("U1", "U2", "U3"), u_effects))),
    }
    if variant == "base":
        biased = frozenset({"intercept", "X1", "X2", "X3"})
        sid, anchor = "tv-unmeasured", "Simulation Result for Time-Varying Treatments, Confounders with Unmeasured Confounders"
    else:
        biased = frozenset({"intercept", "X1", "X2", "X3"}) if variant == "case2" else frozenset()
        sid = f"tv-unmeasured-{variant}"
        anchor = ("Simulation Result for Time-Varying Treatments, Confounders with Unmeasured Confounders "
                  "(Comparison of Case I and II)")
    # omitted confounders bias the main effects; the interactions may or may not move
    methods = {"ols": MethodSpec("ols", "ols", ("L1", "L2", "L3"), biased, frozenset(_TV_TRUTH) - biased,
                                 label="Outcome regression")}
    return ScenarioSpec(
        id=sid,
        model=_model(eqs),
        observed=("L1", "X1", "L2", "X2", "L3", "X3", "O"),
        treatments=TV_TREATMENTS,
        outcome="O",
        truth=dict(_TV_TRUTH),
        anchor=anchor,
        confounders=_TV_CONFOUNDERS,
        methods=methods,
        default_methods=("ols",),
        notes={"base": "U effects (2, 3, 1)", "case1": "small U effects (0.1, 0.2, 0.3)",
               "case2": "large U effects (8, 9, 10)"}[variant],
    )


_FEEDBACK_TRUTH = {"intercept": 2.13, "X1": -2.42, "X2": 2.3, "X3": 6.0, "X1*X2": 10.0, "X1*X3": 11.0,
                   "X2*X3": 12.0, "X1*X2*X3": 0.0}


def _tv_feedback() -> ScenarioSpec:
    # the confounders are L2 and L3 throughout; with this labelling the marginal
    # truth works out to (2.13, -2.42, 2.3, 6, 10, 11, 12, 0)
    eqs = {
        "X1": Bern(0.6),
        "L2": Bern(0.1, {"X1": 0.6}),
        "X2": Bern(0.3, {"L2": 0.7, "X1": -0.25}),
        "L3": Bern(0.2, {"L2": 0.3, "X2": 0.3}),
        "X3": Bern(0.1, {"L3": 0.3, "X2": 0.1}),
        "O": Gauss(5.0, [(("X1",), 4.0), (("X2",), 5.0), (("X3",), 6.0), (("X1", "X2"), 10.0),
                         (("X1", "X3"), 11.0), (("X2", "X3"), 12.0), (("L2",), -8.0), (("L3",), -9.0)], 0.2),
    }
    methods = {
        "ols": MethodSpec("ols", "ols", ("L2", "L3"), frozenset({"intercept", "X1", "X2"}), label="Outcome regression"),
        "msm-iptw": MethodSpec("msm-iptw", "msm-iptw", label="MSM (IPTW)"),
        "g-formula": MethodSpec("g-formula", "g-formula", label="G-formula"),
    }
    return ScenarioSpec(
        id="tv-feedback",
        model=_model(eqs),
        observed=("X1", "L2", "X2", "L3", "X3", "O"),
        treatments=TV_TREATMENTS,
        outcome="O",
        truth=dict(_FEEDBACK_TRUTH),
        anchor="Simulation Results for Time Varying Treatments and Confounders Feedback: "
               "Comparison of Outcome Regression, MSM and G-formula",
        confounders=((), ("L2",), ("L3",)),
        methods=methods,
        default_methods=("ols", "msm-iptw", "g-formula"),
        iptw_numerator="marginal",
    )


@lru_cache(maxsize=None)
def _catalog() -> tuple[ScenarioSpec, ...]:
    return (
        _single_posttest(),
        _tv_no_unmeasured(),
        _tv_unmeasured("base"),
        _tv_unmeasured("case1"),
        _tv_unmeasured("case2"),
        _tv_feedback(),
    )


def catalog() -> list[ScenarioSpec]:
    return list(_catalog())


def get_scenario(scenario_id: str) -> ScenarioSpec:
    for spec in _catalog():
        if spec.id == scenario_id:
            return spec
    raise UnknownScenario(f"unknown scenario {scenario_id!r}; choose from {[s.id for s in _catalog()]}")


# ---------------------------------------------------------------------------
# running methods


def observed_data(spec: ScenarioSpec, data: Dataset, method: MethodSpec | None = None) -> Dataset:
    """Apply the observability mask; an adjustment row naming hidden columns keeps them."""
    cols = list(spec.observed)
    if method is not None:
        cols += [c for c in method.adjust if c not in cols]
    return data.select([c for c in spec.model.nodes if c in cols])


def method_estimator(spec: ScenarioSpec, method: MethodSpec):
    """Dataset -> CoefficientReport for one method (used for point fits and bootstrap replicates)."""
    treat_terms = spec.terms
    if method.kind == "ols":
        terms = treat_terms + list(method.adjust)

        def estimate(data: Dataset) -> CoefficientReport:
            rep = fit_ols(data, spec.outcome, terms)
            return CoefficientReport([t for t in rep.terms if t.name in spec.truth], rep.n, rep.residual_variance)

    elif method.kind == "msm-iptw":

        def estimate(data: Dataset) -> CoefficientReport:
            w = iptw_weights(data, spec.treatments, spec.confounders, numerator=spec.iptw_numerator)
            rep = fit_msm(data, w, spec.outcome, treat_terms)
            rep.extra["mean_sw"] = w.mean_stabilized
            return rep

    elif method.kind == "g-formula":
        # confounder transitions condition on observed DAG parents; the outcome mean is
        # the outcome regression, so regimes never followed in the data stay estimable
        outcome_terms = treat_terms + [c for cs in spec.confounders for c in cs]

        def estimate(data: Dataset) -> CoefficientReport:
            res = g_formula_msm(data, spec.treatments, [list(c) for c in spec.confounders], spec.outcome,
                                dag=spec.model.dag, outcome_terms=outcome_terms)
            return CoefficientReport([TermEstimate(k, v) for k, v in res.coefficients.items()], data.n)

    else:
        raise InvalidMethodForScenario(method.kind)
    return estimate


@dataclass
class ReproductionRow:
    term: str
    true_value: float
    method: str
    estimate: float
    ci_low: float | None
    ci_high: float | None
    verdict: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verdict_for(term: str, truth: float, est: TermEstimate, method: MethodSpec, tolerance: float) -> str:
    close = est.covers(truth) if est.has_interval else abs(est.estimate - truth) <= tolerance
    if term in method.biased:
        return MISMATCH if close else BIASED
    if close:
        return MATCHES
    return BIASED if term in method.may_differ else MISMATCH


def reproduce(
    scenario_id: str,
    methods=None,
    n: int = 500,
    seed: int = 0,
    B: int = 0,
    level: float = 0.95,
    tolerance: float = 0.3,
) -> list[ReproductionRow]:
    """Simulate, mask, estimate with each method and compare every term with the truth.

    ``B = 0`` skips the bootstrap and judges terms by ``tolerance``; otherwise a term
    matches when the truth lies in its percentile interval.
    """
    spec = get_scenario(scenario_id)
    names = list(methods) if methods else list(spec.default_methods)
    for name in names:
        if name not in spec.methods:
            raise InvalidMethodForScenario(
                f"method {name!r} is not available for {spec.id}; choose from {sorted(spec.methods)}"
            )
    full = simulate(spec.model, n, seed)
    rows = []
    for name in names:
        method = spec.methods[name]
        data = observed_data(spec, full, method)
        estimator = method_estimator(spec, method)
        report = bootstrap_ci(data, estimator, B=B, level=level, seed=seed) if B else estimator(data)
        truth = spec.truth_for(method)
        for term in spec.truth:
            est = report[term]
            rows.append(ReproductionRow(term, truth[term], name, est.estimate, est.ci_low, est.ci_high,
                                        verdict_for(term, truth[term], est, method, tolerance)))
    return rows


def reproduction_ok(rows) -> bool:
    return all(r.verdict in (MATCHES, BIASED) for r in rows)


def render_rows(rows) -> str:
    header = ["method", "term", "true", "estimate", "ci_low", "ci_high", "verdict"]
    body = [[r.method, r.term, f"{r.true_value:.4f}", f"{r.estimate:.4f}",
             "-" if r.ci_low is None else f"{r.ci_low:.4f}", "-" if r.ci_high is None else f"{r.ci_high:.4f}",
             r.verdict] for r in rows]
    table = [header] + body
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table]
    return "\n".join(lines) + "\n"


def rows_to_json(rows) -> str:
    return json.dumps([r.to_dict() for r in rows], indent=2)
