from .bootstrap import bootstrap_ci
from .contrasts import Contrasts, po_contrasts
from .gformula import (
    AdjustedMeans,
    GFormulaResult,
    PositivityReport,
    PositivityStratum,
    g_formula,
    g_formula_msm,
    history_columns,
    positivity_check,
    standardize,
)
from .ols import CoefficientReport, TermEstimate, design_matrix, fit_ols, least_squares, parse_term
from .quasi import its_segmented, rd_estimate
from .weighting import WeightVector, fit_msm, iptw_weights, weighted_cov

__all__ = [
    "AdjustedMeans",
    "CoefficientReport",
    "Contrasts",
    "GFormulaResult",
    "PositivityReport",
    "PositivityStratum",
    "TermEstimate",
    "WeightVector",
    "bootstrap_ci",
    "design_matrix",
    "fit_msm",
    "fit_ols",
    "g_formula",
    "g_formula_msm",
    "history_columns",
    "iptw_weights",
    "its_segmented",
    "least_squares",
    "parse_term",
    "po_contrasts",
    "positivity_check",
    "rd_estimate",
    "standardize",
    "weighted_cov",
]
