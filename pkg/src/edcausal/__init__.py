"""Causal DAGs, structural simulation and joint-intervention effect estimation."""
from .dag import CausalDag, PathWitness, Role, backdoor_paths, build_dag, d_separated, intervene, is_valid_adjustment_set
from .data import Dataset
from .scm import (
    BernoulliLinear,
    Constant,
    GaussianLinear,
    StructuralModel,
    apply_intervention,
    build_scm,
    potential_outcomes,
    simulate,
    true_msm_coefficients,
)

__version__ = "0.1.0"
