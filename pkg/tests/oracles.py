"""Brute-force reference computations used to check the library.

Nothing here calls the d-separation, simulation or estimation code under test.
"""
from __future__ import annotations

import itertools

import numpy as np

from edcausal.scm import BernoulliLinear, Constant, GaussianLinear


def random_dag(rng: np.random.Generator, n_nodes: int, p_edge: float = 0.5):
    """Random DAG over nodes V0..V{k-1}; edges only go from lower to higher index."""
    nodes = [f"V{i}" for i in range(n_nodes)]
    edges = [(nodes[i], nodes[j]) for i in range(n_nodes) for j in range(i + 1, n_nodes) if rng.random() < p_edge]
    return nodes, edges


def random_cpts(rng: np.random.Generator, nodes, edges):
    """Generic conditional probability tables: P(v=1 | parent bits) uniform in (0.05, 0.95)."""
    parents = {v: [a for a, b in edges if b == v] for v in nodes}
    return parents, {
        v: {bits: rng.uniform(0.05, 0.95) for bits in itertools.product((0, 1), repeat=len(parents[v]))}
        for v in nodes
    }


def joint_table(nodes, parents, cpts) -> dict[tuple[int, ...], float]:
    """Exact joint distribution over all 2^k configurations (nodes listed in topological order)."""
    index = {v: i for i, v in enumerate(nodes)}
    joint = {}
    for config in itertools.product((0, 1), repeat=len(nodes)):
        prob = 1.0
        for v in nodes:
            key = tuple(config[index[p]] for p in parents[v])
            p1 = cpts[v][key]
            prob *= p1 if config[index[v]] == 1 else 1.0 - p1
        joint[config] = prob
    return joint


def numerically_independent(nodes, joint, x, y, given, tol=1e-9) -> bool:
    """|P(x,y|z) - P(x|z)P(y|z)| < tol in every stratum z with P(z) > 0."""
    index = {v: i for i, v in enumerate(nodes)}
    given = list(given)
    for zbits in itertools.product((0, 1), repeat=len(given)):
        cell = {}
        for config, p in joint.items():
            if all(config[index[g]] == b for g, b in zip(given, zbits)):
                key = (config[index[x]], config[index[y]])
                cell[key] = cell.get(key, 0.0) + p
        pz = sum(cell.values())
        if pz <= 0:
            continue
        for a in (0, 1):
            for b in (0, 1):
                pxy = cell.get((a, b), 0.0) / pz
                px = (cell.get((a, 0), 0.0) + cell.get((a, 1), 0.0)) / pz
                py = (cell.get((0, b), 0.0) + cell.get((1, b), 0.0)) / pz
                if abs(pxy - px * py) >= tol:
                    return False
    return True


def enumerate_model(model, outcome):
    """Exact distribution of a structural model with binary nodes and a Gaussian/binary outcome.

    Returns ``(binary_nodes, rows, probs, outcome_means)``: one row per configuration
    of the binary nodes, its probability, and E[outcome | configuration].
    """
    binary = [v for v in model.nodes if v != outcome]
    rows, probs, means = [], [], []
    for config in itertools.product((0, 1), repeat=len(binary)):
        values = dict(zip(binary, config))
        prob = 1.0
        for v in binary:
            eq = model.equations[v]
            if isinstance(eq, Constant):
                prob *= 1.0 if values[v] == eq.value else 0.0
            else:
                p1 = eq.intercept + sum(c * values[p] for p, c in eq.coefficients.items())
                prob *= p1 if values[v] == 1 else 1.0 - p1
        eq = model.equations[outcome]
        if isinstance(eq, GaussianLinear):
            mean = eq.intercept + sum(c * np.prod([values[p] for p in ps]) for ps, c in eq.terms)
        elif isinstance(eq, BernoulliLinear):
            mean = eq.intercept + sum(c * values[p] for p, c in eq.coefficients.items())
        else:
            mean = eq.value
        rows.append(config)
        probs.append(prob)
        means.append(mean)
    return binary, np.array(rows), np.array(probs), np.array(means)


def expected_outcome(model, outcome) -> float:
    _, _, probs, means = enumerate_model(model, outcome)
    return float(probs @ means)


def linear_probability(rng: np.random.Generator, parents) -> BernoulliLinear:
    """Random linear-probability equation that stays inside [0.05, 0.95] on every parent pattern."""
    coefs = rng.uniform(-1, 1, size=len(parents))
    lo, hi = coefs[coefs < 0].sum(), coefs[coefs > 0].sum()
    if hi - lo > 0.85:
        coefs *= 0.85 / (hi - lo)
        lo, hi = coefs[coefs < 0].sum(), coefs[coefs > 0].sum()
    intercept = rng.uniform(0.05 - lo, 0.95 - hi)
    return BernoulliLinear(float(intercept), {p: float(c) for p, c in zip(parents, coefs)})


def random_binary_scm(rng: np.random.Generator, n_nodes: int):
    """Random all-binary SCM laid out as [C.., X, C.., X, Y] in topological order.

    Returns ``(model, treatments, confounders_per_time, outcome)``. The node just
    before the outcome is always a treatment, so every non-outcome node belongs to
    some time point.
    """
    from edcausal.dag import build_dag
    from edcausal.scm import build_scm

    names = [f"V{i}" for i in range(n_nodes - 1)] + ["Y"]
    edges = [(names[i], names[j]) for i in range(n_nodes) for j in range(i + 1, n_nodes) if rng.random() < 0.6]
    body = names[:-1]
    is_treatment = [bool(rng.random() < 0.5) for _ in body]
    is_treatment[-1] = True
    treatments, confounders, pending = [], [], []
    for v, flag in zip(body, is_treatment):
        if flag:
            treatments.append(v)
            confounders.append(tuple(pending))
            pending = []
        else:
            pending.append(v)
    equations = {v: linear_probability(rng, [a for a, b in edges if b == v]) for v in names}
    model = build_scm(build_dag(names, edges), equations, warn=False)
    return model, treatments, confounders, "Y"


def enumerated_dataset(model, outcome):
    """Every configuration of the non-outcome nodes as a row, with E[outcome | row] and its probability."""
    from edcausal.data import BINARY, CONTINUOUS, Dataset

    binary, rows, probs, means = enumerate_model(model, outcome)
    columns = {v: rows[:, j] for j, v in enumerate(binary)}
    columns[outcome] = means
    kinds = {v: BINARY for v in binary}
    kinds[outcome] = CONTINUOUS
    return Dataset(columns, kinds), probs
