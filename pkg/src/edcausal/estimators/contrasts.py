"""Average effect contrasts computed directly from simulated potential outcomes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptySubgroup
from ..scm import PotentialOutcomeTable


@dataclass
class Contrasts:
    ate: float
    att: float
    atu: float
    cate: float | None = None


def po_contrasts(po: PotentialOutcomeTable, subgroup: str | None = None) -> Contrasts:
    """ATE, ATT, ATU and (with a binary ``subgroup`` column of the factual data) CATE."""
    if len(po.treatments) != 1:
        raise ValueError("contrasts need exactly one binary treatment")
    effect = po.column((1,)) - po.column((0,))
    treated = po.factual[po.treatments[0]] == 1
    if not treated.any() or treated.all():
        raise EmptySubgroup("need both treated and untreated units")
    cate = None
    if subgroup is not None:
        member = po.factual[subgroup] == 1
        if not member.any():
            raise EmptySubgroup(f"no units with {subgroup} = 1")
        cate = float(effect[member].mean())
    return Contrasts(
        ate=float(effect.mean()),
        att=float(effect[treated].mean()),
        atu=float(effect[~treated].mean()),
        cate=cate,
    )
