"""Symmetric full-correlation Bell expressions: construction, exact and closed-form bounds."""

from .scenario import (
    BellExpression,
    CoefficientFunction,
    ExpandedTensor,
    Scenario,
    SubExpression,
    build_general,
    build_omega,
    correlator_form,
    decompose,
    expand,
    reduce_to_bkp,
    reduce_to_svetlichny_cglmp,
)
from .combinatorial import BoundReport, g_group_bound, local_bound, svetlichny_bound
from .analytic import diew_bound_binary, lemma1_max, tsirelson_bound_binary
from .behaviors import Behavior, classify, evaluate, ingest

__all__ = [
    "Behavior",
    "BellExpression",
    "BoundReport",
    "CoefficientFunction",
    "ExpandedTensor",
    "Scenario",
    "SubExpression",
    "build_general",
    "build_omega",
    "classify",
    "correlator_form",
    "decompose",
    "diew_bound_binary",
    "evaluate",
    "expand",
    "g_group_bound",
    "ingest",
    "lemma1_max",
    "local_bound",
    "reduce_to_bkp",
    "reduce_to_svetlichny_cglmp",
    "svetlichny_bound",
    "tsirelson_bound_binary",
]
