"""Ground decision procedure, hierarchic models and model extrapolation."""

from __future__ import annotations

from .dpll import Dpll
from .lia import evaluate_constraint, feasible_rows, lia_feasible
from .model import (
    Cell,
    HierarchicModel,
    Partition,
    VerifyReport,
    extrapolate_model,
    make_partition,
    sample_uniformity,
    verify_model,
)
from .solver import GroundTheory, Verdict, solve_ground

__all__ = [
    "Cell",
    "Dpll",
    "GroundTheory",
    "HierarchicModel",
    "Partition",
    "Verdict",
    "VerifyReport",
    "evaluate_constraint",
    "extrapolate_model",
    "feasible_rows",
    "lia_feasible",
    "make_partition",
    "sample_uniformity",
    "solve_ground",
    "verify_model",
]
