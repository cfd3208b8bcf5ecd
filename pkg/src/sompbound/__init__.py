"""Simultaneous orthogonal matching pursuit and lower bounds on its correct-atom metric."""
from ._config import DEFAULT, Tolerances
from .bounds import (
    BoundReport,
    bound_report,
    bound_reports,
    exact_metric,
    lemma1_bound,
    ratio_r,
    remark1_certificate,
    theorem1_bound,
    theorem2_bound,
)
from .model import MmvInstance, Scenario, assemble_instance, make_instance
from .pursuit import SOMP, PursuitConfig, PursuitTrace, residual_update, selection_metric, somp
from .rip import RicTable, gram_spectrum_bounds, ric_exact

__version__ = "0.1.0"

__all__ = [
    "DEFAULT",
    "Tolerances",
    "BoundReport",
    "bound_report",
    "bound_reports",
    "exact_metric",
    "lemma1_bound",
    "ratio_r",
    "remark1_certificate",
    "theorem1_bound",
    "theorem2_bound",
    "MmvInstance",
    "Scenario",
    "assemble_instance",
    "make_instance",
    "SOMP",
    "PursuitConfig",
    "PursuitTrace",
    "residual_update",
    "selection_metric",
    "somp",
    "RicTable",
    "gram_spectrum_bounds",
    "ric_exact",
]
