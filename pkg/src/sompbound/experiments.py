"""Scenario runners behind the command line interface.

Every runner is deterministic in ``ExperimentSpec.seed``: trial ``i`` uses
instance seed ``seed + i``, and rows are emitted in (K, trial, t) order, so
re-running a spec reproduces its CSV byte for byte.
"""
import enum
import io
import os
from dataclasses import dataclass, field
from math import ceil, isnan, sqrt
from statistics import median
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ._config import DEFAULT
from .bounds import CSV_COLUMNS, BoundReport, bound_reports, ratio_r, remark1_certificate, report_row
from .exceptions import BudgetError, DomainError, SompBoundError
from .model import Scenario, make_instance, save_instance
from .pursuit import PursuitConfig, somp
from .rip import ric_exact, subset_deviation


class Experiment(str, enum.Enum):
    CASE1 = "case1"
    CASE2 = "case2"
    CASE3 = "case3"
    CASE4 = "case4"
    SOUNDNESS = "soundness"
    FIGURE1 = "figure1"


# delta sources: the exact RIC of the whole matrix, the isometry constant of
# the true support only (never larger, and all the proofs use), or a grid
DELTA_EXACT = "exact"
DELTA_SUPPORT = "support"

FIGURE1_K = tuple(range(1, 65))
FIGURE1_JT = (1, 2, 4, 9, 16)
FIGURE1_DELTAS = (0.1, 0.3, 0.5, 0.7)


class TrialError(SompBoundError):
    """A module error raised inside one trial, tagged with its seed."""

    def __init__(self, message, seed, K):
        super().__init__(message)
        self.seed = seed
        self.K = K


@dataclass
class ExperimentSpec:
    experiment: Experiment
    m: int = 32
    n: int = 64
    K: Tuple[int, ...] = (1, 4, 16)
    s: int = 5
    trials: int = 100
    seed: int = 0
    delta_source: Union[str, Tuple[float, ...]] = DELTA_SUPPORT
    output_dir: Optional[str] = None
    matrix: str = "gaussian"
    factor: float = 1e6
    mu: float = 1.0
    save_instances: bool = False

    def __post_init__(self):
        self.experiment = Experiment(self.experiment)
        self.K = tuple(int(k) for k in (self.K if isinstance(self.K, (tuple, list)) else (self.K,)))
        if self.experiment is Experiment.FIGURE1:
            return
        if self.m < 1 or self.n < 1:
            raise DomainError(f"need m, n >= 1, got m={self.m}, n={self.n}")
        if not 1 <= self.s <= self.n:
            raise DomainError(f"need 1 <= s <= n, got s={self.s}, n={self.n}")
        if self.trials < 1:
            raise DomainError(f"need trials >= 1, got {self.trials}")
        if any(k < 1 for k in self.K):
            raise DomainError(f"K values must be >= 1, got {self.K}")
        if self.experiment is Experiment.CASE4 or self.matrix == "orthonormal":
            if self.n > self.m:
                raise DomainError(f"orthonormal dictionaries need n <= m, got m={self.m}, n={self.n}")
        if not isinstance(self.delta_source, str):
            grid = tuple(float(d) for d in self.delta_source)
            if not grid or any(not 0.0 <= d < 1.0 for d in grid):
                raise DomainError(f"hypothetical delta grid must lie in [0, 1), got {grid}")
            self.delta_source = grid
        elif self.delta_source not in (DELTA_EXACT, DELTA_SUPPORT):
            raise DomainError(f"unknown delta source {self.delta_source!r}")


@dataclass
class CaseRow:
    """One bound report plus the bookkeeping of the trial it came from."""

    K: int
    trial: int
    seed: int
    pattern: str
    report: BoundReport
    delta_true: float
    # delta >= the support's own isometry constant and < 1
    hypothesis_ok: bool
    # the iteration satisfies the case's assumption (e.g. dominant row still missing)
    case_valid: bool
    # closed-form value the case predicts for ratio_r, NaN when none
    expected_r: float = float("nan")
    verdict: Optional[bool] = None
    remark1_gap: float = float("nan")


@dataclass
class Summary:
    experiment: str
    n_trials: int = 0
    n_rip_ok: int = 0
    n_reports: int = 0
    n_valid: int = 0
    n_verdict_pass: int = 0
    n_verdict_fail: int = 0
    violations: List[Tuple[int, int, int, str, float]] = field(default_factory=list)
    min_slack_thm1: float = float("inf")
    min_slack_thm2: float = float("inf")
    median_slack_thm1: float = float("nan")
    median_slack_thm2: float = float("nan")
    tightness_min: float = float("nan")
    tightness_median: float = float("nan")
    tightness_max: float = float("nan")
    frac_ratio_gt_1: float = float("nan")
    max_remark1_gap: float = float("nan")

    @property
    def passed(self):
        return not self.violations and self.n_verdict_fail == 0

    def as_dict(self):
        out = {k: v for k, v in self.__dict__.items() if k != "violations"}
        out["n_violations"] = len(self.violations)
        out["violations"] = ";".join(f"K={k}:seed={s}:t={t}:{w}:{v:.3e}" for k, s, t, w, v in self.violations)
        out["passed"] = self.passed
        return out


@dataclass
class CaseResult:
    spec: ExperimentSpec
    rows: List[CaseRow]
    summary: Summary


# -- per-trial machinery -----------------------------------------------------

def _deltas_for(instance, spec):
    """``[(delta, source)]`` to evaluate, plus the support's own isometry constant."""
    own = subset_deviation(instance.phi, instance.support)
    if own <= DEFAULT.isometry:
        own = 0.0
    if isinstance(spec.delta_source, tuple):
        return [(d, "grid") for d in spec.delta_source], own
    if spec.delta_source == DELTA_EXACT:
        table = ric_exact(instance.phi, len(instance.support))
        d = table.delta(len(instance.support))
        return [(0.0 if d <= DEFAULT.isometry else d, DELTA_EXACT)], own
    return [(own, DELTA_SUPPORT)], own


def _trial_rows(spec, scenario, K, trial, pattern_name):
    seed = spec.seed + trial
    try:
        instance = make_instance(scenario, spec.m, spec.n, K, spec.s, seed,
                                 factor=spec.factor, mu=spec.mu)
        if spec.save_instances and spec.output_dir:
            save_instance(instance, os.path.join(
                spec.output_dir, "instances", f"{spec.experiment.value}_K{K}_{pattern_name}_seed{seed}"))
        trace = somp(instance.y, instance.phi, PursuitConfig(n_iterations=spec.s),
                     true_support=instance.support)
        deltas, own = _deltas_for(instance, spec)
        rows = []
        for delta, source in deltas:
            if delta >= 1.0:
                continue
            for rep in bound_reports(instance, trace, delta, source):
                rows.append(CaseRow(
                    K=K, trial=trial, seed=seed, pattern=pattern_name, report=rep,
                    delta_true=own, hypothesis_ok=delta >= own,
                    case_valid=True,
                ))
        return instance, trace, rows, own < 1.0
    except BudgetError:
        raise
    except SompBoundError as exc:
        raise TrialError(f"trial {trial} (seed {seed}, K={K}): {exc}", seed, K) from exc


def _soundness(rows, summary, tol=DEFAULT):
    slack1, slack2, tight, ratios = [], [], [], []
    for row in rows:
        rep = row.report
        if not row.hypothesis_ok:
            continue
        s1, s2 = rep.slack(1), rep.slack(2)
        slack1.append(s1)
        slack2.append(s2)
        if rep.thm1_bound > 0:
            tight.append(rep.exact_metric / rep.thm1_bound)
        if rep.ratio_defined:
            ratios.append(rep.ratio_r)
        # slack is absolute for O(1) signals; scale it with the signal otherwise
        allowed = tol.soundness_slack * max(1.0, rep.thm1_tau)
        for which, s in (("thm1", s1), ("thm2", s2)):
            if s < -allowed:
                summary.violations.append((row.K, row.seed, rep.t, which, s))
    if slack1:
        summary.min_slack_thm1 = min(slack1)
        summary.min_slack_thm2 = min(slack2)
        summary.median_slack_thm1 = median(slack1)
        summary.median_slack_thm2 = median(slack2)
    if tight:
        summary.tightness_min = min(tight)
        summary.tightness_median = median(tight)
        summary.tightness_max = max(tight)
    if ratios:
        summary.frac_ratio_gt_1 = sum(r > 1.0 for r in ratios) / len(ratios)


def _finish(spec, rows, summary):
    summary.n_reports = len(rows)
    summary.n_valid = sum(r.case_valid for r in rows)
    summary.n_verdict_pass = sum(r.verdict is True for r in rows)
    summary.n_verdict_fail = sum(r.verdict is False for r in rows)
    gaps = [r.remark1_gap for r in rows if not isnan(r.remark1_gap)]
    if gaps:
        summary.max_remark1_gap = max(gaps)
    _soundness(rows, summary)
    result = CaseResult(spec, rows, summary)
    if spec.output_dir:
        write_case_outputs(result, spec.output_dir)
    return result


# -- the four cases ----------------------------------------------------------

def _case1(spec, row, instance):
    rep = row.report
    row.case_valid = instance.dominant_row in rep.J_t
    if row.case_valid:
        root_j = sqrt(rep.Jt_size)
        # right-hand side of the dominant-row estimate
        row.expected_r = root_j * (1 + rep.delta) / (1 + root_j * rep.delta)
        row.verdict = rep.ratio_r > 1.0


def _case2(spec, row, instance):
    rep = row.report
    row.expected_r = sqrt(row.K) * (1 + rep.delta) / (1 + sqrt(rep.Jt_size) * rep.delta)
    match = abs(rep.ratio_r - row.expected_r) <= 1e-12 * max(1.0, row.expected_r)
    if row.K == 1:
        row.case_valid = rep.Jt_size > 1 and rep.delta > 0
        row.verdict = (rep.ratio_r < 1.0 and match) if row.case_valid else None
    else:
        row.verdict = match


def _case3(spec, row, instance):
    rep = row.report
    row.case_valid = rep.Jt_size == 1
    if not row.case_valid:
        return
    x_row = instance.x[rep.J_t[0]]
    direct = float(np.sum(np.abs(x_row)) / np.sqrt(np.sum(x_row * x_row)))
    ok = abs(rep.ratio_r - direct) <= 1e-12
    if row.pattern == Scenario.IDENTICAL_MAGNITUDES.value:
        row.expected_r = sqrt(row.K)
        ok = ok and abs(rep.ratio_r - row.expected_r) <= 1e-12
    else:
        row.expected_r = direct
    row.verdict = ok


def _case4(spec, row, instance, trace):
    rep = row.report
    cert = remark1_certificate(instance, trace, rep.t)
    row.remark1_gap = cert.gap
    row.verdict = cert.holds and rep.ratio_r >= 1.0 - 1e-12


def run_case(spec):
    """Run one of the four comparison scenarios and summarize the verdicts.

    Each trial draws an instance of the scenario, runs SOMP for ``spec.s``
    iterations and evaluates both bounds at every iteration that picked only
    correct atoms so far.  ``Summary.violations`` lists any iteration where a
    bound exceeded the exact metric by more than the soundness slack.
    """
    exp = spec.experiment
    if exp is Experiment.CASE1:
        plan = [Scenario.DOMINANT_ROW]
    elif exp is Experiment.CASE2:
        plan = [Scenario.IDENTICAL_MAGNITUDES]
    elif exp is Experiment.CASE3:
        plan = [Scenario.GENERIC_RANDOM, Scenario.IDENTICAL_MAGNITUDES]
    elif exp is Experiment.CASE4:
        plan = [Scenario.ORTHONORMAL]
    else:
        raise DomainError(f"run_case does not handle {exp.value}; see soundness_campaign / figure1_grid")

    summary = Summary(exp.value)
    rows = []
    for K in spec.K:
        for trial in range(spec.trials):
            for scenario in plan:
                instance, trace, trial_rows, rip_ok = _trial_rows(spec, scenario, K, trial, scenario.value)
                summary.n_trials += 1
                summary.n_rip_ok += rip_ok
                for row in trial_rows:
                    if exp is Experiment.CASE1:
                        _case1(spec, row, instance)
                    elif exp is Experiment.CASE2:
                        _case2(spec, row, instance)
                    elif exp is Experiment.CASE3:
                        _case3(spec, row, instance)
                    else:
                        _case4(spec, row, instance, trace)
                rows.extend(trial_rows)
    return _finish(spec, rows, summary)


def soundness_campaign(spec):
    """Randomized certification that neither bound ever exceeds the exact metric.

    Uses Gaussian (or, with ``spec.matrix == "orthonormal"``, orthonormal)
    dictionaries with generic random coefficients.  Iterations after SOMP
    picks a wrong atom are outside the theorems' hypothesis and are skipped,
    as are instances whose support violates the RIP (delta >= 1).
    """
    scenario = Scenario.ORTHONORMAL if spec.matrix == "orthonormal" else Scenario.GENERIC_RANDOM
    summary = Summary(Experiment.SOUNDNESS.value)
    rows = []
    for K in spec.K:
        for trial in range(spec.trials):
            instance, trace, trial_rows, rip_ok = _trial_rows(spec, scenario, K, trial, scenario.value)
            summary.n_trials += 1
            summary.n_rip_ok += rip_ok
            if scenario is Scenario.ORTHONORMAL:
                for row in trial_rows:
                    _case4(spec, row, instance, trace)
            rows.extend(trial_rows)
    return _finish(spec, rows, summary)


# -- Figure 1 ----------------------------------------------------------------

@dataclass
class Figure1Result:
    # (K, |J_t|, delta, r from ratio_r on an identical-magnitude block, closed form)
    rows: List[Tuple[int, int, float, float, float]]
    # smallest K in the grid with r >= 1, or None if the grid never crosses
    crossing: Dict[Tuple[int, float], Optional[int]]
    # smallest integer K satisfying K >= ((1 + sqrt|J| delta) / (1 + delta))^2
    crossing_closed_form: Dict[Tuple[int, float], int]


def equal_magnitude_ratio(K, jt_size, delta):
    """Ratio for identical-magnitude rows: ``sqrt(K)(1 + delta)/(1 + sqrt(|J|) delta)``."""
    return sqrt(K) * (1.0 + delta) / (1.0 + sqrt(jt_size) * delta)


def equal_magnitude_crossing(jt_size, delta):
    """Smallest integer K with ``equal_magnitude_ratio >= 1``."""
    bound = ((1.0 + sqrt(jt_size) * delta) / (1.0 + delta)) ** 2
    k = max(1, ceil(bound))
    # guard against ceil landing one too high or low through rounding of ``bound``
    while k > 1 and equal_magnitude_ratio(k - 1, jt_size, delta) >= 1.0:
        k -= 1
    while equal_magnitude_ratio(k, jt_size, delta) < 1.0:
        k += 1
    return k


def figure1_grid(K_values=FIGURE1_K, jt_sizes=FIGURE1_JT, deltas=FIGURE1_DELTAS):
    """Tabulate the identical-magnitude ratio over a (K, |J_t|, delta) grid.

    ``r`` is obtained by running :func:`sompbound.bounds.ratio_r` on an
    all-ones ``|J_t| x K`` block; the closed form is reported next to it.
    """
    K_values = sorted(int(k) for k in K_values)
    jt_sizes = sorted(int(j) for j in jt_sizes)
    deltas = [float(d) for d in deltas]
    if any(not 0.0 <= d < 1.0 for d in deltas):
        raise DomainError(f"deltas must lie in [0, 1), got {deltas}")
    if any(k < 1 for k in K_values) or any(j < 1 for j in jt_sizes):
        raise DomainError("K and |J_t| values must be >= 1")
    rows = []
    crossing = {}
    closed = {}
    for jt in jt_sizes:
        for delta in deltas:
            first = None
            for K in K_values:
                block = np.ones((jt, K))
                r = ratio_r(delta, jt, jt, block).r
                rows.append((K, jt, delta, r, equal_magnitude_ratio(K, jt, delta)))
                if first is None and r >= 1.0:
                    first = K
            crossing[(jt, delta)] = first
            closed[(jt, delta)] = equal_magnitude_crossing(jt, delta)
    return Figure1Result(rows, crossing, closed)


def figure1_csv(result):
    buf = io.StringIO()
    buf.write("K,Jt_size,delta,r,r_closed_form\n")
    for K, jt, delta, r, rc in result.rows:
        buf.write(f"{K},{jt},{delta:.17g},{r:.17g},{rc:.17g}\n")
    return buf.getvalue()


def figure1_crossings_csv(result):
    buf = io.StringIO()
    buf.write("Jt_size,delta,first_K_in_grid,K_closed_form\n")
    for (jt, delta), k in sorted(result.crossing.items()):
        buf.write(f"{jt},{delta:.17g},{'' if k is None else k},{result.crossing_closed_form[(jt, delta)]}\n")
    return buf.getvalue()


def figure1_gnuplot(result, data_file="figure1.csv"):
    """Gnuplot script drawing one r(K) curve per (|J_t|, delta) and the r = 1 line."""
    pairs = sorted({(jt, delta) for _, jt, delta, _, _ in result.rows})
    plots = [
        f"'{data_file}' using 1:($2=={jt} && abs($3-{delta!r})<1e-12 ? $4 : 1/0) "
        f"with linespoints title '|J_t|={jt}, delta={delta:g}'"
        for jt, delta in pairs
    ]
    plots.append("1 with lines dashtype 4 linecolor rgb 'red' title 'r = 1'")
    return "\n".join([
        "set datafile separator ','",
        "set key outside right",
        "set xlabel 'K'",
        "set ylabel 'r'",
        "set terminal pngcairo size 1000,600",
        "set output 'figure1.png'",
        "plot " + ", \\\n     ".join(plots),
        "",
    ])


# -- output ------------------------------------------------------------------

ROW_PREFIX = ("K", "trial", "seed", "pattern", "delta_source", "hypothesis_ok", "case_valid")
ROW_SUFFIX = ("expected_r", "verdict", "remark1_gap")


def case_csv(rows):
    buf = io.StringIO()
    buf.write(",".join(ROW_PREFIX + CSV_COLUMNS + ROW_SUFFIX) + "\n")
    for row in rows:
        pre = [row.K, row.trial, row.seed, row.pattern, row.report.delta_source,
               int(row.hypothesis_ok), int(row.case_valid)]
        verdict = "" if row.verdict is None else int(row.verdict)
        post = [f"{row.expected_r:.17g}", verdict, f"{row.remark1_gap:.17g}"]
        buf.write(",".join(str(v) for v in pre + report_row(row.report) + post) + "\n")
    return buf.getvalue()


def summary_text(summary):
    lines = []
    for key, value in summary.as_dict().items():
        if isinstance(value, float):
            value = f"{value:.17g}"
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def write_case_outputs(result, output_dir):
    os.makedirs(output_dir, exist_ok=True)
    name = result.summary.experiment
    with open(os.path.join(output_dir, f"{name}_reports.csv"), "w", encoding="ascii") as fh:
        fh.write(case_csv(result.rows))
    with open(os.path.join(output_dir, f"{name}_summary.txt"), "w", encoding="ascii") as fh:
        fh.write(summary_text(result.summary))


def write_figure1_outputs(result, output_dir):
    os.makedirs(output_dir, exist_ok=True)
    with open(os.path.join(output_dir, "figure1.csv"), "w", encoding="ascii") as fh:
        fh.write(figure1_csv(result))
    with open(os.path.join(output_dir, "figure1_crossings.csv"), "w", encoding="ascii") as fh:
        fh.write(figure1_crossings_csv(result))
    with open(os.path.join(output_dir, "figure1.gp"), "w", encoding="ascii") as fh:
        fh.write(figure1_gnuplot(result))
