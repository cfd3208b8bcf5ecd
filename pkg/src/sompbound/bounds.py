"""Lower bounds on the largest SOMP score among correct atoms.

Assume SOMP has picked only correct atoms so far (``S_t`` within the true
support ``S``) and let ``J_t = S \\ S_t`` be the correct atoms still missing.
The quantity of interest is the *exact metric*

    ||Phi_S^T R_t||_{inf->inf} = max_{j in S} sum_k |<r_k, phi_j>|.

With ``delta = delta_|S| < 1`` and ``X_J`` the rows of ``X`` indexed by
``J_t`` it is bounded below by

* the RIP / infinity-norm bound
  ``(1 - delta)(1 + delta) / (1 + sqrt(|J_t|) delta) * ||X_J||_{inf->inf}``;
* the Frobenius bound ``(1 - delta) * ||X_J||_F / sqrt(|J_t|)``.

Their ratio ``r`` says which is sharper.  All functions take ``delta`` as an
explicit argument so the same code serves exact RICs and hypothetical grids.
"""
import csv
from dataclasses import dataclass, fields
from math import isnan, nan, sqrt
from typing import NamedTuple, Tuple

import numpy as np

from ._config import DEFAULT
from ._validation import check_matrix
from .exceptions import DimensionError, DomainError, NotApplicableError, RipViolationError
from .linalg import norm_frobenius, norm_inf_to_inf, sym_eigen

__all__ = [
    "BoundReport",
    "lemma1_bound",
    "lemma1_alpha",
    "inverse_gram_bound",
    "exact_metric",
    "theorem1_bound",
    "theorem2_bound",
    "ratio_r",
    "remark1_certificate",
    "bound_report",
    "bound_reports",
    "write_bound_csv",
]


def _check_delta(delta):
    delta = float(delta)
    if delta < 0 or isnan(delta):
        raise DomainError(f"delta must be non-negative, got {delta}")
    if delta >= 1.0:
        raise RipViolationError(f"delta = {delta} >= 1: the RIP hypothesis delta_|S| < 1 fails")
    return delta


def _check_rows(S_size, t, x_jt):
    if not 0 <= t < S_size:
        raise DomainError(f"need 0 <= t < |S| = {S_size}, got t={t}")
    x_jt = check_matrix(x_jt, "X_Jt")
    if x_jt.shape[0] != S_size - t:
        raise DimensionError(f"X_Jt must have |S| - t = {S_size - t} rows, got {x_jt.shape[0]}")
    return x_jt


def lemma1_alpha(delta):
    """Midpoint of ``[1/(1+delta), 1/(1-delta)]``, i.e. ``1/((1+delta)(1-delta))``."""
    delta = _check_delta(delta)
    return 1.0 / ((1.0 + delta) * (1.0 - delta))


def lemma1_bound(a, alpha, tol=DEFAULT):
    """Spectral upper bound ``|alpha| + sqrt(d) * max_j |lambda_j - alpha|`` on ``||A||_{inf->inf}``.

    Valid for any real ``alpha`` and any symmetric (hence normal) ``A``.
    """
    lam = sym_eigen(a, tol).eigenvalues
    d = lam.shape[0]
    return abs(alpha) + sqrt(d) * float(np.max(np.abs(lam - alpha)))


def inverse_gram_bound(delta, jt_size):
    """Bound on ``||(Phi_J^T (I - P_t) Phi_J)^{-1}||_{inf->inf}`` obtained from the lemma.

    Equals ``(1 + sqrt(|J_t|) delta) / ((1 + delta)(1 - delta))``.
    """
    delta = _check_delta(delta)
    return (1.0 + sqrt(jt_size) * delta) / ((1.0 + delta) * (1.0 - delta))


def _missing_atoms(instance, trace, t):
    if not 0 <= t <= trace.n_iterations:
        raise IndexError(f"t={t} outside the trace (0..{trace.n_iterations})")
    selected = set(trace.support_at(t))
    truth = set(instance.support)
    if not selected <= truth:
        raise NotApplicableError(f"S_{t} = {sorted(selected)} contains incorrect atoms")
    return tuple(j for j in instance.support if j not in selected)


def exact_metric(instance, trace, t):
    """``||Phi_S^T R_t||_{inf->inf}`` using the residual stored in ``trace``."""
    if not 0 <= t < len(trace.residuals):
        raise IndexError(f"t={t} outside the trace (0..{len(trace.residuals) - 1})")
    phi_s = instance.phi[:, list(instance.support)]
    return norm_inf_to_inf(phi_s.T @ trace.residuals[t])


class Theorem1(NamedTuple):
    psi: float
    tau: float
    bound: float


def theorem1_bound(delta, S_size, t, x_jt):
    """Infinity-norm lower bound, split as ``psi * tau``.

    ``psi = (1 - delta)(1 + delta) / (1 + sqrt(|S| - t) delta)`` depends on the
    matrix only and ``tau = ||X_J||_{inf->inf}`` on the signal only.
    """
    delta = _check_delta(delta)
    x_jt = _check_rows(S_size, t, x_jt)
    psi = (1.0 - delta) * (1.0 + delta) / (1.0 + sqrt(S_size - t) * delta)
    tau = norm_inf_to_inf(x_jt)
    return Theorem1(psi, tau, psi * tau)


def theorem2_bound(delta, S_size, t, x_jt):
    """Frobenius lower bound ``(1 - delta) ||X_J||_F / sqrt(|S| - t)``."""
    delta = _check_delta(delta)
    x_jt = _check_rows(S_size, t, x_jt)
    return (1.0 - delta) * norm_frobenius(x_jt) / sqrt(S_size - t)


class RatioBracket(NamedTuple):
    r: float
    lower: float
    upper: float


def ratio_r(delta, S_size, jt_size, x_jt):
    """Ratio of the infinity-norm bound to the Frobenius bound, with its bracket.

    ``lower = (1 + delta) / (1 + sqrt(|J|) delta)``.  For ``delta > 0`` the
    upper end is ``sqrt(K) (1 + delta) / delta``; at ``delta = 0`` that
    expression is undefined and the intermediate bracket
    ``sqrt(K) sqrt(|J|) (1 + delta) / (1 + sqrt(|J|) delta)`` is used instead.
    """
    delta = _check_delta(delta)
    if not 1 <= jt_size <= S_size:
        raise DomainError(f"need 1 <= |J_t| <= |S| = {S_size}, got {jt_size}")
    x_jt = _check_rows(S_size, S_size - jt_size, x_jt)
    fro = norm_frobenius(x_jt)
    if fro == 0.0:
        raise DomainError("X_Jt is zero; the ratio is undefined")
    K = x_jt.shape[1]
    root_j = sqrt(jt_size)
    factor = (1.0 + delta) / (1.0 + root_j * delta)
    r = root_j * factor * norm_inf_to_inf(x_jt) / fro
    upper = sqrt(K) * (1.0 + delta) / delta if delta > 0 else sqrt(K) * root_j * factor
    return RatioBracket(r, factor, upper)


class Remark1Certificate(NamedTuple):
    holds: bool
    gap: float


def _orthonormal_on(phi, support, tol):
    cols = phi[:, list(support)]
    gram = cols.T @ cols
    return float(np.max(np.abs(gram - np.eye(len(support))))) <= tol.isometry


def remark1_certificate(instance, trace, t, tol=DEFAULT):
    """Check that the infinity-norm bound is attained when ``Phi_S`` is orthonormal.

    With orthonormal correct atoms the exact metric equals ``||X_J||_{inf->inf}``;
    returns whether ``|exact - ||X_J||_{inf->inf}| <= tol.sharpness * max(1, ||X_J||)``
    and the gap itself.  Raises :class:`NotApplicableError` if ``Phi_S`` is not
    orthonormal or ``S_t`` contains a wrong atom.
    """
    if not _orthonormal_on(instance.phi, instance.support, tol):
        raise NotApplicableError("Phi_S is not orthonormal (delta_|S| != 0)")
    missing = _missing_atoms(instance, trace, t)
    tau = norm_inf_to_inf(instance.x[list(missing)]) if missing else 0.0
    gap = abs(exact_metric(instance, trace, t) - tau)
    return Remark1Certificate(gap <= tol.sharpness * max(1.0, tau), gap)


@dataclass(frozen=True)
class BoundReport:
    t: int
    J_t: Tuple[int, ...]
    delta: float
    exact_metric: float
    thm1_psi: float
    thm1_tau: float
    thm1_bound: float
    thm2_bound: float
    ratio_r: float
    ratio_lower: float
    ratio_upper: float
    # False when X_J = 0 and the ratio has no value (ratio fields are NaN)
    ratio_defined: bool = True
    delta_source: str = ""

    @property
    def Jt_size(self):
        return len(self.J_t)

    def slack(self, which=1):
        """``exact_metric - bound``; a proven inequality means this is >= 0."""
        return self.exact_metric - (self.thm1_bound if which == 1 else self.thm2_bound)


def bound_report(instance, trace, t, delta, delta_source=""):
    """Evaluate both bounds, the exact metric and the ratio at iteration ``t``."""
    missing = _missing_atoms(instance, trace, t)
    S_size = len(instance.support)
    if not missing:
        raise NotApplicableError(f"t={t}: every correct atom is already selected")
    x_jt = instance.x[list(missing)]
    thm1 = theorem1_bound(delta, S_size, t, x_jt)
    thm2 = theorem2_bound(delta, S_size, t, x_jt)
    try:
        bracket = ratio_r(delta, S_size, len(missing), x_jt)
        defined = True
    except DomainError:
        bracket = RatioBracket(nan, nan, nan)
        defined = False
    return BoundReport(
        t=t, J_t=missing, delta=float(delta),
        exact_metric=exact_metric(instance, trace, t),
        thm1_psi=thm1.psi, thm1_tau=thm1.tau, thm1_bound=thm1.bound,
        thm2_bound=thm2,
        ratio_r=bracket.r, ratio_lower=bracket.lower, ratio_upper=bracket.upper,
        ratio_defined=defined, delta_source=delta_source,
    )


def bound_reports(instance, trace, delta, delta_source=""):
    """Reports for every iteration where the theorems apply.

    That is every ``t`` with ``S_t`` inside the true support and at least one
    correct atom still missing.
    """
    truth = set(instance.support)
    out = []
    for t in range(trace.n_iterations + 1):
        selected = set(trace.support_at(t))
        if not selected < truth:
            break
        out.append(bound_report(instance, trace, t, delta, delta_source))
    return out


CSV_COLUMNS = (
    "t", "Jt_size", "delta", "exact_metric", "thm1_psi", "thm1_tau", "thm1_bound",
    "thm2_bound", "ratio_r", "ratio_lower", "ratio_upper",
)


def report_row(report):
    def fmt(v):
        return f"{v:.17g}" if isinstance(v, float) else str(v)

    values = {f.name: getattr(report, f.name) for f in fields(report)}
    values["Jt_size"] = report.Jt_size
    return [fmt(values[c]) for c in CSV_COLUMNS]


def write_bound_csv(reports, fh, prefix_columns=(), prefixes=None):
    """Write reports as CSV.

    ``prefix_columns`` names extra leading columns; ``prefixes`` gives one
    sequence of their values per report.
    """
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(list(prefix_columns) + list(CSV_COLUMNS))
    prefixes = prefixes if prefixes is not None else [()] * len(reports)
    for pre, rep in zip(prefixes, reports):
        writer.writerow([str(v) for v in pre] + report_row(rep))
