"""Simultaneous orthogonal matching pursuit (SOMP) with per-iteration tracing.

``somp`` runs a fixed number of greedy iterations.  At iteration ``t`` it
scores every atom ``phi_j`` by ``||R_t^T phi_j||_p`` (p = 1 is classical
SOMP, other values give p-SOMP), adds the best atom to the support and
replaces the residual by the component of ``Y`` orthogonal to the span of the
selected atoms.  With a single measurement vector this is plain OMP.

:class:`SOMP` wraps the same routine in a scikit-learn estimator.
"""
import csv
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from sklearn.base import BaseEstimator, MultiOutputMixin, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._config import DEFAULT
from ._validation import check_matrix, frozen
from .exceptions import DimensionError, ReselectionError, SingularMatrixError
from .linalg import least_squares, project_onto_range
from .model import make_support

_ORDERS = {1: 1, 2: 2, "1": 1, "2": 2, "inf": np.inf, np.inf: np.inf}


def _norm_order(p):
    try:
        return _ORDERS[p]
    except (KeyError, TypeError):
        raise ValueError(f"selection norm must be 1, 2 or inf, got {p!r}") from None


@dataclass(frozen=True)
class PursuitConfig:
    """``n_iterations`` greedy steps using the l_p aggregation ``p``.

    Ties in the selection metric go to the lowest column index.
    """

    n_iterations: int
    p: object = 1
    tie_break: str = "lowest_index"

    def __post_init__(self):
        if int(self.n_iterations) < 1:
            raise ValueError(f"n_iterations must be >= 1, got {self.n_iterations}")
        object.__setattr__(self, "p", _norm_order(self.p))
        if self.tie_break != "lowest_index":
            raise ValueError(f"unsupported tie_break {self.tie_break!r}")


@dataclass(frozen=True)
class IterationRecord:
    t: int
    atom: int
    metric_values: np.ndarray
    support_after: Tuple[int, ...]
    # ||R_{t+1}||_F, i.e. after the projection step of iteration t
    residual_frobenius: float


@dataclass
class PursuitTrace:
    """Everything SOMP computed.

    ``residuals[t]`` is ``R_t`` (``residuals[0]`` is ``Y``), so it has one
    more entry than ``records``.  When ``true_support`` is known,
    ``correct_before[t]`` tells whether ``S_t`` (the support *before*
    iteration ``t``) is contained in it.
    """

    records: List[IterationRecord] = field(default_factory=list)
    residuals: List[np.ndarray] = field(default_factory=list)
    true_support: Optional[Tuple[int, ...]] = None
    p: object = 1

    @property
    def n_iterations(self):
        return len(self.records)

    @property
    def final_support(self):
        return self.records[-1].support_after if self.records else ()

    @property
    def selected(self):
        """Atoms in the order they were picked."""
        return [rec.atom for rec in self.records]

    def support_at(self, t):
        """``S_t``: the atoms chosen during iterations ``0 .. t-1``."""
        if not 0 <= t <= len(self.records):
            raise IndexError(f"t={t} outside [0, {len(self.records)}]")
        return make_support(self.selected[:t])

    @property
    def correct_before(self):
        if self.true_support is None:
            return None
        truth = set(self.true_support)
        return [set(self.selected[:t]) <= truth for t in range(len(self.records))]


def selection_metric(r, phi, p=1):
    """Per-atom SOMP score ``||R^T phi_j||_p`` for every column ``j`` of ``phi``."""
    r = check_matrix(r, "R", allow_empty=True)
    phi = check_matrix(phi, "phi")
    if r.shape[0] != phi.shape[0]:
        raise DimensionError(f"R has {r.shape[0]} rows but phi has {phi.shape[0]}")
    p = _norm_order(p)
    corr = np.abs(phi.T @ r)  # (n, K)
    if p == 1:
        out = corr.sum(axis=1)
    elif p == 2:
        out = np.sqrt((corr * corr).sum(axis=1))
    else:
        out = corr.max(axis=1) if corr.shape[1] else np.zeros(phi.shape[1])
    return frozen(out)


def residual_update(y, phi, support, tol=DEFAULT):
    """``(I - P) Y`` with ``P`` the orthogonal projector onto range(phi[:, support])."""
    y = check_matrix(y, "Y")
    phi = check_matrix(phi, "phi")
    support = list(support)
    if not support:
        raise ValueError("support must be non-empty")
    return frozen(y - project_onto_range(phi[:, support], y, tol))


def somp(y, phi, config, true_support=None, tol=DEFAULT):
    """Run SOMP for exactly ``config.n_iterations`` iterations.

    Parameters
    ----------
    y : array_like, shape (m, K) or (m,)
        Measurement vectors as columns.
    phi : array_like, shape (m, n)
        Dictionary, one atom per column.
    config : PursuitConfig or int
        An int is shorthand for ``PursuitConfig(n_iterations=config)``.
    true_support : iterable of int, optional
        Recorded on the trace so callers can tell which iterations picked
        only correct atoms.

    Returns
    -------
    PursuitTrace

    Raises
    ------
    SingularMatrixError
        The selected atoms became linearly dependent.  ``exc.trace`` holds
        the iterations completed before the failure.
    ReselectionError
        An atom already in the support won the selection, which signals a
        (numerically) vanished residual.
    """
    if not isinstance(config, PursuitConfig):
        config = PursuitConfig(n_iterations=int(config))
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    y = check_matrix(y, "Y")
    phi = check_matrix(phi, "phi")
    if y.shape[0] != phi.shape[0]:
        raise DimensionError(f"Y has {y.shape[0]} rows but phi has {phi.shape[0]}")
    if true_support is not None:
        true_support = make_support(true_support, phi.shape[1])

    trace = PursuitTrace(residuals=[y], true_support=true_support, p=config.p)
    chosen = []
    residual = y
    for t in range(config.n_iterations):
        metric = selection_metric(residual, phi, config.p)
        # np.argmax returns the first maximizer, i.e. the lowest index on ties
        atom = int(np.argmax(metric))
        if atom in chosen:
            raise ReselectionError(
                f"iteration {t} re-selected atom {atom} (metric {metric[atom]:.3e}); "
                "the residual has numerically vanished",
                atom=atom,
                trace=trace,
            )
        chosen.append(atom)
        try:
            residual = frozen(y - project_onto_range(phi[:, chosen], y, tol))
        except SingularMatrixError as exc:
            raise SingularMatrixError(
                f"iteration {t}: selected atoms {chosen} are rank deficient ({exc})",
                rank=exc.rank,
                n_columns=exc.n_columns,
                trace=trace,
            ) from exc
        trace.records.append(
            IterationRecord(
                t=t,
                atom=atom,
                metric_values=metric,
                support_after=make_support(chosen),
                residual_frobenius=float(np.linalg.norm(residual)),
            )
        )
        trace.residuals.append(residual)
    return trace


def write_trace_csv(trace, fh):
    """Write one row per iteration to the open text file ``fh``.

    ``metric_max_correct`` / ``metric_max_incorrect`` are the largest scores
    among atoms inside / outside the true support (empty when it is unknown);
    ``correct_so_far`` is 1 when every atom picked up to and including ``j_t``
    belongs to the true support.
    """
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(
        ["t", "j_t", "metric_max_correct", "metric_max_incorrect", "residual_frobenius",
         "correct_so_far"]
    )
    truth = trace.true_support
    for rec in trace.records:
        if truth is not None:
            inside = np.zeros(rec.metric_values.shape[0], dtype=bool)
            inside[list(truth)] = True
            best_in = float(rec.metric_values[inside].max()) if inside.any() else 0.0
            best_out = float(rec.metric_values[~inside].max()) if (~inside).any() else 0.0
            ok = int(set(rec.support_after) <= set(truth))
            row = [rec.t, rec.atom, f"{best_in:.17g}", f"{best_out:.17g}"]
        else:
            ok = ""
            row = [rec.t, rec.atom, "", ""]
        writer.writerow(row + [f"{rec.residual_frobenius:.17g}", ok])


class SOMP(MultiOutputMixin, RegressorMixin, BaseEstimator):
    """Scikit-learn estimator for joint-support recovery.

    ``fit(Phi, Y)`` treats the columns of ``Phi`` as atoms and the columns of
    ``Y`` as measurement vectors.  After fitting, ``support_`` holds the
    recovered joint support, ``coef_`` the ``(n_atoms, K)`` least-squares
    coefficients on it and ``trace_`` the full :class:`PursuitTrace`.

    Parameters
    ----------
    n_nonzero : int
        Number of iterations (atoms to select).
    p : {1, 2, inf}
        Aggregation norm of the selection rule.
    """

    def __init__(self, n_nonzero=1, p=1):
        self.n_nonzero = n_nonzero
        self.p = p

    def fit(self, X, y):
        phi = check_matrix(X, "Phi")
        y_arr = np.asarray(y, dtype=np.float64)
        self._y_was_1d = y_arr.ndim == 1
        trace = somp(y_arr, phi, PursuitConfig(n_iterations=self.n_nonzero, p=self.p))
        support = list(trace.final_support)
        y2 = trace.residuals[0]
        coef = np.zeros((phi.shape[1], y2.shape[1]))
        coef[support] = least_squares(phi[:, support], y2)
        self.trace_ = trace
        self.support_ = np.array(trace.final_support, dtype=int)
        self.coef_ = coef
        self.n_iter_ = trace.n_iterations
        self.n_features_in_ = phi.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        phi = check_matrix(X, "Phi")
        if phi.shape[1] != self.coef_.shape[0]:
            raise DimensionError(
                f"Phi has {phi.shape[1]} atoms, the model was fit with {self.coef_.shape[0]}"
            )
        out = phi @ self.coef_
        return out[:, 0] if self._y_was_1d else out
