"""Exact restricted isometry constants by exhaustive subset enumeration.

For a matrix ``phi`` the order-``s`` constant is

    delta_s = max over |T| <= s of max(1 - lambda_min(G_T), lambda_max(G_T) - 1),

with ``G_T = phi_T^T phi_T``.  Eigenvalue interlacing makes size-``s``
subsets sufficient; smaller orders are still folded in with a running max
so that the table is exactly monotone even under rounding.
"""
import csv
import itertools
from dataclasses import dataclass
from math import comb
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from ._config import DEFAULT
from ._validation import check_matrix
from .exceptions import BudgetError, DomainError, SingularMatrixError
from .linalg import householder_qr, sym_eigen

DEFAULT_BUDGET = 10**6
_CHUNK = 20_000


@dataclass(frozen=True)
class RicTable:
    """``deltas[s - 1]`` is delta_s, attained on ``witnesses[s - 1]``.

    ``sides[s - 1]`` is ``"lower"`` when ``1 - lambda_min`` was the binding
    deviation and ``"upper"`` when ``lambda_max - 1`` was.
    """

    deltas: Tuple[float, ...]
    witnesses: Tuple[Tuple[int, ...], ...]
    sides: Tuple[str, ...]

    def __post_init__(self):
        d = np.asarray(self.deltas)
        if d.size and (d[0] < 0 or np.any(np.diff(d) < 0)):
            raise DomainError(f"RIC table is not non-negative and monotone: {self.deltas}")

    @property
    def s_max(self):
        return len(self.deltas)

    def delta(self, s):
        return self.deltas[s - 1]

    def satisfies_rip(self, s):
        """True when delta_s < 1, the hypothesis of the correlation bounds."""
        return self.deltas[s - 1] < 1.0


def _colex_subsets(n, s):
    subsets = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), s)),
        dtype=np.intp,
        count=comb(n, s) * s,
    ).reshape(-1, s)
    # np.lexsort keys on the last row first: largest element is the primary key
    return subsets[np.lexsort(subsets.T)]


def _order_extreme(phi, s):
    """Worst size-``s`` subset: (delta, witness, side) for exactly ``|T| = s``."""
    best = (-np.inf, None, None)
    subsets = _colex_subsets(phi.shape[1], s)
    for start in range(0, subsets.shape[0], _CHUNK):
        block = subsets[start:start + _CHUNK]
        cols = phi[:, block]  # (m, b, s)
        gram = np.einsum("mbi,mbj->bij", cols, cols)
        lam = np.linalg.eigvalsh(gram)
        low = 1.0 - lam[:, 0]
        high = lam[:, -1] - 1.0
        dev = np.maximum(low, high)
        i = int(np.argmax(dev))  # first maximizer keeps colex order on ties
        if dev[i] > best[0]:
            side = "lower" if low[i] >= high[i] else "upper"
            best = (float(dev[i]), tuple(int(j) for j in block[i]), side)
    return best


def ric_exact(phi, s_max, budget=DEFAULT_BUDGET):
    """Restricted isometry constants delta_1 .. delta_{s_max} of ``phi``.

    Enumerates every column subset of each order, in colexicographic order.
    Raises :class:`BudgetError` if ``C(n, s_max)`` exceeds ``budget``.  Values
    of delta >= 1 are returned as computed; check
    :meth:`RicTable.satisfies_rip` before feeding them to a bound.
    """
    phi = check_matrix(phi, "phi")
    n = phi.shape[1]
    if not 1 <= s_max <= n:
        raise DomainError(f"s_max must lie in [1, {n}], got {s_max}")
    required = max(comb(n, s) for s in range(1, s_max + 1))
    if required > budget:
        raise BudgetError(
            f"exact RIC of order {s_max} for n={n} needs {required} subsets per order "
            f"(budget {budget})",
            required=required,
            budget=budget,
        )
    deltas, witnesses, sides = [], [], []
    for s in range(1, s_max + 1):
        delta, witness, side = _order_extreme(phi, s)
        if deltas and delta < deltas[-1]:
            # a smaller subset still attains the running maximum
            delta, witness, side = deltas[-1], witnesses[-1], sides[-1]
        deltas.append(max(delta, 0.0))
        witnesses.append(witness)
        sides.append(side)
    return RicTable(tuple(deltas), tuple(witnesses), tuple(sides))


def subset_deviation(phi, subset, tol=DEFAULT):
    """``max(1 - lambda_min, lambda_max - 1)`` of the Gram matrix of ``phi[:, subset]``.

    This is the isometry constant restricted to one fixed support, i.e. the
    smallest delta for which the RIP inequalities hold on that support alone.
    It never exceeds delta_{|subset|}.
    """
    phi = check_matrix(phi, "phi")
    cols = phi[:, list(subset)]
    gram = cols.T @ cols
    lam = sym_eigen(0.5 * (gram + gram.T), tol).eigenvalues
    return max(1.0 - float(lam[0]), float(lam[-1]) - 1.0, 0.0)


class GramSpectrum(NamedTuple):
    lam_min: float
    lam_max: float
    # None when no delta was supplied; otherwise whether [1 - delta, 1 + delta] contains the spectrum
    within_ric: Optional[bool]


def gram_spectrum_bounds(phi, support, projector_support=(), delta=None, tol=DEFAULT):
    """Extreme eigenvalues of ``phi_J^T (I - P) phi_J``.

    ``J`` is ``support`` and ``P`` projects onto the span of
    ``phi[:, projector_support]`` (``P = 0`` when that set is empty).  If
    ``delta`` is given, also reports whether the spectrum lies within
    ``[1 - delta, 1 + delta]`` (up to ``tol.soundness_slack``).
    """
    phi = check_matrix(phi, "phi")
    support = list(support)
    projector_support = list(projector_support)
    if not support:
        raise DomainError("support must be non-empty")
    if set(support) & set(projector_support):
        raise DomainError("support and projector_support must be disjoint")
    cols = phi[:, support]
    if projector_support:
        q, _ = householder_qr(phi[:, projector_support], tol)
        cols = cols - q @ (q.T @ cols)
    gram = cols.T @ cols
    lam = sym_eigen(0.5 * (gram + gram.T), tol).eigenvalues
    lam_min, lam_max = float(lam[0]), float(lam[-1])
    if lam_min <= tol.rank * max(lam_max, 1.0):
        raise SingularMatrixError(
            f"projected Gram matrix is singular (lambda_min = {lam_min:.3e})",
            n_columns=len(support),
        )
    within = None
    if delta is not None:
        slack = tol.soundness_slack
        within = bool(1.0 - delta - slack <= lam_min and lam_max <= 1.0 + delta + slack)
    return GramSpectrum(lam_min, lam_max, within)


def write_ric_csv(table, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["s", "delta", "binding_side", "witness_indices"])
    for s, (d, w, side) in enumerate(zip(table.deltas, table.witnesses, table.sides), start=1):
        writer.writerow([s, f"{d:.17g}", side, " ".join(str(j) for j in w)])


def coherence_pairs(phi) -> List[Tuple[int, int, float]]:
    """Normalized inner products ``|<phi_i, phi_j>| / (||phi_i|| ||phi_j||)`` for i < j."""
    phi = check_matrix(phi, "phi")
    norms = np.linalg.norm(phi, axis=0)
    g = np.abs(phi.T @ phi) / np.outer(norms, norms)
    n = phi.shape[1]
    return [(i, j, float(g[i, j])) for i in range(n) for j in range(i + 1, n)]
