"""Dense real linear algebra used by the pursuit and the bounds.

Matrices are plain 2-D ``float64`` numpy arrays.  Every public function
validates its inputs (finite, correct rank) and returns a fresh read-only
array, never mutating what it was given.

The eigensolver is a cyclic Jacobi method and least squares goes through a
Householder QR factorization; both are written out here so that rank and
convergence decisions use the thresholds in :mod:`sompbound._config`.
"""
from math import sqrt
from typing import NamedTuple

import numpy as np

from ._config import DEFAULT
from ._validation import check_matrix, check_square, check_vector, frozen
from .exceptions import ConvergenceError, DimensionError, SingularMatrixError, SymmetryError

__all__ = [
    "SymEigen",
    "sym_eigen",
    "householder_qr",
    "least_squares",
    "project_onto_range",
    "norm_inf_to_inf",
    "norm_2_to_2",
    "norm_frobenius",
    "norm_vec_p",
    "format_matrix",
    "parse_matrix",
    "write_matrix",
    "read_matrix",
]


class SymEigen(NamedTuple):
    """Spectral decomposition ``A = Q diag(eigenvalues) Q^T``.

    ``eigenvalues`` are sorted ascending and ``eigenvectors`` holds the
    matching orthonormal eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_symmetric(a, tol):
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > tol * scale:
        raise SymmetryError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")


def sym_eigen(a, tol=DEFAULT):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Parameters
    ----------
    a : array_like, shape (d, d)
        Symmetric matrix.  Asymmetry above ``tol.symmetry`` (relative to the
        largest entry) is rejected; the symmetric part is then used.
    tol : Tolerances

    Returns
    -------
    SymEigen
        Ascending eigenvalues and orthonormal eigenvectors (columns).
    """
    a = check_square(a, "A")
    _check_symmetric(a, tol.symmetry)
    d = a.shape[0]
    w = 0.5 * (a + a.T)
    v = np.eye(d)
    fro = float(np.linalg.norm(w))
    threshold = tol.jacobi_off * fro

    upper = np.triu_indices(d, 1)

    def off_norm():
        return sqrt(2.0) * float(np.linalg.norm(w[upper]))

    sweeps = 0
    while off_norm() > threshold:
        if sweeps >= tol.jacobi_max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {tol.jacobi_max_sweeps} sweeps "
                f"(off-diagonal norm {off_norm():.3e}, target {threshold:.3e})"
            )
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = w[p, q]
                if apq == 0.0:
                    continue
                # rotation angle chosen so that the (p, q) entry vanishes
                diff = w[q, q] - w[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    # theta^2 would overflow; t ~ 1 / (2 theta)
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                wp = w[:, p].copy()
                wq = w[:, q].copy()
                w[:, p] = c * wp - s * wq
                w[:, q] = s * wp + c * wq
                wp = w[p, :].copy()
                wq = w[q, :].copy()
                w[p, :] = c * wp - s * wq
                w[q, :] = s * wp + c * wq
                w[p, q] = w[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        sweeps += 1

    lam = np.diag(w).copy()
    order = np.argsort(lam, kind="stable")
    return SymEigen(frozen(lam[order]), frozen(v[:, order]))


def householder_qr(a, tol=DEFAULT):
    """Thin QR factorization ``A = Q R`` by Householder reflections.

    Requires ``m >= k`` and full column rank: a diagonal entry of ``R`` at or
    below ``tol.rank`` times the largest column norm raises
    :class:`SingularMatrixError`.

    Returns ``(Q, R)`` with ``Q`` of shape (m, k) and ``R`` upper triangular
    (k, k) with a non-negative diagonal.
    """
    a = check_matrix(a, "A")
    m, k = a.shape
    if m < k:
        raise SingularMatrixError(
            f"{k} columns in dimension {m} cannot be independent", rank=m, n_columns=k
        )
    r = np.array(a, dtype=np.float64)
    vs = []
    col_scale = float(np.max(np.linalg.norm(a, axis=0)))
    for j in range(k):
        x = r[j:, j]
        alpha = float(np.linalg.norm(x))
        if alpha <= tol.rank * col_scale:
            raise SingularMatrixError(
                f"column {j} of {k} is linearly dependent on the previous ones "
                f"(rank {j} < {k} columns)",
                rank=j,
                n_columns=k,
            )
        vj = x.copy()
        vj[0] += alpha if x[0] >= 0 else -alpha
        vj /= np.linalg.norm(vj)
        r[j:, j:] -= 2.0 * np.outer(vj, vj @ r[j:, j:])
        vs.append(vj)
    q = np.eye(m, k)
    for j in reversed(range(k)):
        vj = vs[j]
        q[j:, :] -= 2.0 * np.outer(vj, vj @ q[j:, :])
    r = np.triu(r[:k, :])
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return frozen(q * signs), frozen(r * signs[:, None])


def _back_substitute(r, b):
    k = r.shape[0]
    z = np.zeros_like(b)
    for i in reversed(range(k)):
        z[i] = (b[i] - r[i, i + 1:] @ z[i + 1:]) / r[i, i]
    return z


def _as_2d(b, name):
    b = np.asarray(b, dtype=np.float64)
    if b.ndim == 1:
        return check_matrix(b[:, None], name), True
    return check_matrix(b, name), False


def least_squares(a, b, tol=DEFAULT):
    """Solve ``min ||A Z - B||_F`` for full-column-rank ``A``.

    ``B`` may be a vector or a matrix with the same number of rows as ``A``;
    the result has matching shape.
    """
    a = check_matrix(a, "A")
    b, squeeze = _as_2d(b, "B")
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"A has {a.shape[0]} rows but B has {b.shape[0]}")
    q, r = householder_qr(a, tol)
    z = _back_substitute(r, q.T @ b)
    return frozen(z[:, 0] if squeeze else z)


def project_onto_range(a, b, tol=DEFAULT):
    """Orthogonal projection ``A A^+ B`` of the columns of ``B`` onto range(A)."""
    a = check_matrix(a, "A")
    b, squeeze = _as_2d(b, "B")
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"A has {a.shape[0]} rows but B has {b.shape[0]}")
    q, _ = householder_qr(a, tol)
    pb = q @ (q.T @ b)
    return frozen(pb[:, 0] if squeeze else pb)


def norm_inf_to_inf(a):
    """Induced infinity norm: the largest absolute row sum."""
    a = check_matrix(a, "A", allow_empty=True)
    if a.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(a), axis=1)))


def norm_2_to_2(a, tol=DEFAULT):
    """Spectral norm, ``sqrt(lambda_max(A^T A))`` through :func:`sym_eigen`."""
    a = check_matrix(a, "A", allow_empty=True)
    if a.size == 0:
        return 0.0
    gram = a.T @ a if a.shape[1] <= a.shape[0] else a @ a.T
    gram = 0.5 * (gram + gram.T)
    lam_max = float(sym_eigen(gram, tol).eigenvalues[-1])
    return sqrt(max(lam_max, 0.0))


def _scaled_l2(values):
    # rescale by the largest magnitude so tiny or huge entries neither underflow nor overflow
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if scale == 0.0:
        return 0.0
    v = values / scale
    return scale * sqrt(float(np.sum(v * v)))


def norm_frobenius(a):
    a = check_matrix(a, "A", allow_empty=True)
    return _scaled_l2(a)


def norm_vec_p(x, p):
    """Vector l_p norm for p in {1, 2, inf}."""
    x = check_vector(x, "x")
    if x.size == 0:
        return 0.0
    if p == 1:
        return float(np.sum(np.abs(x)))
    if p == 2:
        return _scaled_l2(x)
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(x)))
    raise ValueError(f"unsupported norm order p={p!r}; expected 1, 2 or inf")


# -- text format -------------------------------------------------------------

def format_matrix(a):
    """Serialize as ``"rows cols"`` followed by one whitespace-separated line per row.

    Entries are written with 17 significant digits, which round-trips any
    float64 exactly.
    """
    a = check_matrix(a, "A", allow_empty=True)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines.extend(" ".join(f"{v:.17g}" for v in row) for row in a)
    return "\n".join(lines) + "\n"


def parse_matrix(text):
    tokens = text.split()
    if len(tokens) < 2:
        raise DimensionError("matrix text is missing the 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = tokens[2:]
    if len(values) != rows * cols:
        raise DimensionError(
            f"header announces {rows}x{cols} = {rows * cols} entries, found {len(values)}"
        )
    data = np.array([float(v) for v in values], dtype=np.float64).reshape(rows, cols)
    return check_matrix(data, "matrix", allow_empty=True)


def write_matrix(path, a):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_matrix(a))


def read_matrix(path):
    with open(path, encoding="ascii") as fh:
        return parse_matrix(fh.read())
