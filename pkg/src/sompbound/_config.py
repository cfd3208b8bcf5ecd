"""Numerical tolerances shared across the package.

Every threshold used to decide rank, symmetry, convergence or soundness lives
here so that experiments can report exactly which constants were in force.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # Jacobi eigensolver: stop once off-diagonal Frobenius mass <= jacobi_off * ||A||_F
    jacobi_off: float = 1e-14
    jacobi_max_sweeps: int = 100
    # relative asymmetry admitted by sym_eigen / lemma1_bound
    symmetry: float = 1e-12
    # |R_kk| <= rank * max column norm => rank deficient
    rank: float = 1e-12
    # absolute slack when asserting a proven inequality numerically
    soundness_slack: float = 1e-10
    # delta at or below this is treated as an exact isometry (delta = 0)
    isometry: float = 1e-10
    # sharpness gap tolerance on orthonormal supports, relative to max(1, ||X^J||_inf->inf)
    sharpness: float = 1e-8
    # relative Frobenius error admitted for y = phi @ x
    model_consistency: float = 1e-12


DEFAULT = Tolerances()
