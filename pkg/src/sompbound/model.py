"""Multiple-measurement-vector problem instances ``Y = Phi X``.

Generators are deterministic in their ``seed``.  Each one draws from its own
PCG64 stream (``numpy.random.default_rng([seed, stream])``), so the matrix,
the support and the coefficients of an instance are statistically
independent even when built from the same seed.
"""
import enum
import os
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from ._config import DEFAULT
from ._validation import check_matrix, frozen
from .exceptions import DimensionError, DomainError
from .linalg import householder_qr, read_matrix, write_matrix

PRNG_NAME = "PCG64"

# independent sub-streams of a single seed
_STREAM_MATRIX = 0
_STREAM_SUPPORT = 1
_STREAM_COEFFS = 2


def _rng(seed, stream):
    return np.random.default_rng([int(seed), stream])


class Scenario(str, enum.Enum):
    DOMINANT_ROW = "DominantRow"
    IDENTICAL_MAGNITUDES = "IdenticalMagnitudes"
    GENERIC_RANDOM = "GenericRandom"
    ORTHONORMAL = "Orthonormal"


Support = Tuple[int, ...]


def make_support(indices, n=None):
    """Normalize ``indices`` to a strictly increasing tuple of column indices."""
    idx = [int(i) for i in indices]
    if len(set(idx)) != len(idx):
        raise DomainError(f"support has duplicate indices: {sorted(idx)}")
    if any(i < 0 for i in idx) or (n is not None and any(i >= n for i in idx)):
        raise DomainError(f"support indices must lie in [0, {n}), got {sorted(idx)}")
    return tuple(sorted(idx))


def support_of(x):
    """Union of the supports of the columns of ``x`` (indices of nonzero rows)."""
    x = np.asarray(x, dtype=np.float64)
    return tuple(int(j) for j in np.flatnonzero(np.any(x != 0.0, axis=1)))


def random_support(n, size, seed):
    if not 1 <= size <= n:
        raise DomainError(f"support size must be in [1, {n}], got {size}")
    rng = _rng(seed, _STREAM_SUPPORT)
    return make_support(rng.choice(n, size=size, replace=False), n)


# -- measurement matrices ----------------------------------------------------

def gen_matrix_gaussian(m, n, seed, unit_columns=False):
    """I.i.d. N(0, 1/m) entries.

    Columns have squared norm 1 in expectation but are not renormalized unless
    ``unit_columns`` is set.
    """
    if m < 1 or n < 1:
        raise DimensionError(f"need m, n >= 1, got m={m}, n={n}")
    phi = _rng(seed, _STREAM_MATRIX).standard_normal((m, n)) / np.sqrt(m)
    if unit_columns:
        phi /= np.linalg.norm(phi, axis=0)
    return frozen(phi)


def gen_matrix_orthonormal(m, n, seed):
    """``m x n`` matrix with orthonormal columns (thin QR of a Gaussian draw)."""
    if n > m:
        raise DimensionError(f"cannot have {n} orthonormal columns in dimension {m}")
    if n < 1:
        raise DimensionError("need n >= 1")
    g = _rng(seed, _STREAM_MATRIX).standard_normal((m, n))
    q, _ = householder_qr(g)
    return q


# -- coefficient patterns ----------------------------------------------------

@dataclass(frozen=True)
class DominantRow:
    """One row whose magnitudes dwarf all other rows combined.

    Every entry of the dominant row has magnitude at least ``factor`` times
    the sum of the absolute values of all entries in the other rows.
    ``row`` picks the dominant support index; ``None`` draws it at random.
    """

    factor: float = 1e6
    row: Union[int, None] = None


@dataclass(frozen=True)
class IdenticalMagnitudes:
    """``|X[j, k]| = mu`` on the support, with i.i.d. random signs."""

    mu: float = 1.0


@dataclass(frozen=True)
class GenericRandom:
    """Standard normal entries on the supported rows."""


Pattern = Union[DominantRow, IdenticalMagnitudes, GenericRandom]


def gen_coefficients(n, K, support, pattern, seed):
    """Row-sparse ``n x K`` coefficient matrix with nonzero rows exactly on ``support``.

    Returns ``(x, dominant)`` where ``dominant`` is the dominant row index for
    :class:`DominantRow` and ``None`` otherwise.
    """
    support = make_support(support, n)
    if not support:
        raise DomainError("coefficient support must be non-empty")
    if K < 1:
        raise DimensionError(f"need K >= 1, got {K}")
    rng = _rng(seed, _STREAM_COEFFS)
    x = np.zeros((n, K))
    rows = list(support)
    dominant = None

    if isinstance(pattern, GenericRandom):
        block = rng.standard_normal((len(rows), K))
        # a Gaussian draw is never exactly zero in practice; guard anyway
        block[block == 0.0] = 1.0
        x[rows] = block
    elif isinstance(pattern, IdenticalMagnitudes):
        if not pattern.mu > 0:
            raise DomainError(f"mu must be positive, got {pattern.mu}")
        signs = rng.choice([-1.0, 1.0], size=(len(rows), K))
        x[rows] = pattern.mu * signs
    elif isinstance(pattern, DominantRow):
        if pattern.factor < 1e3:
            raise DomainError(f"dominance factor must be >= 1e3, got {pattern.factor}")
        dominant = int(rng.choice(rows)) if pattern.row is None else int(pattern.row)
        if dominant not in support:
            raise DomainError(f"dominant row {dominant} is not in the support")
        others = [j for j in rows if j != dominant]
        block = rng.standard_normal((len(others), K))
        block[block == 0.0] = 1.0
        x[others] = block
        mass = float(np.sum(np.abs(block))) if others else 1.0
        magnitudes = pattern.factor * mass * rng.uniform(1.0, 2.0, size=K)
        x[dominant] = magnitudes * rng.choice([-1.0, 1.0], size=K)
    else:
        raise DomainError(f"unknown coefficient pattern {pattern!r}")
    return frozen(x), dominant


# -- instances ---------------------------------------------------------------

@dataclass(frozen=True)
class MmvInstance:
    """A noiseless MMV problem ``y = phi @ x`` with known joint support."""

    phi: np.ndarray
    x: np.ndarray
    y: np.ndarray
    support: Support
    seed: int = 0
    scenario: Union[Scenario, None] = None
    dominant_row: Union[int, None] = None
    prng: str = PRNG_NAME

    def __post_init__(self):
        if self.phi.shape[1] != self.x.shape[0] or self.y.shape != (self.phi.shape[0], self.x.shape[1]):
            raise DimensionError(
                f"inconsistent shapes phi {self.phi.shape}, x {self.x.shape}, y {self.y.shape}"
            )
        ref = self.phi @ self.x
        scale = max(float(np.linalg.norm(ref)), 1.0)
        if float(np.linalg.norm(ref - self.y)) > DEFAULT.model_consistency * scale:
            raise DomainError("y does not equal phi @ x")
        if support_of(self.x) != tuple(self.support):
            raise DomainError(
                f"declared support {self.support} differs from supp(x) = {support_of(self.x)}"
            )

    @property
    def m(self):
        return self.phi.shape[0]

    @property
    def n(self):
        return self.phi.shape[1]

    @property
    def K(self):
        return self.x.shape[1]


def assemble_instance(phi, x, *, seed=0, scenario=None, dominant_row=None):
    """Build an :class:`MmvInstance`, computing ``y`` and the support from ``x``."""
    phi = check_matrix(phi, "phi")
    x = check_matrix(x, "x")
    if phi.shape[1] != x.shape[0]:
        raise DimensionError(f"phi has {phi.shape[1]} columns but x has {x.shape[0]} rows")
    y = frozen(phi @ x)
    return MmvInstance(
        phi=phi, x=x, y=y, support=support_of(x), seed=int(seed),
        scenario=Scenario(scenario) if scenario is not None else None,
        dominant_row=dominant_row,
    )


def make_instance(scenario, m, n, K, s, seed, *, factor=1e6, mu=1.0, unit_columns=False):
    """Draw a random instance of one of the four scenarios.

    Non-orthonormal scenarios use a Gaussian ``phi``; ``Orthonormal`` uses a
    matrix with orthonormal columns (requires ``n <= m``) and Gaussian rows.
    """
    scenario = Scenario(scenario)
    support = random_support(n, s, seed)
    if scenario is Scenario.ORTHONORMAL:
        phi = gen_matrix_orthonormal(m, n, seed)
    else:
        phi = gen_matrix_gaussian(m, n, seed, unit_columns=unit_columns)
    pattern = {
        Scenario.DOMINANT_ROW: DominantRow(factor=factor),
        Scenario.IDENTICAL_MAGNITUDES: IdenticalMagnitudes(mu=mu),
        Scenario.GENERIC_RANDOM: GenericRandom(),
        Scenario.ORTHONORMAL: GenericRandom(),
    }[scenario]
    x, dominant = gen_coefficients(n, K, support, pattern, seed)
    return assemble_instance(phi, x, seed=seed, scenario=scenario, dominant_row=dominant)


# -- serialization -----------------------------------------------------------

def save_instance(instance, directory):
    """Write ``phi.txt``, ``x.txt``, ``y.txt`` and ``meta.txt`` into ``directory``."""
    os.makedirs(directory, exist_ok=True)
    write_matrix(os.path.join(directory, "phi.txt"), instance.phi)
    write_matrix(os.path.join(directory, "x.txt"), instance.x)
    write_matrix(os.path.join(directory, "y.txt"), instance.y)
    meta = {
        "m": instance.m,
        "n": instance.n,
        "K": instance.K,
        "s": len(instance.support),
        "seed": instance.seed,
        "scenario": instance.scenario.value if instance.scenario else "",
        "support": ",".join(str(j) for j in instance.support),
        "dominant_row": "" if instance.dominant_row is None else instance.dominant_row,
        "prng": instance.prng,
    }
    with open(os.path.join(directory, "meta.txt"), "w", encoding="ascii") as fh:
        for key, value in meta.items():
            fh.write(f"{key}={value}\n")


def read_key_values(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}: expected key=value, got {raw.strip()!r}")
            out[key.strip()] = value.strip()
    return out


def load_instance(directory):
    phi = read_matrix(os.path.join(directory, "phi.txt"))
    x = read_matrix(os.path.join(directory, "x.txt"))
    y = read_matrix(os.path.join(directory, "y.txt"))
    meta = read_key_values(os.path.join(directory, "meta.txt"))
    support = make_support([int(v) for v in meta.get("support", "").split(",") if v], phi.shape[1])
    scenario = Scenario(meta["scenario"]) if meta.get("scenario") else None
    dominant = int(meta["dominant_row"]) if meta.get("dominant_row") else None
    return MmvInstance(
        phi=phi, x=x, y=y, support=support, seed=int(meta.get("seed", 0)),
        scenario=scenario, dominant_row=dominant, prng=meta.get("prng", PRNG_NAME),
    )
