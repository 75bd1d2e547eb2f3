"""Local deterministic strategies: classical bound and facet (tightness) check.

A strategy assigns +-1 to both settings of every party. Strategies are
indexed by a 2n-bit integer read most-significant-bit first as
``x_1, x'_1, x_2, x'_2, ..., x_n, x'_n`` with bit 0 -> +1 and bit 1 -> -1.

Correlation vectors have one coordinate per setting-choice mask; bit ``j``
of the mask (LSB = party 1) selects the primed setting for party ``j + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.linalg import qr

from bellbench.errors import CapacityError, ValidationError

LHV_MAX_PARTIES = 12
FACET_MAX_PARTIES = 7
CLASSICAL_BOUND = 2
_CHUNK = 1 << 20

NOTE_POLYTOPE = (
    "tightness is evaluated on the full-correlation polytope: one coordinate per joint "
    "setting choice, vertices are deterministic +-1 strategies"
)


@dataclass(frozen=True)
class DeterministicStrategy:
    assignments: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(x), int(xp)) for x, xp in self.assignments)
        if len(pairs) < 2:
            raise ValidationError("a strategy needs at least 2 parties")
        if any(v not in (1, -1) for pair in pairs for v in pair):
            raise ValidationError("strategy values must be +1 or -1")
        object.__setattr__(self, "assignments", pairs)

    @property
    def n(self) -> int:
        return len(self.assignments)

    @classmethod
    def from_index(cls, n: int, index: int) -> "DeterministicStrategy":
        if not 0 <= index < 1 << (2 * n):
            raise ValidationError(f"strategy index {index} out of range for n={n}")
        bits = [(index >> (2 * n - 1 - k)) & 1 for k in range(2 * n)]
        values = [1 - 2 * b for b in bits]
        return cls(tuple(zip(values[0::2], values[1::2])))

    @property
    def index(self) -> int:
        out = 0
        for x, xp in self.assignments:
            out = (out << 2) | ((x < 0) << 1) | (xp < 0)
        return out

    def correlation_vector(self) -> np.ndarray:
        masks = np.arange(1 << self.n)
        coords = np.ones(masks.size, dtype=np.int64)
        for j, (x, xp) in enumerate(self.assignments):
            coords *= np.where((masks >> j) & 1, xp, x)
        return coords


def lhv_value(strategy: DeterministicStrategy) -> int:
    A = A_prime = 1
    for x, xp in strategy.assignments[:-1]:
        A *= x
        A_prime *= xp
    B, B_prime = strategy.assignments[-1]
    return A * B + A * B_prime + A_prime * B - A_prime * B_prime


def _parity_masks(n: int) -> tuple[int, int, int, int]:
    """Bit masks selecting x_j (j < n), x'_j (j < n), x_n and x'_n in a strategy index."""
    unprimed = primed = 0
    for j in range(n - 1):
        unprimed |= 1 << (2 * n - 1 - 2 * j)
        primed |= 1 << (2 * n - 2 - 2 * j)
    return unprimed, primed, 1 << 1, 1 << 0


def strategy_values(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Bell values of strategies with indices in ``[start, stop)``."""
    stop = 1 << (2 * n) if stop is None else stop
    idx = np.arange(start, stop, dtype=np.uint64)
    um, pm, bm, bpm = (np.uint64(m) for m in _parity_masks(n))

    def sign(mask):
        return 1 - 2 * (np.bitwise_count(idx & mask) & 1).astype(np.int8)

    A, Ap, B, Bp = sign(um), sign(pm), sign(bm), sign(bpm)
    return A * (B + Bp) + Ap * (B - Bp)


@dataclass(frozen=True)
class LhvResult:
    n: int
    max: int
    min: int
    argmax_count: int
    strategies: int
    first_argmax: int

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "max": self.max,
            "min": self.min,
            "argmax_count": self.argmax_count,
            "strategies": self.strategies,
            "first_argmax_index": self.first_argmax,
        }


def lhv_max(n: int, max_parties: int = LHV_MAX_PARTIES) -> LhvResult:
    """Exhaustive maximum of the Bell functional over all 2**(2n) strategies."""
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    if n > max_parties:
        raise CapacityError(f"lhv_max enumerates 2^{2 * n} strategies; n={n} exceeds the limit n <= {max_parties}")
    total = 1 << (2 * n)
    best, worst, count, first = None, None, 0, -1
    for start in range(0, total, _CHUNK):
        vals = strategy_values(n, start, min(total, start + _CHUNK))
        hi, lo = int(vals.max()), int(vals.min())
        if best is None or hi > best:
            best, count = hi, 0
            first = start + int(np.argmax(vals))
        if hi == best:
            count += int(np.count_nonzero(vals == hi))
        worst = lo if worst is None else min(worst, lo)
    return LhvResult(n=n, max=best, min=worst, argmax_count=count, strategies=total, first_argmax=first)


def correlation_vectors(n: int) -> np.ndarray:
    """Rows = strategies in index order, columns = setting-choice masks."""
    idx = np.arange(1 << (2 * n), dtype=np.int64)
    masks = np.arange(1 << n)
    out = np.ones((idx.size, masks.size), dtype=np.int8)
    for j in range(n):
        x = 1 - 2 * ((idx >> (2 * n - 1 - 2 * j)) & 1)
        xp = 1 - 2 * ((idx >> (2 * n - 2 - 2 * j)) & 1)
        primed = ((masks >> j) & 1).astype(bool)
        out *= np.where(primed[None, :], xp[:, None], x[:, None]).astype(np.int8)
    return out


def bell_coefficients(n: int) -> np.ndarray:
    """Linear functional of the inequality on correlation-vector coordinates."""
    coef = np.zeros(1 << n, dtype=np.int64)
    a_side = (1 << (n - 1)) - 1
    b_bit = 1 << (n - 1)
    coef[0] += 1  # A B
    coef[b_bit] += 1  # A B'
    coef[a_side] += 1  # A' B
    coef[a_side | b_bit] -= 1  # A' B'
    return coef


def exact_rank(rows) -> int:
    """Rank over the rationals by fraction-free elimination on Python integers."""
    work = [[int(v) for v in row] for row in rows]
    if not work:
        return 0
    ncols = len(work[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(work)) if work[i][col] != 0), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        prow = work[rank]
        p = prow[col]
        for i in range(rank + 1, len(work)):
            row = work[i]
            f = row[col]
            if f == 0:
                continue
            new = [p * row[k] - f * prow[k] for k in range(ncols)]
            g = 0
            for v in new:
                g = gcd(g, v)
                if g == 1:
                    break
            work[i] = [v // g for v in new] if g > 1 else new
        rank += 1
        if rank == len(work):
            break
    return rank


def affine_rank(points: np.ndarray, upper_bound: int | None = None) -> int:
    """Exact affine rank (dimension of the affine hull) of integer points.

    A float pivoted QR only proposes a candidate independent subset; its rank
    is then certified exactly. The exact rank of a subset is a lower bound, so
    once it reaches ``upper_bound`` (a known ceiling, e.g. ``dim - 1`` for
    points on a common hyperplane) the answer is final. Otherwise all
    difference vectors are eliminated exactly.
    """
    points = np.asarray(points, dtype=np.int64)
    if len(points) <= 1:
        return 0
    diffs = points[1:] - points[0]
    ceiling = min(diffs.shape)
    if upper_bound is not None:
        ceiling = min(ceiling, upper_bound)
    _, r, piv = qr(diffs.T.astype(float), mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag[0] * max(diffs.shape) * np.finfo(float).eps if diag.size else 0.0
    guess = int(np.count_nonzero(diag > tol))
    certified = exact_rank(diffs[np.sort(piv[:guess])])
    if certified >= ceiling:
        return certified
    return exact_rank(diffs)


@dataclass(frozen=True)
class FacetResult:
    n: int
    is_tight: bool
    is_valid: bool
    saturating_vertices: int
    affine_rank: int
    ambient_dim: int
    vertices: int

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "is_tight": self.is_tight,
            "is_valid": self.is_valid,
            "saturating_vertices": self.saturating_vertices,
            "affine_rank": self.affine_rank,
            "ambient_dim": self.ambient_dim,
            "vertices": self.vertices,
            "note": NOTE_POLYTOPE,
        }


def facet_check(n: int, max_parties: int = FACET_MAX_PARTIES) -> FacetResult:
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    if n > max_parties:
        raise CapacityError(
            f"facet_check enumerates 2^{2 * n} vertices of dimension 2^{n}; n={n} exceeds the limit n <= {max_parties}"
        )
    vecs = correlation_vectors(n)
    values = vecs.astype(np.int64) @ bell_coefficients(n)
    valid = int(values.max()) <= CLASSICAL_BOUND
    saturating = vecs[values == CLASSICAL_BOUND]
    ambient = 1 << n
    # Saturating vertices share the hyperplane value == 2.
    rank = affine_rank(saturating, upper_bound=ambient - 1)
    return FacetResult(
        n=n,
        is_tight=valid and rank == ambient - 1,
        is_valid=valid,
        saturating_vertices=int(len(saturating)),
        affine_rank=rank,
        ambient_dim=ambient,
        vertices=int(len(vecs)),
    )
