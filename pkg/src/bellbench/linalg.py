"""Dense complex linear algebra for 2**N x 2**N qubit operators.

Matrices are plain complex :class:`numpy.ndarray` objects (row-major). Two
Hermitian eigensolvers are provided: a general one (LAPACK by default, or a
cyclic Jacobi sweep) and an analytic solver for counter-diagonal matrices,
which lets the two be checked against each other.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from bellbench.errors import CapacityError, ConvergenceError, ValidationError

DEFAULT_MAX_DIM = 2**13
HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-8

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def max_dim() -> int:
    """Capacity limit for matrix dimensions; ``BELLBENCH_MAX_DIM`` overrides it."""
    raw = os.environ.get("BELLBENCH_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"BELLBENCH_MAX_DIM must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValidationError(f"BELLBENCH_MAX_DIM must be positive, got {value}")
    return value


def check_capacity(dim: int) -> None:
    limit = max_dim()
    if dim > limit:
        raise CapacityError(f"matrix dimension {dim} exceeds capacity limit {limit} (set BELLBENCH_MAX_DIM)")


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_defect(m: np.ndarray) -> float:
    """max |M[i, j] - conj(M[j, i])|."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermitian_defect(m) <= tol


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product, with ``a`` on the more significant index."""
    a, b = as_matrix(a), as_matrix(b)
    check_capacity(a.shape[0] * b.shape[0])
    return np.kron(a, b)


def kron_all(factors) -> np.ndarray:
    factors = list(factors)
    if not factors:
        raise ValidationError("kron_all needs at least one factor")
    dim = 1
    for f in factors:
        dim *= as_matrix(f).shape[0]
    check_capacity(dim)
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch: {a.shape} vs {b.shape}")


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_shape(a, b)
    return a + b


def scale(a: np.ndarray, c: complex) -> np.ndarray:
    return complex(c) * as_matrix(a)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_shape(a, b)
    return a @ b


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_shape(a, b)
    return a @ b - b @ a


def trace(a: np.ndarray) -> complex:
    return complex(np.trace(as_matrix(a)))


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(as_matrix(a), "fro"))


def operator_norm(a: np.ndarray) -> float:
    """Spectral norm. For Hermitian input this is the largest |eigenvalue|."""
    a = as_matrix(a)
    if is_hermitian(a):
        return float(np.max(np.abs(np.linalg.eigvalsh(a))))
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True)
class CounterDiagonalMatrix:
    """Matrix whose only nonzeros are ``antidiag[i]`` at (row i, column dim-1-i).

    Row ``i`` here is 0-based: ``antidiag[0]`` is the top-right corner entry,
    matching the ``C-diag(e1, e2, ...)`` notation row by row.
    """

    antidiag: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.antidiag, dtype=complex).reshape(-1)
        if c.size == 0:
            raise ValidationError("counter-diagonal matrix needs at least one entry")
        object.__setattr__(self, "antidiag", c)

    @property
    def dim(self) -> int:
        return self.antidiag.size

    def hermitian_defect(self) -> float:
        c = self.antidiag
        return float(np.max(np.abs(c - np.conj(c[::-1]))))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermitian_defect() <= tol

    def dense(self) -> np.ndarray:
        check_capacity(self.dim)
        m = np.zeros((self.dim, self.dim), dtype=complex)
        rows = np.arange(self.dim)
        m[rows, self.dim - 1 - rows] = self.antidiag
        return m

    @classmethod
    def from_dense(cls, m: np.ndarray, tol: float = HERMITIAN_TOL) -> "CounterDiagonalMatrix | None":
        """Extract the counter-diagonal, or return None if anything else is nonzero."""
        m = as_matrix(m)
        dim = m.shape[0]
        rows = np.arange(dim)
        anti = m[rows, dim - 1 - rows].copy()
        rest = m.copy()
        rest[rows, dim - 1 - rows] = 0
        if rest.size and np.max(np.abs(rest)) > tol:
            return None
        return cls(anti)


@dataclass(frozen=True)
class SpectralResult:
    """Eigen-decomposition with eigenvalues sorted in descending order.

    ``eigenvectors[:, k]`` belongs to ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_tolerance: float = DEGENERACY_TOL
    classes: tuple = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vecs = np.asarray(self.eigenvectors, dtype=complex)
        order = np.argsort(-vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
        for k in range(vecs.shape[1]):
            vecs[:, k] = fix_phase(vecs[:, k])
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)
        object.__setattr__(self, "classes", _group(vals, self.degeneracy_tolerance))

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def multiplicities(self) -> list[int]:
        return [stop - start for start, stop in self.classes]

    @property
    def distinct_eigenvalues(self) -> list[float]:
        return [float(self.eigenvalues[start]) for start, _ in self.classes]

    @property
    def top(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def top_multiplicity(self) -> int:
        return self.multiplicities[0]

    @property
    def second_distinct(self) -> float | None:
        """Largest eigenvalue strictly below the top multiplicity class."""
        if len(self.classes) < 2:
            return None
        return float(self.eigenvalues[self.classes[1][0]])

    @property
    def gap(self) -> float | None:
        second = self.second_distinct
        return None if second is None else self.top - second

    @property
    def gaps(self) -> list[float]:
        distinct = self.distinct_eigenvalues
        return [hi - lo for hi, lo in zip(distinct, distinct[1:])]

    def top_eigenspace(self) -> np.ndarray:
        """Columns spanning the top multiplicity class."""
        start, stop = self.classes[0]
        return self.eigenvectors[:, start:stop]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _group(vals: np.ndarray, tol: float) -> tuple:
    if vals.size == 0:
        return ()
    bounds = [0]
    for k in range(1, vals.size):
        if vals[k - 1] - vals[k] > tol:
            bounds.append(k)
    bounds.append(vals.size)
    return tuple(zip(bounds[:-1], bounds[1:]))


def fix_phase(v: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Rotate the global phase so the first largest-magnitude entry is real positive."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    if mags.size == 0 or mags.max() == 0:
        return v.copy()
    k = int(np.flatnonzero(mags >= mags.max() - tol)[0])
    return v * np.exp(-1j * np.angle(v[k]))


def eig_hermitian(m: np.ndarray, method: str = "lapack", max_sweeps: int = 100) -> SpectralResult:
    """Full spectrum of a Hermitian matrix.

    ``method="jacobi"`` runs cyclic complex Jacobi rotations until the
    off-diagonal Frobenius norm drops below ``1e-12 * ||m||_F``; it is exact
    but slow in pure Python, so LAPACK's ``zheevd`` is the default.
    """
    m = as_matrix(m)
    defect = hermitian_defect(m)
    if defect > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(m), initial=0.0))):
        raise ValidationError(f"matrix is not Hermitian (defect {defect:.3e})")
    m = 0.5 * (m + m.conj().T)
    if method == "lapack":
        vals, vecs = np.linalg.eigh(m)
    elif method == "jacobi":
        vals, vecs = jacobi_eigh(m, max_sweeps=max_sweeps)
    else:
        raise ValidationError(f"unknown eigensolver method {method!r}")
    return SpectralResult(vals, vecs)


def jacobi_eigh(m: np.ndarray, max_sweeps: int = 100, rel_tol: float = 1e-12):
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` unsorted.
    """
    a = np.array(m, dtype=complex)
    dim = a.shape[0]
    v = np.eye(dim, dtype=complex)
    threshold = rel_tol * np.linalg.norm(a, "fro")

    def off_norm():
        return np.linalg.norm(a - np.diag(np.diag(a)), "fro")

    off = off_norm()
    sweeps = 0
    while off > threshold:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})",
                residual=off,
                sweeps=sweeps,
            )
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                apq = a[p, q]
                g = abs(apq)
                if g == 0.0:
                    continue
                phase = apq / g
                tau = (a[q, q].real - a[p, p].real) / (2.0 * g)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # U = diag phase on q, then real rotation; acts on columns p, q.
                up_p, uq_p = c, -s * np.conj(phase)
                up_q, uq_q = s, c * np.conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = col_p * up_p + col_q * uq_p
                a[:, q] = col_p * up_q + col_q * uq_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = np.conj(up_p) * row_p + np.conj(uq_p) * row_q
                a[q, :] = np.conj(up_q) * row_p + np.conj(uq_q) * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = vp * up_p + vq * uq_p
                v[:, q] = vp * up_q + vq * uq_q
        sweeps += 1
        off = off_norm()
    return np.real(np.diag(a)).copy(), v


def eig_counterdiagonal(m: CounterDiagonalMatrix) -> SpectralResult:
    """Analytic spectrum of a Hermitian counter-diagonal matrix.

    Each index pair (i, j = dim-1-i) decouples into a 2x2 anti-block with
    eigenvalues +-|c_i| and eigenvectors (e_i +- exp(i*arg c_j) e_j)/sqrt(2).
    """
    if not m.is_hermitian():
        raise ValidationError(f"counter-diagonal matrix is not Hermitian (defect {m.hermitian_defect():.3e})")
    c = m.antidiag
    dim = m.dim
    vals = np.empty(dim)
    vecs = np.zeros((dim, dim), dtype=complex)
    r = 1.0 / np.sqrt(2.0)
    col = 0
    for i in range(dim // 2):
        j = dim - 1 - i
        mag = abs(c[j])
        w = np.exp(1j * np.angle(c[j])) if mag > 0 else 1.0
        for sign in (1.0, -1.0):
            vals[col] = sign * mag
            vecs[i, col] = r
            vecs[j, col] = sign * w * r
            col += 1
    if dim % 2:
        center = dim // 2
        vals[col] = c[center].real
        vecs[center, col] = 1.0
    return SpectralResult(vals, vecs)
