"""Quantum state container and factories for GHZ-family states."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from bellbench import linalg
from bellbench.errors import ValidationError

PURE_NORM_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuantumState:
    """An N-qubit state held either as a ket (``vector``) or as a density matrix.

    Pure states stay vectors until :meth:`density_matrix` is asked for.
    """

    n: int
    vector: np.ndarray | None = None
    density: np.ndarray | None = None

    def __post_init__(self):
        if (self.vector is None) == (self.density is None):
            raise ValidationError("exactly one of vector or density must be given")
        if self.n < 1:
            raise ValidationError(f"n must be positive, got {self.n}")
        dim = 2**self.n
        if self.vector is not None:
            v = np.asarray(self.vector, dtype=complex).reshape(-1)
            if v.size != dim:
                raise ValidationError(f"state vector has length {v.size}, expected {dim}")
            norm = float(np.linalg.norm(v))
            if abs(norm - 1.0) > PURE_NORM_TOL:
                raise ValidationError(f"state vector is not normalized (norm {norm!r})")
            object.__setattr__(self, "vector", v)
        else:
            rho = linalg.as_matrix(self.density)
            if rho.shape[0] != dim:
                raise ValidationError(f"density matrix has dim {rho.shape[0]}, expected {dim}")
            if not linalg.is_hermitian(rho):
                raise ValidationError("density matrix is not Hermitian")
            tr = np.trace(rho).real
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
            lowest = float(np.linalg.eigvalsh(rho)[0])
            if lowest < -POSITIVITY_TOL:
                raise ValidationError(f"density matrix has negative eigenvalue {lowest:.3e}")
            object.__setattr__(self, "density", rho)

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @classmethod
    def pure(cls, vector, n: int | None = None) -> "QuantumState":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(n=_qubits(v.size) if n is None else n, vector=v)

    @classmethod
    def mixed(cls, density, n: int | None = None) -> "QuantumState":
        rho = linalg.as_matrix(density)
        return cls(n=_qubits(rho.shape[0]) if n is None else n, density=rho)

    def density_matrix(self) -> np.ndarray:
        if self.density is not None:
            return self.density
        linalg.check_capacity(self.dim)
        return np.outer(self.vector, self.vector.conj())

    def fidelity(self, other: "QuantumState") -> float:
        """Overlap tr(rho sigma); equals |<psi|phi>|^2 when both are pure."""
        if other.n != self.n:
            raise ValidationError("fidelity between states of different size")
        if self.is_pure and other.is_pure:
            return float(abs(np.vdot(self.vector, other.vector)) ** 2)
        if self.is_pure:
            return float(np.real(np.vdot(self.vector, other.density @ self.vector)))
        if other.is_pure:
            return other.fidelity(self)
        return float(np.real(np.einsum("ij,ji->", self.density, other.density)))


def _qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if n < 1 or 2**n != dim:
        raise ValidationError(f"dimension {dim} is not a power of two")
    return n


def basis_index(bits: str) -> int:
    """Index of the computational basis state |bits>, first character = party 1."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValidationError(f"invalid bit string {bits!r}")
    return int(bits, 2)


def ket(amplitudes: dict[str, complex]) -> np.ndarray:
    """Unnormalized vector from {'0101': amplitude, ...}."""
    sizes = {len(k) for k in amplitudes}
    if len(sizes) != 1:
        raise ValidationError("all bit strings must have the same length")
    v = np.zeros(2 ** sizes.pop(), dtype=complex)
    for bits, amp in amplitudes.items():
        v[basis_index(bits)] += amp
    return v


def ghz(n: int) -> QuantumState:
    return gghz(n, math.pi / 4)


def gghz(n: int, vartheta: float) -> QuantumState:
    """cos(vartheta)|0...0> + sin(vartheta)|1...1>."""
    if n < 2:
        raise ValidationError(f"GHZ states need n >= 2, got {n}")
    linalg.check_capacity(2**n)
    v = np.zeros(2**n, dtype=complex)
    v[0] = math.cos(vartheta)
    v[-1] = math.sin(vartheta)
    return QuantumState(n=n, vector=v)


def ghz_variants_n4() -> tuple[QuantumState, QuantumState, QuantumState, QuantumState]:
    """The four orthonormal 4-qubit GHZ-type states spanning the degenerate top eigenspace."""
    r = 1 / math.sqrt(2)
    amps = (
        {"0000": r, "1111": r},
        {"0011": r, "1100": r},
        {"0101": 1j * r, "1010": r},
        {"0110": -1j * r, "1001": r},
    )
    return tuple(QuantumState(n=4, vector=ket(a)) for a in amps)


def superposition(basis: Sequence[QuantumState], eps: Sequence[float]) -> QuantumState:
    """sqrt(1 - sum eps_j^2) basis[0] + sum_j eps_j basis[j]."""
    eps = np.asarray(eps, dtype=float)
    if eps.size != len(basis) - 1:
        raise ValidationError(f"need {len(basis) - 1} epsilon values, got {eps.size}")
    if not np.all(np.isfinite(eps)):
        raise ValidationError("epsilon values must be finite")
    weight = 1.0 - float(np.sum(eps**2))
    if weight < -1e-12:
        raise ValidationError(f"sum of squared epsilons is {1 - weight!r} > 1")
    v = math.sqrt(max(weight, 0.0)) * basis[0].vector
    for e, state in zip(eps, basis[1:]):
        v = v + e * state.vector
    # Inputs are orthonormal; renormalize away rounding only.
    v = v / np.linalg.norm(v)
    return QuantumState(n=basis[0].n, vector=v)


def mixture(basis: Sequence[QuantumState], eps: Sequence[float]) -> QuantumState:
    """(1 - sum eps_j) rho_0 + sum_j eps_j rho_j, with eps on the probability simplex."""
    eps = np.asarray(eps, dtype=float)
    if eps.size != len(basis) - 1:
        raise ValidationError(f"need {len(basis) - 1} epsilon values, got {eps.size}")
    if not np.all(np.isfinite(eps)) or np.any(eps < 0):
        raise ValidationError("mixture weights must be finite and non-negative")
    total = float(np.sum(eps))
    if total > 1.0 + 1e-12:
        raise ValidationError(f"mixture weights sum to {total!r} > 1; first weight would be negative")
    weights = np.concatenate([[max(1.0 - total, 0.0)], eps])
    rho = sum(w * s.density_matrix() for w, s in zip(weights, basis))
    return QuantumState(n=basis[0].n, density=rho)


def epsilon_superposition(eps: Sequence[float]) -> QuantumState:
    return superposition(ghz_variants_n4(), eps)


def epsilon_mixture(eps: Sequence[float]) -> QuantumState:
    return mixture(ghz_variants_n4(), eps)


def werner_mix(state: QuantumState, eps: float) -> QuantumState:
    """(1 - eps) rho + eps * I / 2**N."""
    if not 0.0 <= eps <= 1.0:
        raise ValidationError(f"noise weight must lie in [0, 1], got {eps}")
    rho = (1.0 - eps) * state.density_matrix() + (eps / state.dim) * np.eye(state.dim)
    return QuantumState(n=state.n, density=rho)
