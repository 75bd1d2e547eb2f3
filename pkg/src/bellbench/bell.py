"""The generalized CHSH operator  I_N = A (x) B + A (x) B' + A' (x) B - A' (x) B'."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from bellbench import linalg
from bellbench.errors import NumericalError, ValidationError
from bellbench.observables import (
    Composites,
    MeasurementSettings,
    SettingAngles,
    build_composites,
    commutator_observables,
)
from bellbench.states import TRACE_TOL, QuantumState

TSIRELSON = 2 * math.sqrt(2)
TSIRELSON_TOL = 1e-9
IMAG_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BellOperator:
    settings: MeasurementSettings
    matrix: np.ndarray
    composites: Composites

    @property
    def n(self) -> int:
        return self.settings.n

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def operator_norm(self) -> float:
        return linalg.operator_norm(self.matrix)

    @cached_property
    def counterdiagonal(self) -> linalg.CounterDiagonalMatrix | None:
        """Counter-diagonal view of the matrix when it has that structure (within 1e-12)."""
        return linalg.CounterDiagonalMatrix.from_dense(self.matrix)

    def spectrum(self, method: str = "auto") -> linalg.SpectralResult:
        """Eigen-decomposition; ``auto`` takes the analytic path for counter-diagonal matrices."""
        if method == "auto":
            method = "counterdiagonal" if self.counterdiagonal is not None else "lapack"
        if method == "counterdiagonal":
            if self.counterdiagonal is None:
                raise ValidationError("Bell operator is not counter-diagonal at these settings")
            return linalg.eig_counterdiagonal(self.counterdiagonal)
        return linalg.eig_hermitian(self.matrix, method=method)


def build_bell(s: MeasurementSettings, check_tsirelson: bool = True) -> BellOperator:
    comp = build_composites(s)
    A, Ap, B, Bp = comp
    m = linalg.kron(A, B + Bp) + linalg.kron(Ap, B - Bp)
    defect = linalg.hermitian_defect(m)
    if defect > linalg.HERMITIAN_TOL:
        raise NumericalError(f"Bell operator lost Hermiticity (defect {defect:.3e})")
    op = BellOperator(settings=s, matrix=m, composites=comp)
    if check_tsirelson and op.operator_norm > TSIRELSON + TSIRELSON_TOL:
        raise NumericalError(f"Bell operator norm {op.operator_norm!r} exceeds 2*sqrt(2)")
    return op


def square_identity_rhs(b: BellOperator) -> np.ndarray:
    """4 (I + A'' (x) B'')."""
    A2, B2 = commutator_observables(*b.composites)
    return 4.0 * (np.eye(b.dim) + linalg.kron(A2, B2))


def verify_square_identity(b: BellOperator) -> float:
    """Frobenius residual of I_N^2 - 4 (I + A'' (x) B'')."""
    return linalg.frobenius_norm(b.matrix @ b.matrix - square_identity_rhs(b))


def expectation(b: BellOperator, state: QuantumState) -> float:
    if state.dim != b.dim:
        raise ValidationError(f"state has dimension {state.dim}, operator has {b.dim}")
    if state.is_pure:
        norm = float(np.linalg.norm(state.vector))
        if abs(norm - 1.0) > TRACE_TOL:
            raise ValidationError(f"state vector is not normalized (norm {norm!r})")
        value = np.vdot(state.vector, b.matrix @ state.vector)
    else:
        tr = np.trace(state.density).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
        value = np.einsum("ij,ji->", state.density, b.matrix)
    if abs(value.imag) > IMAG_TOL:
        raise NumericalError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def correlation_bracket(a: float, a_prime: float, b: float, b_prime: float) -> float:
    """cos(a+b) + cos(a+b') + cos(a'+b) - cos(a'+b')."""
    return math.cos(a + b) + math.cos(a + b_prime) + math.cos(a_prime + b) - math.cos(a_prime + b_prime)


def gghz_expectation_closed_form(angles: SettingAngles, vartheta: float) -> float:
    """Bell value of the generalized GHZ state for xy-plane settings."""
    angles.require_xy()
    return math.sin(2 * vartheta) * correlation_bracket(angles.a, angles.a_prime, angles.b, angles.b_prime)
