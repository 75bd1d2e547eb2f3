"""Single-qubit measurement observables and the composite A, A', B, B' operators.

Parties 1..N-1 form the A side and party N is the B side. Party 1 is the
most significant qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from bellbench import linalg
from bellbench.errors import ValidationError

XY_PLANE_TOL = 1e-12


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def observable(theta: float, phi: float) -> np.ndarray:
    """n.sigma for the Bloch direction (theta, phi); eigenvalues +-1."""
    st, ct = math.sin(theta), math.cos(theta)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[ct, st * e.conjugate()], [st * e, -ct]], dtype=complex)


@dataclass(frozen=True)
class PartySetting:
    """Unprimed and primed Bloch directions of one party, in radians."""

    theta: float
    phi: float
    theta_prime: float
    phi_prime: float

    def __post_init__(self):
        for name in ("theta", "phi", "theta_prime", "phi_prime"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def xy(cls, phi: float, phi_prime: float) -> "PartySetting":
        return cls(math.pi / 2, phi, math.pi / 2, phi_prime)

    @property
    def n_vec(self) -> np.ndarray:
        return bloch_vector(self.theta, self.phi)

    @property
    def n_vec_prime(self) -> np.ndarray:
        return bloch_vector(self.theta_prime, self.phi_prime)

    @property
    def alpha(self) -> float:
        """Angle between the two measurement directions, in [0, pi]."""
        u, v = self.n_vec, self.n_vec_prime
        # atan2 form stays accurate near 0 and pi, where acos(u.v) does not.
        return math.atan2(float(np.linalg.norm(np.cross(u, v))), float(np.dot(u, v)))

    @property
    def in_xy_plane(self) -> bool:
        return (
            abs(math.cos(self.theta)) <= XY_PLANE_TOL
            and abs(math.cos(self.theta_prime)) <= XY_PLANE_TOL
            and math.sin(self.theta) > 0
            and math.sin(self.theta_prime) > 0
        )

    def observables(self) -> tuple[np.ndarray, np.ndarray]:
        return observable(self.theta, self.phi), observable(self.theta_prime, self.phi_prime)

    def as_dict(self) -> dict:
        return {"theta": self.theta, "phi": self.phi, "theta_prime": self.theta_prime, "phi_prime": self.phi_prime}


@dataclass(frozen=True)
class SettingAngles:
    """Derived angles of a setting.

    ``a``/``a_prime`` are the summed azimuths of parties 1..N-1 and
    ``b``/``b_prime`` the azimuths of party N; they are ``None`` unless every
    direction lies in the xy-plane.
    """

    alpha: tuple[float, ...]
    xy_plane: bool
    a: float | None = None
    a_prime: float | None = None
    b: float | None = None
    b_prime: float | None = None

    def require_xy(self) -> None:
        if not self.xy_plane:
            raise ValidationError("closed-form angle analysis requires all settings in the xy-plane (theta = pi/2)")

    @classmethod
    def from_sums(cls, a: float, a_prime: float, b: float, b_prime: float) -> "SettingAngles":
        return cls(alpha=(), xy_plane=True, a=a, a_prime=a_prime, b=b, b_prime=b_prime)


@dataclass(frozen=True)
class MeasurementSettings:
    parties: tuple[PartySetting, ...]

    def __post_init__(self):
        parties = tuple(self.parties)
        if len(parties) < 2:
            raise ValidationError(f"need at least 2 parties, got {len(parties)}")
        for p in parties:
            if not isinstance(p, PartySetting):
                raise ValidationError(f"parties must be PartySetting instances, got {type(p).__name__}")
        object.__setattr__(self, "parties", parties)

    @property
    def n(self) -> int:
        return len(self.parties)

    @property
    def dim(self) -> int:
        return 2**self.n

    @classmethod
    def xy(cls, phis: Sequence[float], phis_prime: Sequence[float]) -> "MeasurementSettings":
        if len(phis) != len(phis_prime):
            raise ValidationError("phis and phis_prime must have equal length")
        return cls(tuple(PartySetting.xy(p, q) for p, q in zip(phis, phis_prime)))

    @property
    def in_xy_plane(self) -> bool:
        return all(p.in_xy_plane for p in self.parties)

    def angles(self) -> SettingAngles:
        alpha = tuple(p.alpha for p in self.parties)
        if not self.in_xy_plane:
            return SettingAngles(alpha=alpha, xy_plane=False)
        head, last = self.parties[:-1], self.parties[-1]
        return SettingAngles(
            alpha=alpha,
            xy_plane=True,
            a=math.fsum(p.phi for p in head),
            a_prime=math.fsum(p.phi_prime for p in head),
            b=last.phi,
            b_prime=last.phi_prime,
        )

    def as_dict(self) -> dict:
        return {"n": self.n, "parties": [p.as_dict() for p in self.parties]}


class Composites(NamedTuple):
    A: np.ndarray
    A_prime: np.ndarray
    B: np.ndarray
    B_prime: np.ndarray


def build_composites(s: MeasurementSettings) -> Composites:
    linalg.check_capacity(s.dim)
    obs = [p.observables() for p in s.parties]
    head = obs[:-1]
    A = linalg.kron_all(x for x, _ in head)
    A_prime = linalg.kron_all(x for _, x in head)
    B, B_prime = obs[-1]
    return Composites(A, A_prime, B, B_prime)


def commutator_observables(A, A_prime, B, B_prime) -> tuple[np.ndarray, np.ndarray]:
    """A'' = -(i/2)[A, A'] and B'' = -(i/2)[B, B']."""
    A2 = -0.5j * linalg.commutator(A, A_prime)
    B2 = -0.5j * linalg.commutator(B, B_prime)
    return A2, B2


@dataclass(frozen=True)
class NormBoundReport:
    norm_A2: float
    norm_B2: float
    # Reference values |sin(sum alpha_j)| (j < N) and |sin alpha_N|, no sign choice applied.
    sin_bound_A: float
    sin_bound_B: float

    def as_dict(self) -> dict:
        return {
            "norm_A2": self.norm_A2,
            "norm_B2": self.norm_B2,
            "sin_bound_A": self.sin_bound_A,
            "sin_bound_B": self.sin_bound_B,
        }


def norm_bound_check(s: MeasurementSettings) -> NormBoundReport:
    A2, B2 = commutator_observables(*build_composites(s))
    alpha = s.angles().alpha
    return NormBoundReport(
        norm_A2=linalg.operator_norm(A2),
        norm_B2=linalg.operator_norm(B2),
        sin_bound_A=abs(math.sin(math.fsum(alpha[:-1]))),
        sin_bound_B=abs(math.sin(alpha[-1])),
    )
