"""
Three closed-form classical systems and their time functions.

===================  ===  ==============================  =====================
system               d    time function                   clock law
===================  ===  ==============================  =====================
ConstantForce        3    F.p / |F|^2                     T -> T + tau
FreeParticle         3    m (p.q) / |p|^2                 T -> T + tau
HarmonicOscillator   1    exp(i theta), unit complex      T -> exp(i nu tau) T
===================  ===  ==============================  =====================

The oscillator angle is ``theta = atan2(m nu q, p)`` in ``[0, 2pi)``; it grows
at rate ``nu`` along the flow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .errors import DimensionMismatch, NotInReducedSpace

__all__ = [
    "CLASSICAL_TOL",
    "PhasePoint",
    "FreeParticle",
    "ConstantForce",
    "HarmonicOscillator",
    "ClassicalSystem",
    "flow",
    "time_function_classical",
    "in_reduced_space_classical",
    "ho_chart",
    "theta_pairing",
]

CLASSICAL_TOL = 1e-12


def _vec(x, name):
    a = np.array(x, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite components")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """Point ``(q, p)`` of ``T*R^d``; scalars are promoted to length-1 arrays."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q, p = _vec(self.q, "q"), _vec(self.p, "p")
        if q.shape != p.shape:
            raise DimensionMismatch(f"q has {q.size} components, p has {p.size}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def dim(self) -> int:
        return self.q.size

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    def __eq__(self, other):
        if not isinstance(other, PhasePoint):
            return NotImplemented
        return bool(np.array_equal(self.q, other.q) and np.array_equal(self.p, other.p))

    def __hash__(self):
        return hash((self.q.tobytes(), self.p.tobytes()))

    def __repr__(self):
        return f"PhasePoint(q={self.q.tolist()}, p={self.p.tolist()})"


class _System:
    dim = 3

    def _check(self, x: PhasePoint):
        if x.dim != self.dim:
            raise DimensionMismatch(
                f"{type(self).__name__} lives in d={self.dim}, got d={x.dim}"
            )

    def _require_reduced(self, x, tol=CLASSICAL_TOL):
        if not self.in_reduced_space(x, tol):
            raise NotInReducedSpace(f"{x!r} is a fixed point of {type(self).__name__}")

    def sample(self, rng: np.random.Generator, scale: float = 1.0) -> PhasePoint:
        """Random point of the reduced space with components of order ``scale``."""
        while True:
            x = PhasePoint(scale * rng.uniform(-1, 1, self.dim),
                           scale * rng.uniform(-1, 1, self.dim))
            if self.in_reduced_space(x, 1e-3 * scale):
                return x


@dataclass(frozen=True)
class FreeParticle(_System):
    m: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.m) and self.m > 0):
            raise ValueError("mass must be positive")

    def flow(self, x: PhasePoint, tau: float) -> PhasePoint:
        self._check(x)
        return PhasePoint(x.q + x.p * (tau / self.m), x.p)

    def vector_field(self, x: PhasePoint) -> Tuple[np.ndarray, np.ndarray]:
        return x.p / self.m, np.zeros_like(x.p)

    def hamiltonian(self, x: PhasePoint) -> float:
        self._check(x)
        return float(x.p @ x.p / (2 * self.m))

    def in_reduced_space(self, x: PhasePoint, tol: float = CLASSICAL_TOL) -> bool:
        self._check(x)
        return bool(np.linalg.norm(x.p) > tol)

    def time_function(self, x: PhasePoint) -> float:
        """Newtonian time of arrival at the plane through the origin normal to ``p``."""
        self._require_reduced(x)
        return float(self.m * (x.p @ x.q) / (x.p @ x.p))

    def level_set_partner(self, rng: np.random.Generator, x: PhasePoint) -> PhasePoint:
        t = self.time_function(x)
        p2 = rng.uniform(-1, 1, 3) * (1 + np.linalg.norm(x.p))
        while np.linalg.norm(p2) < 1e-3:
            p2 = rng.uniform(-1, 1, 3)
        q2 = rng.uniform(-1, 1, 3) * (1 + np.linalg.norm(x.q))
        q2 = q2 + (t - self.m * (p2 @ q2) / (p2 @ p2)) * p2 / self.m
        return PhasePoint(q2, p2)


@dataclass(frozen=True)
class ConstantForce(_System):
    m: float = 1.0
    F: Tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not (np.isfinite(self.m) and self.m > 0):
            raise ValueError("mass must be positive")
        F = tuple(float(f) for f in self.F)
        if len(F) != 3 or not all(np.isfinite(F)):
            raise ValueError("F must be a finite 3-vector")
        if np.linalg.norm(F) == 0.0:
            raise ValueError("F must be non-zero")
        object.__setattr__(self, "F", F)

    @property
    def force(self) -> np.ndarray:
        return np.asarray(self.F)

    def flow(self, x: PhasePoint, tau: float) -> PhasePoint:
        self._check(x)
        F = self.force
        return PhasePoint(x.q + x.p * (tau / self.m) + F * (tau * tau / (2 * self.m)),
                          x.p + F * tau)

    def vector_field(self, x: PhasePoint) -> Tuple[np.ndarray, np.ndarray]:
        return x.p / self.m, self.force.copy()

    def hamiltonian(self, x: PhasePoint) -> float:
        self._check(x)
        return float(x.p @ x.p / (2 * self.m) - self.force @ x.q)

    def in_reduced_space(self, x: PhasePoint, tol: float = CLASSICAL_TOL) -> bool:
        self._check(x)
        # the vector field has no zeros
        return True

    def time_function(self, x: PhasePoint) -> float:
        self._check(x)
        F = self.force
        return float((F @ x.p) / (F @ F))

    def level_set_partner(self, rng: np.random.Generator, x: PhasePoint) -> PhasePoint:
        F = self.force
        t = self.time_function(x)
        p2 = rng.uniform(-1, 1, 3) * (1 + np.linalg.norm(x.p))
        p2 = p2 + (t - (F @ p2) / (F @ F)) * F
        q2 = rng.uniform(-1, 1, 3) * (1 + np.linalg.norm(x.q))
        return PhasePoint(q2, p2)


@dataclass(frozen=True)
class HarmonicOscillator(_System):
    m: float = 1.0
    nu: float = 1.0
    dim = 1

    def __post_init__(self):
        if not (np.isfinite(self.m) and self.m > 0):
            raise ValueError("mass must be positive")
        if not (np.isfinite(self.nu) and self.nu > 0):
            raise ValueError("frequency must be positive")

    @property
    def period(self) -> float:
        return 2 * np.pi / self.nu

    def flow(self, x: PhasePoint, tau: float) -> PhasePoint:
        self._check(x)
        m, nu = self.m, self.nu
        c, s = np.cos(nu * tau), np.sin(nu * tau)
        return PhasePoint(x.q * c + x.p * (s / (m * nu)), x.p * c - x.q * (m * nu * s))

    def vector_field(self, x: PhasePoint) -> Tuple[np.ndarray, np.ndarray]:
        return x.p / self.m, -self.m * self.nu ** 2 * x.q

    def hamiltonian(self, x: PhasePoint) -> float:
        self._check(x)
        q, p = float(x.q[0]), float(x.p[0])
        return p * p / (2 * self.m) + self.m * self.nu ** 2 * q * q / 2

    def in_reduced_space(self, x: PhasePoint, tol: float = CLASSICAL_TOL) -> bool:
        self._check(x)
        return bool(np.hypot(x.q[0], x.p[0]) > tol)

    def _polar(self, x):
        self._require_reduced(x)
        return self.m * self.nu * float(x.q[0]), float(x.p[0])

    def chart(self, x: PhasePoint) -> Tuple[float, float]:
        """``(theta, H)`` with ``theta = atan2(m nu q, p)`` in ``[0, 2pi)``."""
        a, b = self._polar(x)
        theta = float(np.arctan2(a, b)) % (2 * np.pi)
        if theta >= 2 * np.pi:
            theta = 0.0
        return theta, self.hamiltonian(x)

    def chart_inverse(self, theta: float, energy: float) -> PhasePoint:
        if energy <= 0:
            raise NotInReducedSpace("energy must be positive")
        R = np.sqrt(2 * self.m * energy)
        return PhasePoint([R * np.sin(theta) / (self.m * self.nu)], [R * np.cos(theta)])

    def time_function(self, x: PhasePoint) -> complex:
        a, b = self._polar(x)
        return complex(b, a) / np.hypot(a, b)

    def angle_differential(self, x: PhasePoint) -> Tuple[float, float]:
        """
        Components ``(d theta/dq, d theta/dp) = nu (p, -q) / (2H)`` of the
        closed, non-exact one-form ``d theta`` on the punctured plane.
        """
        self._require_reduced(x)
        q, p = float(x.q[0]), float(x.p[0])
        two_h = 2 * self.hamiltonian(x)
        return self.nu * p / two_h, -self.nu * q / two_h

    def theta_pairing(self, x: PhasePoint) -> float:
        """``d theta`` evaluated on the dynamical vector field; equals ``nu``."""
        dq, dp = self.angle_differential(x)
        vq, vp = self.vector_field(x)
        return float(dq * vq[0] + dp * vp[0])

    def level_set_partner(self, rng: np.random.Generator, x: PhasePoint) -> PhasePoint:
        # simultaneity classes are the open rays from the origin
        lam = rng.uniform(0.2, 3.0)
        while abs(lam - 1.0) < 1e-2:
            lam = rng.uniform(0.2, 3.0)
        return PhasePoint(lam * x.q, lam * x.p)


ClassicalSystem = Union[FreeParticle, ConstantForce, HarmonicOscillator]


def flow(sys: ClassicalSystem, x: PhasePoint, tau: float) -> PhasePoint:
    return sys.flow(x, tau)


def time_function_classical(sys: ClassicalSystem, x: PhasePoint) -> Union[float, complex]:
    return sys.time_function(x)


def in_reduced_space_classical(sys: ClassicalSystem, x: PhasePoint,
                               tol: float = CLASSICAL_TOL) -> bool:
    return sys.in_reduced_space(x, tol)


def ho_chart(sys: HarmonicOscillator, x: PhasePoint) -> Tuple[float, float]:
    return sys.chart(x)


def theta_pairing(sys: HarmonicOscillator, x: PhasePoint) -> float:
    return sys.theta_pairing(x)
