"""
Pure states of a finite-level system as rays in projective Hilbert space.

Observables enter as expectation-value functions ``e_A(psi) = <psi|A|psi>``;
their Poisson bracket is evaluated through the commutator identity
``{e_A, e_B} = e_{i[A, B]}``, so no Kähler tensor is ever built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .spectral import HermitianOperator, SpectralData, propagator

__all__ = [
    "RAY_TOL",
    "PureState",
    "ObservableFunction",
    "ray_equal",
    "ray_distance",
    "expectation",
    "poisson_bracket",
    "evolve",
    "is_fixed_point",
    "random_state",
]

RAY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PureState:
    """
    A ray, stored as a unit-norm representative vector.

    The representative is normalized on construction; its global phase
    carries no meaning and every consumer is phase-blind.
    """

    vector: np.ndarray

    def __post_init__(self):
        v = np.array(self.vector, dtype=complex, copy=True).reshape(-1)
        if v.size < 1 or not np.all(np.isfinite(v)):
            raise ValueError("state vector must be finite and non-empty")
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError("the zero vector does not define a ray")
        v = v / norm
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def with_phase(self, alpha: float) -> "PureState":
        """Same ray, representative multiplied by ``exp(i alpha)``."""
        return PureState(np.exp(1j * alpha) * self.vector)

    def __repr__(self):
        return f"PureState({np.array2string(self.vector, precision=6)})"


@dataclass(frozen=True)
class ObservableFunction:
    """The real function ``e_A`` on projective space induced by ``operator``."""

    operator: HermitianOperator

    def __post_init__(self):
        if not isinstance(self.operator, HermitianOperator):
            object.__setattr__(self, "operator", HermitianOperator(self.operator))

    @property
    def dim(self) -> int:
        return self.operator.dim

    def __call__(self, p: PureState) -> float:
        return expectation(self, p)


def _as_observable(A) -> ObservableFunction:
    return A if isinstance(A, ObservableFunction) else ObservableFunction(A)


def _check_dims(*dims):
    if len(set(dims)) != 1:
        raise DimensionMismatch(f"incompatible dimensions {dims}")


def ray_distance(p1: PureState, p2: PureState) -> float:
    """
    ``min_alpha || psi1 - exp(i alpha) psi2 ||``.

    Evaluated componentwise after phase alignment, so it resolves distances
    down to rounding level instead of the ``sqrt(eps)`` floor of
    ``sqrt(2 - 2|<psi1|psi2>|)``.
    """
    _check_dims(p1.dim, p2.dim)
    overlap = np.vdot(p2.vector, p1.vector)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(p1.vector - phase * p2.vector))


def ray_equal(p1: PureState, p2: PureState, tol: float = RAY_TOL) -> bool:
    """True when ``|<psi1|psi2>| > 1 - tol``."""
    _check_dims(p1.dim, p2.dim)
    return bool(abs(np.vdot(p1.vector, p2.vector)) > 1.0 - tol)


def expectation(A, p: PureState) -> float:
    A = _as_observable(A)
    _check_dims(A.dim, p.dim)
    psi = p.vector
    return float(np.real(np.vdot(psi, A.operator.matrix @ psi)))


def poisson_bracket(A, B, p: PureState) -> float:
    """``{e_A, e_B}(p) = <psi| i(AB - BA) |psi>``."""
    A, B = _as_observable(A), _as_observable(B)
    _check_dims(A.dim, B.dim, p.dim)
    a, b = A.operator.matrix, B.operator.matrix
    psi = p.vector
    # <psi|i[A,B]|psi> = -2 Im <A psi | B psi>
    return float(-2.0 * np.imag(np.vdot(a @ psi, b @ psi)))


def evolve(S: SpectralData, p: PureState, tau: float) -> PureState:
    _check_dims(S.dim, p.dim)
    return PureState(propagator(S, tau) @ p.vector)


def is_fixed_point(S: SpectralData, p: PureState, tol: float = RAY_TOL) -> bool:
    """
    True when ``|| H psi - e_H(psi) psi || < tol``, i.e. ``psi`` lies in a
    single eigenspace. Evaluated in the eigenbasis.
    """
    _check_dims(S.dim, p.dim)
    c = S.to_eigenbasis(p.vector)
    weights = np.abs(c) ** 2
    mean = float(np.dot(weights, S.eigenvalues))
    residual = float(np.linalg.norm((S.eigenvalues - mean) * c))
    return residual < tol


def random_state(rng: np.random.Generator, n: int) -> PureState:
    """Haar-random ray."""
    return PureState(rng.normal(size=n) + 1j * rng.normal(size=n))
