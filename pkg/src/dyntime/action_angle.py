"""
Action-angle charts on the reduced state space and the periodic time
functions they induce.

Eigen-indices are 1-based throughout this module, matching the labels
``|1>, ..., |n>`` of the ascending eigenbasis produced by
:func:`dyntime.spectral.spectral_decompose`.

For a state ``psi = sum_j r_j exp(i theta_j) |j>`` with every ``r_j > 0``
the chart with reference index ``ref`` is::

    angles_j  = exp(i (theta_j - theta_ref))     j != ref, ascending
    actions_j = r_j**2 / sum_k r_k**2

Under ``U(tau) = exp(-i H tau)`` each angle rotates uniformly,
``T_j(evolve(p, tau)) = exp(-i (nu_j - nu_ref) tau) T_j(p)``, while the
actions stay put.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import (
    DegenerateFrequency,
    DimensionMismatch,
    InvalidChart,
    NotInReducedSpace,
)
from .projective import PureState
from .spectral import SpectralData

__all__ = [
    "REDUCED_TOL",
    "EnergyBasisCoordinates",
    "ActionAngleChart",
    "in_reduced_space",
    "energy_coordinates",
    "chart",
    "chart_inverse",
    "time_function",
    "time_function_period",
    "admissible_indices",
    "intertwine",
    "intertwiner",
    "random_reduced_state",
    "level_set_partner",
]

REDUCED_TOL = 1e-9
_UNIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EnergyBasisCoordinates:
    """Polar form ``r_j exp(i theta_j)`` of ``<j|psi>``, phases in ``[0, 2pi)``."""

    moduli: np.ndarray
    phases: np.ndarray


@dataclass(frozen=True, eq=False)
class ActionAngleChart:
    """
    Image of a reduced-space state under the chart with reference
    ``ref_index``.

    ``indices`` lists the eigen-indices (1-based, ascending, ``ref_index``
    skipped) that label the entries of ``angles`` and ``actions``.
    """

    ref_index: int
    angles: np.ndarray
    actions: np.ndarray

    def __post_init__(self):
        angles = np.array(self.angles, dtype=complex, copy=True).reshape(-1)
        actions = np.array(self.actions, dtype=float, copy=True).reshape(-1)
        if angles.shape != actions.shape or angles.size < 1:
            raise InvalidChart("angles and actions must be non-empty and of equal length")
        n = angles.size + 1
        if not 1 <= int(self.ref_index) <= n:
            raise InvalidChart(f"ref_index {self.ref_index} outside 1..{n}")
        if not np.all(np.isfinite(angles)) or np.any(np.abs(np.abs(angles) - 1.0) > _UNIT_TOL):
            raise InvalidChart("angles must have unit modulus")
        if not np.all(np.isfinite(actions)) or np.any(actions <= 0.0) or np.any(actions >= 1.0):
            raise InvalidChart("actions must lie in the open interval (0, 1)")
        if actions.sum() >= 1.0:
            raise InvalidChart("actions must sum to less than 1")
        angles.setflags(write=False)
        actions.setflags(write=False)
        object.__setattr__(self, "ref_index", int(self.ref_index))
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "actions", actions)

    @property
    def dim(self) -> int:
        return self.angles.size + 1

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(j for j in range(1, self.dim + 1) if j != self.ref_index)

    def angle(self, j: int) -> complex:
        """Angle attached to eigen-index ``j``."""
        return complex(self.angles[self.indices.index(j)])

    def action(self, j: int) -> float:
        return float(self.actions[self.indices.index(j)])


def _check(p: PureState, S: SpectralData):
    if p.dim != S.dim:
        raise DimensionMismatch(f"state dim {p.dim} != operator dim {S.dim}")


def _check_index(j: int, n: int, name: str):
    if not 1 <= j <= n:
        raise ValueError(f"{name}={j} outside 1..{n}")


def in_reduced_space(p: PureState, S: SpectralData, tol: float = REDUCED_TOL) -> bool:
    """True iff every energy-basis component satisfies ``|<j|psi>| > tol``."""
    _check(p, S)
    return bool(np.all(np.abs(S.to_eigenbasis(p.vector)) > tol))


def energy_coordinates(p: PureState, S: SpectralData) -> EnergyBasisCoordinates:
    _check(p, S)
    c = S.to_eigenbasis(p.vector)
    phases = np.mod(np.angle(c), 2 * np.pi)
    # mod can round 2pi - tiny up to exactly 2pi
    phases[phases >= 2 * np.pi] = 0.0
    return EnergyBasisCoordinates(np.abs(c), phases)


def chart(p: PureState, S: SpectralData, ref_index: Optional[int] = None,
          tol: float = REDUCED_TOL) -> ActionAngleChart:
    """
    Action-angle coordinates of ``p``.

    Parameters
    ----------
    p : PureState
    S : SpectralData
    ref_index : int, optional
        Reference eigen-index (1-based); defaults to ``n``.
    tol : float
        Reduced-space threshold on the energy-basis moduli.

    Raises
    ------
    NotInReducedSpace
        If some ``|<j|psi>| <= tol``.
    """
    _check(p, S)
    n = S.dim
    ref = n if ref_index is None else int(ref_index)
    _check_index(ref, n, "ref_index")
    c = S.to_eigenbasis(p.vector)
    mod = np.abs(c)
    if np.any(mod <= tol):
        raise NotInReducedSpace(
            f"energy component(s) {np.flatnonzero(mod <= tol) + 1} below {tol:g}"
        )
    units = c / mod
    others = [j - 1 for j in range(1, n + 1) if j != ref]
    angles = units[others] * np.conj(units[ref - 1])
    angles = angles / np.abs(angles)
    weights = mod ** 2
    actions = weights[others] / weights.sum()
    try:
        return ActionAngleChart(ref, angles, actions)
    except InvalidChart as exc:
        # a component survived the threshold but its squared weight
        # vanished in double precision
        raise NotInReducedSpace(str(exc)) from exc


def chart_inverse(c: ActionAngleChart, S: SpectralData) -> PureState:
    """
    The ray with chart ``c``; the representative has a real-positive
    reference component.
    """
    if c.dim != S.dim:
        raise DimensionMismatch(f"chart dim {c.dim} != operator dim {S.dim}")
    coeffs = np.empty(S.dim, dtype=complex)
    idx = [j - 1 for j in c.indices]
    coeffs[idx] = np.sqrt(c.actions) * c.angles
    coeffs[c.ref_index - 1] = np.sqrt(1.0 - c.actions.sum())
    return PureState(S.from_eigenbasis(coeffs))


def admissible_indices(S: SpectralData, ref_index: Optional[int] = None) -> List[int]:
    """Eigen-indices ``j != ref`` with ``nu_j != nu_ref``: the valid time functions."""
    n = S.dim
    ref = n if ref_index is None else int(ref_index)
    _check_index(ref, n, "ref_index")
    return [j for j in range(1, n + 1) if j != ref and not S.degenerate(j - 1, ref - 1)]


def _rate(S: SpectralData, j: int, ref: int) -> float:
    n = S.dim
    _check_index(j, n, "j")
    _check_index(ref, n, "ref_index")
    if j == ref or S.degenerate(j - 1, ref - 1):
        raise DegenerateFrequency(
            f"nu_{j} = nu_{ref}: T_{j} does not move along the flow"
        )
    return float(S.eigenvalues[j - 1] - S.eigenvalues[ref - 1])


def time_function(p: PureState, S: SpectralData, j: int,
                  ref_index: Optional[int] = None, tol: float = REDUCED_TOL) -> complex:
    """
    Periodic time function ``T_j``: the ``j``-th torus coordinate of the chart.

    Returns a unit complex number. Raises :class:`DegenerateFrequency` when
    ``nu_j == nu_ref`` and :class:`NotInReducedSpace` outside the domain.
    """
    ref = S.dim if ref_index is None else int(ref_index)
    _rate(S, j, ref)
    return chart(p, S, ref, tol).angle(j)


def time_function_period(S: SpectralData, j: int, ref_index: Optional[int] = None) -> float:
    """Period ``2 pi / |nu_j - nu_ref|`` of ``T_j`` along the flow."""
    ref = S.dim if ref_index is None else int(ref_index)
    return 2 * np.pi / abs(_rate(S, j, ref))


def intertwine(from_ref: int, to_ref: int, c: ActionAngleChart,
               S: SpectralData) -> ActionAngleChart:
    """Re-express a chart taken at ``from_ref`` in the chart at ``to_ref``."""
    if c.ref_index != from_ref:
        raise InvalidChart(f"chart has ref_index {c.ref_index}, expected {from_ref}")
    _check_index(to_ref, S.dim, "to_ref")
    if from_ref == to_ref:
        return c
    return chart(chart_inverse(c, S), S, to_ref, tol=0.0)


def intertwiner(p: PureState, S: SpectralData, from_ref: int, to_ref: int) -> PureState:
    """
    State-space map ``Phi^{-1} o Psi``: read the coordinates of ``p`` in the
    ``from_ref`` chart and place them, slot by slot, into the ``to_ref``
    chart. Pulling back the ``k``-th torus coordinate of the target chart
    through this map recovers the ``k``-th coordinate of the source chart.
    """
    c = chart(p, S, from_ref)
    return chart_inverse(ActionAngleChart(to_ref, c.angles, c.actions), S)


def random_reduced_state(rng: np.random.Generator, S: SpectralData,
                         min_modulus: float = 1e-3) -> PureState:
    """Haar-random state conditioned on ``min_j |<j|psi>| >= min_modulus``."""
    n = S.dim
    while True:
        z = rng.normal(size=n) + 1j * rng.normal(size=n)
        z /= np.linalg.norm(z)
        if np.min(np.abs(z)) >= min_modulus:
            return PureState(S.from_eigenbasis(z))


def level_set_partner(S: SpectralData, j: int,
                      ref_index: Optional[int] = None) -> Callable[[np.random.Generator, PureState], PureState]:
    """
    Sampler of states on the level set of ``T_j`` through a given state.

    The returned callable keeps the ``j``-th angle and redraws every other
    angle and all actions, then maps back through :func:`chart_inverse`.
    """
    ref = S.dim if ref_index is None else int(ref_index)
    _rate(S, j, ref)

    def partner(rng: np.random.Generator, p: PureState) -> PureState:
        c = chart(p, S, ref)
        k = c.indices.index(j)
        angles = np.exp(2j * np.pi * rng.random(c.angles.size))
        angles[k] = c.angles[k]
        weights = rng.dirichlet(np.ones(S.dim))
        # keep actions away from the boundary of the simplex
        weights = 0.9 * weights + 0.1 / S.dim
        actions = np.delete(weights, ref - 1)
        return chart_inverse(ActionAngleChart(ref, angles, actions), S)

    return partner
