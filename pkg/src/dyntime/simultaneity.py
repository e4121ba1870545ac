"""
Sampling verifier for time functions.

A candidate ``T`` is checked against two conditions along a flow
``phi_tau``:

1. *Transversality.* Non-periodic: ``T(phi_tau(x)) != T(x)`` for ``tau != 0``.
   Periodic with period ``P``: ``T(phi_t1(x)) == T(phi_t2(x))`` iff
   ``t2 - t1`` is an integer multiple of ``P``.
2. *Simultaneity.* ``T(x1) == T(x2)`` implies
   ``T(phi_tau(x1)) == T(phi_tau(x2))``.

Both are universally quantified, so the verifier can only report "no
counterexample found" over a seeded sample. Every sample draws from its own
generator ``default_rng([seed, stream, index])``; a counterexample carries
that triple and can be regenerated in isolation.
"""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from functools import singledispatch
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .action_angle import (
    in_reduced_space,
    random_reduced_state,
)
from .classical import PhasePoint
from .errors import InsufficientSamples
from .io import state_to_json
from .projective import PureState, evolve, ray_distance
from .spectral import SpectralData

__all__ = [
    "FlowHandle",
    "OrbitKind",
    "OrbitClass",
    "ConditionResult",
    "VerificationReport",
    "state_distance",
    "quantum_flow",
    "classical_flow",
    "check_group_law",
    "classify_orbit",
    "level_set_pairs",
    "verify_time_function",
    "tau_samples",
]

VERIFY_TOL = 1e-8
# |tau| (or lattice distance, periodic case) below which injectivity is not probed
MIN_TAU_GAP = 1e-6
MAX_STORED = 20

_STATES, _PAIRS, _TIMES = 0, 1, 2


@singledispatch
def state_distance(a, b) -> float:
    raise TypeError(f"no distance for {type(a).__name__}")


@state_distance.register
def _(a: PureState, b: PureState) -> float:
    return ray_distance(a, b)


@state_distance.register
def _(a: PhasePoint, b: PhasePoint) -> float:
    return float(np.linalg.norm(a.as_array() - b.as_array()))


@dataclass(frozen=True)
class FlowHandle:
    """
    A flow ``(x, tau) -> phi_tau(x)`` together with its reduced space.

    ``sample`` draws a random reduced-space state; it is only needed by the
    verifier, not by :func:`classify_orbit`.
    """

    evolve: Callable[[Any, float], Any]
    in_reduced_space: Callable[[Any], bool]
    sample: Optional[Callable[[np.random.Generator], Any]] = None
    distance: Callable[[Any, Any], float] = state_distance
    name: str = "flow"


def quantum_flow(S: SpectralData, min_modulus: float = 1e-3) -> FlowHandle:
    return FlowHandle(
        evolve=lambda p, tau: evolve(S, p, tau),
        in_reduced_space=lambda p: in_reduced_space(p, S),
        sample=lambda rng: random_reduced_state(rng, S, min_modulus),
        name=f"unitary(n={S.dim})",
    )


def classical_flow(sys) -> FlowHandle:
    return FlowHandle(
        evolve=sys.flow,
        in_reduced_space=sys.in_reduced_space,
        sample=sys.sample,
        name=type(sys).__name__,
    )


def check_group_law(f: FlowHandle, x, rng: np.random.Generator, trials: int = 8,
                    span: float = 10.0) -> float:
    """Largest ``d(phi_s(phi_t(x)), phi_{s+t}(x))`` over random ``s, t``."""
    worst = 0.0
    for _ in range(trials):
        s, t = rng.uniform(-span, span, 2)
        worst = max(worst, f.distance(f.evolve(f.evolve(x, t), s), f.evolve(x, s + t)))
    return worst


class OrbitKind(enum.Enum):
    FIXED = "fixed"
    PERIODIC = "periodic"
    NON_PERIODIC_UP_TO_HORIZON = "non_periodic_up_to_horizon"


@dataclass(frozen=True)
class OrbitClass:
    kind: OrbitKind
    period: Optional[float] = None


def _polish(g, t, steps=(1e-5, 1e-6, 1e-7)):
    """Vertex of the parabola through ``g`` at ``t - h, t, t + h``, iterated."""
    for h in steps:
        a, b, c = g(t - h), g(t), g(t + h)
        curv = a - 2 * b + c
        if curv <= 0:
            break
        t = t + 0.5 * h * (a - c) / curv
    return t


def classify_orbit(f: FlowHandle, x, horizon: float, tol: float = VERIFY_TOL,
                   grid: int = 4096) -> OrbitClass:
    """
    Classify the orbit of ``x`` as fixed, periodic or undecided.

    The return distance ``d(tau) = dist(phi_tau(x), x)`` is scanned on a
    uniform grid over ``(0, horizon]``; each grid-local minimum is refined by
    bounded minimization of ``d**2`` followed by parabolic vertex steps, and
    the first one with ``d < tol`` is the minimal period. Periods shorter than two grid steps
    can alias.
    """
    probes = np.concatenate([np.linspace(-horizon, horizon, 33), [1e-3, -1e-3, 1.0]])
    if all(f.distance(f.evolve(x, t), x) < tol for t in probes):
        return OrbitClass(OrbitKind.FIXED)

    taus = np.linspace(0.0, horizon, grid + 1)
    d = np.array([f.distance(f.evolve(x, t), x) for t in taus])
    for i in range(1, grid):
        if d[i] <= d[i - 1] and d[i] <= d[i + 1]:
            res = minimize_scalar(
                lambda t: f.distance(f.evolve(x, t), x) ** 2,
                bounds=(taus[i - 1], taus[i + 1]),
                method="bounded",
                options={"xatol": 1e-13, "maxiter": 500},
            )
            t_star = _polish(lambda t: f.distance(f.evolve(x, t), x) ** 2, float(res.x))
            if f.distance(f.evolve(x, t_star), x) < tol:
                return OrbitClass(OrbitKind.PERIODIC, t_star)
    if d[-1] < tol:
        return OrbitClass(OrbitKind.PERIODIC, float(horizon))
    return OrbitClass(OrbitKind.NON_PERIODIC_UP_TO_HORIZON)


def _value_distance(a, b) -> float:
    return float(abs(a - b))


def _slide_onto_level(T, f: FlowHandle, y, target, value_tol, span, rng):
    """Move ``y`` along its orbit until ``T`` equals ``target``; None if no crossing."""
    if isinstance(target, complex):
        def g(s):
            return float(np.angle(T(f.evolve(y, s)) * np.conj(target)))
    else:
        def g(s):
            return float(T(f.evolve(y, s)) - target)
    grid = np.linspace(-span, span, 257) + rng.uniform(0, 2 * span / 256)
    vals = [g(s) for s in grid]
    for a, b, ga, gb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if ga == 0.0:
            return f.evolve(y, a)
        if ga * gb < 0 and (not isinstance(target, complex) or abs(ga) + abs(gb) < np.pi):
            s = brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            x2 = f.evolve(y, s)
            if _value_distance(T(x2), target) < value_tol:
                return x2
    return None


def level_set_pairs(T: Callable, generator: Callable[[np.random.Generator], Any],
                    value_tol: float, count: int, seed: int, *,
                    partner: Optional[Callable] = None, flow: Optional[FlowHandle] = None,
                    distance: Callable = state_distance, max_attempts: Optional[int] = None,
                    ) -> List[Tuple[Any, Any]]:
    """
    Pairs of distinct states on a common level set of ``T``.

    Second members come from ``partner(rng, x1)`` when given (exact
    constructions, e.g. through a chart inverse). Otherwise, with a ``flow``,
    a point on another orbit is slid along its orbit onto the level of
    ``x1``, falling back to a point further along the orbit of ``x1`` itself
    (which works for constants of motion).

    Raises
    ------
    InsufficientSamples
        When fewer than ``count`` pairs were found within ``max_attempts``.
    """
    if count <= 0:
        return []
    if partner is None and flow is None:
        raise ValueError("level_set_pairs needs a partner constructor or a flow")
    max_attempts = max_attempts or 4 * count + 16
    pairs = []
    for attempt in range(max_attempts):
        if len(pairs) == count:
            break
        rng = np.random.default_rng([seed, _PAIRS, attempt])
        x1 = generator(rng)
        t1 = T(x1)
        if partner is not None:
            x2 = partner(rng, x1)
        else:
            x2 = _slide_onto_level(T, flow, generator(rng), t1, value_tol, 10.0, rng)
            if x2 is None:
                x2 = flow.evolve(x1, rng.uniform(1.0, 10.0))
        if _value_distance(T(x2), t1) < value_tol and distance(x1, x2) > 1e-9:
            pairs.append((x1, x2))
    if len(pairs) < count:
        raise InsufficientSamples(f"found {len(pairs)} of {count} level-set pairs")
    return pairs


def tau_samples(rng: np.random.Generator, n_times: int, horizon: float) -> np.ndarray:
    """
    Fixed stratified grid (strata midpoints, never 0) plus uniform draws on
    ``[-horizon, horizon]``; draws with ``|tau| < MIN_TAU_GAP`` are redrawn.
    """
    n_grid = 2 * (n_times // 4)
    width = 2 * horizon / max(n_grid, 1)
    grid = -horizon + (np.arange(n_grid) + 0.5) * width
    draws = []
    while len(draws) < n_times - n_grid:
        t = rng.uniform(-horizon, horizon)
        if abs(t) >= MIN_TAU_GAP:
            draws.append(t)
    return np.concatenate([grid, draws])


@dataclass
class ConditionResult:
    passed: bool = True
    checks: int = 0
    failures: int = 0
    counterexamples: List[Dict[str, Any]] = field(default_factory=list)

    def record(self, ok: bool, evidence: Dict[str, Any]):
        self.checks += 1
        if not ok:
            self.passed = False
            self.failures += 1
            if len(self.counterexamples) < MAX_STORED:
                self.counterexamples.append(evidence)


@dataclass
class VerificationReport:
    """Outcome of :func:`verify_time_function`; ``to_json`` gives the stable schema."""

    condition_1: ConditionResult
    condition_2: ConditionResult
    samples_used: int
    seed: int
    tolerances: Dict[str, float]
    periodic: bool
    period: Optional[float] = None
    horizon: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.condition_1.passed and self.condition_2.passed

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kwargs)


def _encode(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return float(v)


def verify_time_function(f: FlowHandle, T: Callable, periodic: bool,
                         n_states: int = 32, n_times: int = 32,
                         tol: float = VERIFY_TOL, seed: int = 0, *,
                         period: Optional[float] = None,
                         horizon: Optional[float] = None,
                         partner: Optional[Callable] = None) -> VerificationReport:
    """
    Check both time-function conditions on seeded samples.

    Parameters
    ----------
    f : FlowHandle
        Must provide ``sample``.
    T : callable
        Candidate; real-valued, or unit-complex when ``periodic``.
    periodic : bool
        Use the periodic form of condition 1; requires ``period``.
    n_states, n_times : int
        States (and level-set pairs) sampled; times per state.
    tol : float
        Equality threshold on ``|T(a) - T(b)|``.
    seed : int
    period : float, optional
    horizon : float, optional
        Defaults to 10 periods (periodic) or 100 time units.
    partner : callable, optional
        Exact level-set partner constructor, see :func:`level_set_pairs`.
    """
    if f.sample is None:
        raise ValueError("flow handle has no state sampler")
    if periodic and not (period and period > 0):
        raise ValueError("periodic verification needs a positive period")
    if horizon is None:
        horizon = 10 * period if periodic else 100.0

    cond1 = ConditionResult()
    for i in range(n_states):
        rng = np.random.default_rng([seed, _STATES, i])
        x = f.sample(rng)
        taus = tau_samples(np.random.default_rng([seed, _TIMES, i]), n_times, horizon)
        where = {"sample_seed": [seed, _STATES, i], "state": state_to_json(x)}
        if not periodic:
            t0 = T(x)
            for tau in taus:
                gap = _value_distance(T(f.evolve(x, tau)), t0)
                cond1.record(gap >= tol, {**where, "tau": float(tau), "discrepancy": gap,
                                          "violation": "value repeats along orbit"})
            continue
        for k, t1 in enumerate(taus):
            v1 = T(f.evolve(x, t1))
            # return after whole periods
            m = int(rng.integers(1, 4)) * (1 if k % 2 else -1)
            t2 = t1 + m * period
            gap = _value_distance(T(f.evolve(x, t2)), v1)
            cond1.record(gap < tol, {**where, "tau_1": float(t1), "tau_2": float(t2),
                                     "discrepancy": gap,
                                     "violation": "no return after whole periods"})
            # no return in between
            t2 = float(rng.uniform(-horizon, horizon))
            lag = (t2 - t1) / period
            if abs(lag - round(lag)) * period < MIN_TAU_GAP:
                continue
            gap = _value_distance(T(f.evolve(x, t2)), v1)
            cond1.record(gap >= tol, {**where, "tau_1": float(t1), "tau_2": float(t2),
                                      "discrepancy": gap,
                                      "violation": "return before a whole period"})

    cond2 = ConditionResult()
    pairs = level_set_pairs(T, f.sample, tol, n_states, seed, partner=partner, flow=f)
    for i, (x1, x2) in enumerate(pairs):
        taus = tau_samples(np.random.default_rng([seed, _TIMES, n_states + i]), n_times, horizon)
        where = {"pair_index": i, "state_1": state_to_json(x1), "state_2": state_to_json(x2),
                 "value_1": _encode(T(x1)), "value_2": _encode(T(x2))}
        for tau in taus:
            gap = _value_distance(T(f.evolve(x1, tau)), T(f.evolve(x2, tau)))
            cond2.record(gap < tol, {**where, "tau": float(tau), "discrepancy": gap,
                                     "violation": "simultaneous states drift apart"})

    return VerificationReport(
        condition_1=cond1,
        condition_2=cond2,
        samples_used=n_states + len(pairs),
        seed=seed,
        tolerances={"value": tol, "min_tau_gap": MIN_TAU_GAP},
        periodic=periodic,
        period=period,
        horizon=horizon,
    )
