"""
JSON ingest and export for operators, states and classical systems.

Schemas::

    operator   {"dim": n, "re": [[...]], "im": [[...]]}      row-major
    state      {"re": [...], "im": [...]}                     normalized on load
    point      {"q": [...], "p": [...]}
    system     {"system": "free" | "constant_force" | "harmonic",
                "m": ..., "F": [...], "nu": ...}
"""

from __future__ import annotations

import math
from functools import singledispatch
from typing import Any, Dict

import numpy as np

from .classical import ConstantForce, FreeParticle, HarmonicOscillator, PhasePoint
from .errors import DyntimeError, ParseError
from .projective import PureState
from .spectral import HermitianOperator

__all__ = [
    "CLASSICAL_KINDS",
    "operator_from_json",
    "operator_to_json",
    "state_from_json",
    "point_from_json",
    "system_from_json",
    "system_to_json",
    "state_to_json",
]

CLASSICAL_KINDS = {
    "free": ("m",),
    "constant_force": ("m", "F"),
    "harmonic": ("m", "nu"),
}


def _join(path, key):
    return f"{path}.{key}" if path else str(key)


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise ParseError(path, "expected a finite number")
    return float(value)


def _numbers(value, path, length=None):
    if not isinstance(value, list):
        raise ParseError(path, "expected a list of numbers")
    if length is not None and len(value) != length:
        raise ParseError(path, f"expected {length} entries, got {len(value)}")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _reject_unknown(obj, allowed, path):
    for key in obj:
        if key not in allowed:
            raise ParseError(_join(path, key), "unknown field")


def _require(obj, key, path):
    if key not in obj:
        raise ParseError(_join(path, key), "missing required field")
    return obj[key]


def operator_from_json(obj: Dict[str, Any], path: str = "") -> HermitianOperator:
    if not isinstance(obj, dict):
        raise ParseError(path, "expected an object")
    _reject_unknown(obj, ("dim", "re", "im"), path)
    dim = _require(obj, "dim", path)
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ParseError(_join(path, "dim"), "expected a positive integer")
    parts = []
    for key in ("re", "im"):
        if key == "im" and key not in obj:
            rows = [[0.0] * dim for _ in range(dim)]
        else:
            rows = _require(obj, key, path)
        kp = _join(path, key)
        if not isinstance(rows, list) or len(rows) != dim:
            raise ParseError(kp, f"expected {dim} rows")
        parts.append([_numbers(r, f"{kp}[{i}]", dim) for i, r in enumerate(rows)])
    try:
        return HermitianOperator(np.array(parts[0]) + 1j * np.array(parts[1]))
    except DyntimeError as exc:
        raise ParseError(path, str(exc)) from exc


def operator_to_json(A: HermitianOperator) -> Dict[str, Any]:
    return {"dim": A.dim, "re": A.matrix.real.tolist(), "im": A.matrix.imag.tolist()}


def state_from_json(obj: Dict[str, Any], path: str = "", dim: int | None = None) -> PureState:
    if not isinstance(obj, dict):
        raise ParseError(path, "expected an object")
    _reject_unknown(obj, ("re", "im"), path)
    re = _numbers(_require(obj, "re", path), _join(path, "re"), dim)
    im = _numbers(obj.get("im", [0.0] * len(re)), _join(path, "im"), len(re))
    try:
        return PureState(np.array(re) + 1j * np.array(im))
    except ValueError as exc:
        raise ParseError(path, str(exc)) from exc


def point_from_json(obj: Dict[str, Any], path: str = "", dim: int | None = None) -> PhasePoint:
    if not isinstance(obj, dict):
        raise ParseError(path, "expected an object")
    _reject_unknown(obj, ("q", "p"), path)
    q = _numbers(_require(obj, "q", path), _join(path, "q"), dim)
    p = _numbers(_require(obj, "p", path), _join(path, "p"), len(q))
    return PhasePoint(q, p)


def system_from_json(obj: Dict[str, Any], path: str = ""):
    """Build a classical system from its JSON record; unknown fields are errors."""
    if not isinstance(obj, dict):
        raise ParseError(path, "expected an object")
    kind = _require(obj, "system", path)
    if kind not in CLASSICAL_KINDS:
        raise ParseError(_join(path, "system"), f"unknown system {kind!r}")
    fields = CLASSICAL_KINDS[kind]
    _reject_unknown(obj, ("system",) + fields, path)
    m = _number(obj.get("m", 1.0), _join(path, "m"))
    if m <= 0:
        raise ParseError(_join(path, "m"), "mass must be positive")
    if kind == "free":
        return FreeParticle(m)
    if kind == "constant_force":
        F = _numbers(_require(obj, "F", path), _join(path, "F"), 3)
        if not any(F):
            raise ParseError(_join(path, "F"), "force must be non-zero")
        return ConstantForce(m, tuple(F))
    nu = _number(_require(obj, "nu", path), _join(path, "nu"))
    if nu <= 0:
        raise ParseError(_join(path, "nu"), "frequency must be positive")
    return HarmonicOscillator(m, nu)


def system_to_json(sys) -> Dict[str, Any]:
    if isinstance(sys, HermitianOperator):
        return operator_to_json(sys)
    if isinstance(sys, FreeParticle):
        return {"system": "free", "m": sys.m}
    if isinstance(sys, ConstantForce):
        return {"system": "constant_force", "m": sys.m, "F": list(sys.F)}
    if isinstance(sys, HarmonicOscillator):
        return {"system": "harmonic", "m": sys.m, "nu": sys.nu}
    raise TypeError(f"cannot serialize {type(sys).__name__}")


@singledispatch
def state_to_json(x) -> Dict[str, Any]:
    raise TypeError(f"cannot serialize {type(x).__name__}")


@state_to_json.register
def _(x: PureState):
    return {"re": x.vector.real.tolist(), "im": x.vector.imag.tolist()}


@state_to_json.register
def _(x: PhasePoint):
    return {"q": x.q.tolist(), "p": x.p.tolist()}
