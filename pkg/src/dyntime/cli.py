"""
Command-line front end.

    dyntime --config run.json [--out PATH] [--format csv|json] [--seed N] [--tol X]

Exit codes: 0 success, 2 invalid configuration or input, 3 a verified
condition failed.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import action_angle as aa
from .classical import FreeParticle, HarmonicOscillator, PhasePoint
from .errors import DyntimeError, ParseError
from .io import (
    operator_from_json,
    point_from_json,
    state_from_json,
    system_from_json,
    system_to_json,
)
from .projective import PureState, expectation, evolve
from .simultaneity import (
    VERIFY_TOL,
    classical_flow,
    quantum_flow,
    verify_time_function,
)
from .spectral import HermitianOperator, SpectralData, projectors, spectral_decompose

__all__ = ["COMMANDS", "COLUMNS", "RunConfig", "parse_config", "serialize_config", "run", "main"]

COMMANDS = ("simulate", "timefn", "verify", "foliation", "qubit-demo")
FORMATS = ("csv", "json")
CANDIDATES = ("time_function", "constant_of_motion")

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3

_TOP_LEVEL = (
    "command", "system", "tau_grid", "τ_grid", "seed", "output", "format", "state",
    "ref_index", "index", "candidate", "tol", "n_states", "n_times", "leaves",
    "points_per_leaf",
)

# headers per command; {k}/{j} expand per component or admissible index
COLUMNS = {
    "simulate/quantum": "tau, psi{k}_re, psi{k}_im (k=1..n), e{j} (j=1..n), energy",
    "simulate/classical": "tau, q{k}, p{k} (k=1..d), energy",
    "timefn/quantum": "tau, T{j}_re, T{j}_im, T{j}_angle (admissible j)",
    "timefn/free|constant_force": "tau, T",
    "timefn/harmonic": "tau, T_re, T_im, T_angle",
    "foliation/quantum": "leaf, T_re, T_im, T_angle, angle{j}, action{j} (j != ref), "
                         "psi{k}_re, psi{k}_im [, bloch_x, bloch_y, bloch_z when n=2]",
    "foliation/free|constant_force": "leaf, T, q1, q2, q3, p1, p2, p3",
    "foliation/harmonic": "leaf, T_re, T_im, T_angle, q, p, energy",
    "qubit-demo": "tau, T_re, T_im, T_angle, action, Ttilde_re, Ttilde_im, Ttilde_angle, "
                  "action_tilde, bloch_x, bloch_y, bloch_z",
}


@dataclass(frozen=True)
class TauGrid:
    start: float
    stop: float
    steps: int

    def values(self) -> np.ndarray:
        # steps intervals, both endpoints included
        return np.linspace(self.start, self.stop, self.steps + 1)


@dataclass(frozen=True)
class RunConfig:
    command: str
    system: Any = None
    tau_grid: Optional[TauGrid] = None
    seed: int = 0
    output: Optional[str] = None
    format: str = "csv"
    state: Optional[Dict[str, List[float]]] = None
    ref_index: Optional[int] = None
    index: Optional[int] = None
    candidate: str = "time_function"
    tol: float = VERIFY_TOL
    n_states: int = 32
    n_times: int = 32
    leaves: int = 32
    points_per_leaf: int = 256

    @property
    def quantum(self) -> bool:
        return isinstance(self.system, HermitianOperator)


def _int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(path, "expected an integer")
    if minimum is not None and value < minimum:
        raise ParseError(path, f"must be >= {minimum}")
    return value


def _float(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ParseError(path, "expected a finite number")
    return float(value)


def _parse_grid(obj, path) -> TauGrid:
    if not isinstance(obj, dict):
        raise ParseError(path, "expected an object")
    for key in obj:
        if key not in ("start", "stop", "steps"):
            raise ParseError(f"{path}.{key}", "unknown field")
    for key in ("start", "stop", "steps"):
        if key not in obj:
            raise ParseError(f"{path}.{key}", "missing required field")
    start = _float(obj["start"], f"{path}.start")
    stop = _float(obj["stop"], f"{path}.stop")
    steps = _int(obj["steps"], f"{path}.steps", minimum=1)
    if not start < stop:
        raise ParseError(f"{path}.stop", "must be greater than start")
    return TauGrid(start, stop, steps)


def _parse_system(obj):
    if isinstance(obj, dict) and "system" in obj:
        return system_from_json(obj, "system")
    return operator_from_json(obj, "system")


def parse_config(text: str) -> RunConfig:
    """
    Parse and fully validate a JSON run configuration.

    Raises
    ------
    ParseError
        With ``path`` naming the offending field (``"tau_grid.steps"``,
        ``"system.F"``, ...). ``tau_grid`` may also be spelled ``τ_grid``;
        paths follow the spelling used in the input.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ParseError("", "configuration must be a JSON object")
    for key in obj:
        if key not in _TOP_LEVEL:
            raise ParseError(key, "unknown field")
    if "tau_grid" in obj and "τ_grid" in obj:
        raise ParseError("τ_grid", "duplicate of tau_grid")

    if "command" not in obj:
        raise ParseError("command", "missing required field")
    command = obj["command"]
    if command not in COMMANDS:
        raise ParseError("command", f"expected one of {', '.join(COMMANDS)}")

    kw: Dict[str, Any] = {"command": command}
    if "system" in obj:
        kw["system"] = _parse_system(obj["system"])
    elif command == "qubit-demo":
        kw["system"] = HermitianOperator.diagonal([1.0, -1.0])
    else:
        raise ParseError("system", "missing required field")
    system = kw["system"]
    quantum = isinstance(system, HermitianOperator)

    grid_key = "τ_grid" if "τ_grid" in obj else "tau_grid"
    if grid_key in obj:
        kw["tau_grid"] = _parse_grid(obj[grid_key], grid_key)
    elif command in ("simulate", "timefn"):
        raise ParseError(grid_key, "missing required field")

    if "seed" in obj:
        kw["seed"] = _int(obj["seed"], "seed")
    if "output" in obj:
        if not isinstance(obj["output"], str) or not obj["output"]:
            raise ParseError("output", "expected a non-empty path string")
        kw["output"] = obj["output"]
    if "format" in obj:
        if obj["format"] not in FORMATS:
            raise ParseError("format", "expected 'csv' or 'json'")
        kw["format"] = obj["format"]
    if "candidate" in obj:
        if obj["candidate"] not in CANDIDATES:
            raise ParseError("candidate", f"expected one of {', '.join(CANDIDATES)}")
        kw["candidate"] = obj["candidate"]
    if "tol" in obj:
        kw["tol"] = _float(obj["tol"], "tol")
        if kw["tol"] <= 0:
            raise ParseError("tol", "must be positive")
    for key in ("n_states", "n_times", "leaves", "points_per_leaf"):
        if key in obj:
            kw[key] = _int(obj[key], key, minimum=1)

    for key in ("ref_index", "index"):
        if key in obj:
            if not quantum:
                raise ParseError(key, "only meaningful for quantum systems")
            kw[key] = _int(obj[key], key, minimum=1)
            if kw[key] > system.dim:
                raise ParseError(key, f"must be <= {system.dim}")

    if "state" in obj:
        if quantum:
            st = state_from_json(obj["state"], "state", system.dim)
            kw["state"] = {"re": [float(v) for v in obj["state"]["re"]],
                           "im": [float(v) for v in obj["state"].get("im", [0.0] * st.dim)]}
        else:
            point_from_json(obj["state"], "state", system.dim)
            kw["state"] = {"q": [float(v) for v in obj["state"]["q"]],
                           "p": [float(v) for v in obj["state"]["p"]]}

    if command == "qubit-demo":
        if not quantum or system.dim != 2:
            raise ParseError("system", "qubit-demo needs a 2x2 Hamiltonian")
        if len(spectral_decompose(system).degeneracy_classes) != 2:
            raise ParseError("system", "qubit-demo needs distinct eigenvalues")
    return RunConfig(**kw)


def serialize_config(cfg: RunConfig) -> str:
    obj: Dict[str, Any] = {"command": cfg.command, "system": system_to_json(cfg.system)}
    if cfg.tau_grid is not None:
        obj["tau_grid"] = {"start": cfg.tau_grid.start, "stop": cfg.tau_grid.stop,
                           "steps": cfg.tau_grid.steps}
    for key in ("seed", "format", "candidate", "tol", "n_states", "n_times", "leaves",
                "points_per_leaf"):
        obj[key] = getattr(cfg, key)
    for key in ("output", "state", "ref_index", "index"):
        if getattr(cfg, key) is not None:
            obj[key] = getattr(cfg, key)
    return json.dumps(obj, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------- datasets

def _initial_state(cfg: RunConfig, S: Optional[SpectralData] = None):
    rng = np.random.default_rng([cfg.seed, 7])
    if cfg.quantum:
        if cfg.state is not None:
            return PureState(np.array(cfg.state["re"]) + 1j * np.array(cfg.state["im"]))
        return aa.random_reduced_state(rng, S, min_modulus=0.05)
    if cfg.state is not None:
        return PhasePoint(cfg.state["q"], cfg.state["p"])
    return cfg.system.sample(rng)


def _angle(z: complex) -> float:
    a = math.atan2(z.imag, z.real) % (2 * math.pi)
    return 0.0 if a >= 2 * math.pi else a


def _complex_cols(z: complex) -> List[float]:
    return [z.real, z.imag, _angle(z)]


def _bloch(p: PureState) -> List[float]:
    a, b = p.vector
    ab = np.conj(a) * b
    return [2 * ab.real, 2 * ab.imag, abs(a) ** 2 - abs(b) ** 2]


def _ref(cfg, S):
    return cfg.ref_index if cfg.ref_index is not None else S.dim


def _simulate(cfg: RunConfig):
    taus = cfg.tau_grid.values()
    if cfg.quantum:
        S = spectral_decompose(cfg.system)
        p0 = _initial_state(cfg, S)
        n = S.dim
        E = projectors(S)
        header = ["tau"] + [f"psi{k}_{c}" for k in range(1, n + 1) for c in ("re", "im")]
        header += [f"e{j}" for j in range(1, n + 1)] + ["energy"]
        rows = []
        for tau in taus:
            p = evolve(S, p0, tau)
            row = [float(tau)]
            for z in p.vector:
                row += [z.real, z.imag]
            row += [expectation(Ej, p) for Ej in E] + [expectation(cfg.system, p)]
            rows.append(row)
        return header, rows
    sys_ = cfg.system
    x0 = _initial_state(cfg)
    d = x0.dim
    header = ["tau"] + [f"q{k}" for k in range(1, d + 1)] + [f"p{k}" for k in range(1, d + 1)]
    header.append("energy")
    rows = []
    for tau in taus:
        x = sys_.flow(x0, tau)
        rows.append([float(tau)] + x.q.tolist() + x.p.tolist() + [sys_.hamiltonian(x)])
    return header, rows


def _timefn(cfg: RunConfig):
    taus = cfg.tau_grid.values()
    if cfg.quantum:
        S = spectral_decompose(cfg.system)
        ref = _ref(cfg, S)
        js = aa.admissible_indices(S, ref)
        if not js:
            raise DyntimeError("no admissible time function: every nu_j equals nu_ref")
        p0 = _initial_state(cfg, S)
        aa.chart(p0, S, ref)
        header = ["tau"] + [f"T{j}_{c}" for j in js for c in ("re", "im", "angle")]
        rows = []
        for tau in taus:
            c = aa.chart(evolve(S, p0, tau), S, ref)
            row = [float(tau)]
            for j in js:
                row += _complex_cols(c.angle(j))
            rows.append(row)
        return header, rows
    sys_ = cfg.system
    x0 = _initial_state(cfg)
    sys_.time_function(x0)
    if isinstance(sys_, HarmonicOscillator):
        header = ["tau", "T_re", "T_im", "T_angle"]
        rows = [[float(t)] + _complex_cols(sys_.time_function(sys_.flow(x0, t))) for t in taus]
    else:
        header = ["tau", "T"]
        rows = [[float(t), sys_.time_function(sys_.flow(x0, t))] for t in taus]
    return header, rows


def _foliation(cfg: RunConfig):
    rng = np.random.default_rng([cfg.seed, 11])
    L, K = cfg.leaves, cfg.points_per_leaf
    rows = []
    if cfg.quantum:
        S = spectral_decompose(cfg.system)
        ref = _ref(cfg, S)
        js = aa.admissible_indices(S, ref)
        if not js:
            raise DyntimeError("no admissible time function: every nu_j equals nu_ref")
        j = cfg.index if cfg.index is not None else js[0]
        if j not in js:
            raise DyntimeError(f"index {j} is not admissible for ref_index {ref}")
        n = S.dim
        slots = [i for i in range(1, n + 1) if i != ref]
        header = ["leaf", "T_re", "T_im", "T_angle"]
        header += [f"angle{i}" for i in slots] + [f"action{i}" for i in slots]
        header += [f"psi{k}_{c}" for k in range(1, n + 1) for c in ("re", "im")]
        if n == 2:
            header += ["bloch_x", "bloch_y", "bloch_z"]
        k_slot = slots.index(j)
        for leaf in range(L):
            t = complex(np.exp(2j * np.pi * leaf / L))
            for _ in range(K):
                angles = np.exp(2j * np.pi * rng.random(n - 1))
                angles[k_slot] = t
                w = 0.98 * rng.dirichlet(np.ones(n)) + 0.02 / n
                c = aa.ActionAngleChart(ref, angles, np.delete(w, ref - 1))
                p = aa.chart_inverse(c, S)
                row = [leaf] + _complex_cols(t)
                row += [_angle(complex(z)) for z in c.angles] + c.actions.tolist()
                for z in p.vector:
                    row += [z.real, z.imag]
                if n == 2:
                    row += _bloch(p)
                rows.append(row)
        return header, rows

    sys_ = cfg.system
    if isinstance(sys_, HarmonicOscillator):
        header = ["leaf", "T_re", "T_im", "T_angle", "q", "p", "energy"]
        for leaf in range(L):
            theta = 2 * np.pi * leaf / L
            for _ in range(K):
                x = sys_.chart_inverse(theta, rng.uniform(0.01, 1.0))
                rows.append([leaf] + _complex_cols(sys_.time_function(x))
                            + [float(x.q[0]), float(x.p[0]), sys_.hamiltonian(x)])
        return header, rows
    grid = cfg.tau_grid or TauGrid(-10.0, 10.0, max(L - 1, 1))
    levels = np.linspace(grid.start, grid.stop, L)
    header = ["leaf", "T", "q1", "q2", "q3", "p1", "p2", "p3"]
    for leaf, level in enumerate(levels):
        for _ in range(K):
            seed_point = sys_.sample(rng)
            x = sys_.level_set_partner(rng, _with_value(sys_, seed_point, float(level)))
            rows.append([leaf, sys_.time_function(x)] + x.q.tolist() + x.p.tolist())
    return header, rows


def _with_value(sys_, x: PhasePoint, t: float) -> PhasePoint:
    """A point on the level ``T = t``, obtained by flowing ``x``."""
    return sys_.flow(x, t - sys_.time_function(x))


def _qubit_demo(cfg: RunConfig):
    S = spectral_decompose(cfg.system)
    grid = cfg.tau_grid or TauGrid(0.0, aa.time_function_period(S, 1, 2), 100)
    p0 = _initial_state(cfg, S)
    header = ["tau", "T_re", "T_im", "T_angle", "action", "Ttilde_re", "Ttilde_im",
              "Ttilde_angle", "action_tilde", "bloch_x", "bloch_y", "bloch_z"]
    rows = []
    for tau in grid.values():
        p = evolve(S, p0, tau)
        c, ct = aa.chart(p, S, 2), aa.chart(p, S, 1)
        rows.append([float(tau)] + _complex_cols(c.angle(1)) + [c.action(1)]
                    + _complex_cols(ct.angle(2)) + [ct.action(2)] + _bloch(p))
    return header, rows


def _verify(cfg: RunConfig) -> Dict[str, Any]:
    kw = dict(n_states=cfg.n_states, n_times=cfg.n_times, tol=cfg.tol, seed=cfg.seed)
    out: Dict[str, Any] = {"system": system_to_json(cfg.system), "candidate": cfg.candidate}
    reports = []
    if cfg.quantum:
        S = spectral_decompose(cfg.system)
        ref = _ref(cfg, S)
        f = quantum_flow(S)
        if cfg.candidate == "constant_of_motion":
            H = cfg.system
            rep = verify_time_function(f, lambda p: expectation(H, p), False, **kw)
            reports.append({"function": "e_H", **rep.to_dict()})
        else:
            js = aa.admissible_indices(S, ref)
            if not js:
                raise DyntimeError("no admissible time function: every nu_j equals nu_ref")
            for j in js:
                rep = verify_time_function(
                    f, lambda p, j=j: aa.time_function(p, S, j, ref), True,
                    period=aa.time_function_period(S, j, ref),
                    partner=aa.level_set_partner(S, j, ref), **kw)
                reports.append({"function": f"T{j}", "index": j, "ref_index": ref,
                                **rep.to_dict()})
    else:
        sys_ = cfg.system
        f = classical_flow(sys_)
        if cfg.candidate == "constant_of_motion":
            if isinstance(sys_, FreeParticle):
                name, T = "|p|", lambda x: float(np.linalg.norm(x.p))
            else:
                name, T = "H", sys_.hamiltonian
            rep = verify_time_function(f, T, False, **kw)
        else:
            name = "T"
            periodic = isinstance(sys_, HarmonicOscillator)
            rep = verify_time_function(f, sys_.time_function, periodic,
                                       period=sys_.period if periodic else None,
                                       partner=sys_.level_set_partner, **kw)
        reports.append({"function": name, **rep.to_dict()})
    out["reports"] = reports
    out["passed"] = all(r["passed"] for r in reports)
    return out


def _table_text(header, rows, fmt, command) -> str:
    if fmt == "json":
        return json.dumps({"command": command, "columns": header, "rows": rows}, indent=1) + "\n"
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if not isinstance(v, (int, np.integer)) else int(v)
                    for v in row])
    return buf.getvalue()


def _write(text: str, output: Optional[str]):
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    path = Path(output)
    if not path.parent.exists():
        raise DyntimeError(f"output directory {path.parent} does not exist")
    path.write_text(text, encoding="utf-8")


def run(cfg: RunConfig) -> int:
    """Execute a validated configuration; returns the process exit code."""
    try:
        if cfg.command == "verify":
            result = _verify(cfg)
            _write(json.dumps(result, indent=2) + "\n", cfg.output)
            return EXIT_OK if result["passed"] else EXIT_FAILED
        builder = {
            "simulate": _simulate,
            "timefn": _timefn,
            "foliation": _foliation,
            "qubit-demo": _qubit_demo,
        }[cfg.command]
        header, rows = builder(cfg)
        _write(_table_text(header, rows, cfg.format, cfg.command), cfg.output)
    except (DyntimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dyntime", description=__doc__.strip().splitlines()[0])
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output path ('-' for stdout); overrides config")
    ap.add_argument("--format", choices=FORMATS, help="table format; overrides config")
    ap.add_argument("--seed", type=int, help="overrides config")
    ap.add_argument("--tol", type=float, help="verification tolerance; overrides config")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    overrides = {}
    if args.out is not None:
        overrides["output"] = args.out
    if args.format is not None:
        overrides["format"] = args.format
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.tol is not None:
        if not (math.isfinite(args.tol) and args.tol > 0):
            print("error: --tol must be a positive number", file=sys.stderr)
            return EXIT_INVALID
        overrides["tol"] = args.tol
    return run(replace(cfg, **overrides))


if __name__ == "__main__":
    sys.exit(main())
