"""Scenario files: parsing, validation and evaluation.

A scenario is one JSON object::

    {
      "model": "jcm" | "multimode" | "ladder" | "cavity-longtime" | "cavity-poles",
      "initial_state": {"r": 1, "theta": 0, "phi": 0},
      "params": {...},
      "time_grid": {"t_start": 0, "t_end": "4*pi", "samples": 801},
      "measures": ["LN", "EOE", "abs_u"],
      "sweep": {"parameter": "theta", "values": [0, "pi/4"]}
    }

Numbers may be written as arithmetic strings using ``pi``. Entries of the
multimode ``deltas`` and ``couplings`` lists may also use ``delta``, a scalar
parameter that can be swept. Finite-mode models
measure frequencies in units of the near-resonant coupling ``g`` and time in
``1/g``. Cavity models take ``omega0 = 1`` and time in units of ``1/gamma``.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import cavity, core, jcm, multimode, oracle
from .errors import SinglePoleError, ValidationError

MODELS = ("jcm", "multimode", "ladder", "cavity-longtime", "cavity-poles")
MEASURES = ("EOE", "LN", "abs_u", "abs_u_oracle")
STATE_KEYS = ("r", "theta", "phi")

_DEFAULTS: dict[str, dict[str, Any]] = {
    "jcm": {"delta": 0.0, "omega": 1.0e7},
    "multimode": {"omega0": 1.0e7, "delta": 0.0},
    "ladder": {"Q": 1, "delta": 0.0, "Delta": 5.0, "omega0": 1.0e7},
    "cavity-longtime": {
        "eps_omega0": 1e-3,
        "renormalized": False,
        "window_start": 1.0,
        "oracle": False,
        "n_per_branch": 2000,
    },
    "cavity-poles": {"eps_omega0": 1e-3, "renormalized": False},
}
_REQUIRED = {
    "jcm": (),
    "multimode": ("deltas", "couplings"),
    "ladder": (),
    "cavity-longtime": ("lam", "resonance"),
    "cavity-poles": ("lam", "resonance"),
}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt}


class ConfigError(Exception):
    """The scenario file cannot be read or parsed."""


def evaluate_number(value: Any, names: dict[str, float] | None = None) -> float:
    """Turn a JSON number or an arithmetic string such as ``"3*pi/4"`` into a float.

    ``names`` adds variables beyond ``pi`` and ``e``.

    Examples
    --------
    >>> evaluate_number("-delta/2", {"delta": 3})
    -1.5
    """
    scope = {**_NAMES, **(names or {})}
    if isinstance(value, bool):
        raise ValidationError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValidationError(f"expected a number, got {value!r}")
    try:
        tree = ast.parse(value, mode="eval")
    except SyntaxError as exc:
        raise ValidationError(f"cannot parse number {value!r}") from exc

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in scope:
            return float(scope[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
        ):
            return _FUNCS[node.func.id](walk(node.args[0]))
        raise ValidationError(f"unsupported expression in {value!r}")

    return float(walk(tree))


@dataclass(frozen=True)
class Scenario:
    """A validated scenario."""

    model: str
    initial_state: core.BlochVector
    params: dict
    t_start: float
    t_end: float
    samples: int
    measures: tuple[str, ...]
    sweep_parameter: str | None = None
    sweep_values: tuple[float, ...] = field(default_factory=tuple)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.samples)

    def with_value(self, value: float | None) -> "Scenario":
        """Copy with the sweep parameter set to ``value``."""
        if value is None or self.sweep_parameter is None:
            return self
        if self.sweep_parameter in STATE_KEYS:
            b = self.initial_state
            kw = {"r": b.r, "theta": b.theta, "phi": b.phi, self.sweep_parameter: value}
            return replace(self, initial_state=core.BlochVector(**kw))
        params = dict(self.params)
        params[self.sweep_parameter] = value
        return replace(self, params=params)


def _number_tree(value: Any) -> Any:
    if isinstance(value, list):
        return [_number_tree(v) for v in value]
    if isinstance(value, bool) or value is None:
        return value
    return evaluate_number(value)


def parse_scenario(data: Any) -> Scenario:
    """Validate a decoded JSON object.

    Raises
    ------
    ValidationError
        Naming the violated invariant.
    """
    if not isinstance(data, dict):
        raise ValidationError("scenario must be a JSON object")
    model = data.get("model")
    if model not in MODELS:
        raise ValidationError(f"model must be one of {', '.join(MODELS)}; got {model!r}")
    unknown = set(data) - {"model", "initial_state", "params", "time_grid", "measures", "sweep"}
    if unknown:
        raise ValidationError(f"unknown top-level keys: {', '.join(sorted(unknown))}")

    state = data.get("initial_state", {})
    if not isinstance(state, dict) or set(state) - set(STATE_KEYS):
        raise ValidationError("initial_state must be an object with keys r, theta, phi")
    b = core.BlochVector(
        evaluate_number(state.get("r", 1.0)),
        evaluate_number(state.get("theta", 0.0)),
        evaluate_number(state.get("phi", 0.0)),
    )

    raw = data.get("params", {})
    if not isinstance(raw, dict):
        raise ValidationError("params must be an object")
    params = dict(_DEFAULTS[model])
    for key, value in raw.items():
        if key not in params and key not in _REQUIRED[model] and key != "g":
            raise ValidationError(f"unknown parameter {key!r} for model {model}")
        if model == "multimode" and key in ("deltas", "couplings"):
            if not isinstance(value, list) or not value:
                raise ValidationError(f"{key} must be a nonempty list")
            params[key] = list(value)
        else:
            params[key] = _number_tree(value)
    missing = [k for k in _REQUIRED[model] if k not in params]
    if missing:
        raise ValidationError(f"model {model} requires params {', '.join(missing)}")
    if "g" in params and params["g"] != 1.0:
        raise ValidationError("finite-mode scenarios are in units of g; g must be 1")

    grid = data.get("time_grid", {"t_start": 0.0, "t_end": 1.0, "samples": 2})
    if not isinstance(grid, dict):
        raise ValidationError("time_grid must be an object")
    t0 = evaluate_number(grid.get("t_start", 0.0))
    t1 = evaluate_number(grid.get("t_end", 1.0))
    samples = grid.get("samples", 2)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
        raise ValidationError("time_grid.samples must be an integer >= 2")
    if not (t1 > t0 >= 0):
        raise ValidationError("time_grid requires t_end > t_start >= 0")

    measures = data.get("measures", ["LN"])
    if model == "cavity-poles":
        measures = []
    if not isinstance(measures, list) or any(m not in MEASURES for m in measures):
        raise ValidationError(f"measures must be a list drawn from {', '.join(MEASURES)}")
    if model != "cavity-poles" and not measures:
        raise ValidationError("at least one measure is required")
    if len(set(measures)) != len(measures):
        raise ValidationError("measures must not repeat")
    if "abs_u_oracle" in measures and model != "cavity-longtime":
        raise ValidationError("abs_u_oracle is only available for cavity-longtime")

    sweep_parameter = None
    sweep_values: tuple[float, ...] = ()
    if "sweep" in data:
        sw = data["sweep"]
        if not isinstance(sw, dict) or "parameter" not in sw or "values" not in sw:
            raise ValidationError("sweep needs 'parameter' and 'values'")
        sweep_parameter = sw["parameter"]
        if sweep_parameter not in STATE_KEYS and sweep_parameter not in params:
            raise ValidationError(f"cannot sweep unknown parameter {sweep_parameter!r}")
        if not isinstance(sw["values"], list) or not sw["values"]:
            raise ValidationError("sweep values list must be nonempty")
        sweep_values = tuple(sorted(evaluate_number(v) for v in sw["values"]))
        if len(set(sweep_values)) != len(sweep_values):
            raise ValidationError("sweep values must be distinct")

    sc = Scenario(
        model, b, params, t0, t1, samples, tuple(measures), sweep_parameter, sweep_values
    )
    for value in sweep_values or (None,):
        _check_point(sc.with_value(value))
    return sc


def _check_point(sc: Scenario) -> None:
    if "EOE" in sc.measures and not sc.initial_state.is_pure:
        raise ValidationError(
            "EOE requires a pure total state: initial_state.r must be 1"
        )
    if sc.model == "cavity-longtime" and sc.params["window_start"] < 0:
        raise ValidationError("window_start must be nonnegative")
    if sc.model.startswith("cavity") and "LN" in sc.measures and not sc.initial_state.is_pure:
        raise ValidationError("cavity models support pure initial states only (r = 1)")
    build_model(sc)


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file.

    Raises
    ------
    ConfigError
        If the file is unreadable or not valid JSON.
    ValidationError
        If the content violates the schema or a model invariant.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_scenario(data)


def build_model(sc: Scenario):
    """Library object for a scenario: JcmParams, ModeSet or CavityParams."""
    p = sc.params
    if sc.model == "jcm":
        return jcm.JcmParams(1.0, p["delta"], p["omega"])
    if sc.model == "multimode":
        if len(p["deltas"]) != len(p["couplings"]):
            raise ValidationError("deltas and couplings must have equal length")
        scope = {"delta": p["delta"]}
        deltas = [evaluate_number(v, scope) for v in p["deltas"]]
        couplings = [evaluate_number(v, scope) for v in p["couplings"]]
        return multimode.ModeSet(p["omega0"], deltas, couplings)
    if sc.model == "ladder":
        q = p["Q"]
        if q != int(q):
            raise ValidationError("Q must be an integer")
        return multimode.cavity_ladder(int(q), 1.0, p["delta"], p["Delta"], p["omega0"])
    return cavity.CavityParams.from_ratios(
        p["lam"], p["eps_omega0"], p["resonance"], renormalized=bool(p["renormalized"])
    )


def dominant_cavity_pole(cp: cavity.CavityParams) -> cavity.CavityPole:
    """Numeric dominant pole; near a resonance the slowest-decaying of the pair."""
    n, off = cavity.resonance_offset(cp)
    if abs(off) < cavity.RESONANCE_GUARD:
        try:
            return cavity.near_resonance_poles(cp)[0]
        except SinglePoleError as exc:
            return exc.pole
    return cavity.dominant_pole_numeric(cp)


def evaluate_series(sc: Scenario) -> np.ndarray:
    """Measures on the time grid for one (already swept) scenario.

    Returns an array of shape ``(samples, len(measures))``.
    """
    t = sc.times
    b = sc.initial_state
    model = build_model(sc)
    cols = []
    if sc.model == "cavity-longtime":
        pole = dominant_cavity_pole(model)
        phys = t / pole.gamma if pole.gamma > 0 else t
        for m in sc.measures:
            if m == "LN":
                cols.append(cavity.cavity_ln_series(phys, b.theta, pole))
            elif m == "EOE":
                cols.append(cavity.cavity_eoe_series(phys, b.theta, pole))
            elif m == "abs_u":
                cols.append(np.minimum(1.0, np.abs(cavity.long_time_u(phys, pole))))
            else:
                ms = oracle.discretize_continuum(model, int(sc.params["n_per_branch"]))
                cols.append(np.abs(oracle.continuum_u(ms, phys)))
        return np.column_stack(cols)

    if sc.model == "jcm":
        for m in sc.measures:
            if m == "abs_u":
                cols.append(np.abs(jcm.jcm_u(t, model)))
            elif b.is_pure:
                cols.append(jcm.jcm_pure_series(t, b.theta, model, m))
            else:
                cols.append(
                    np.array(
                        [core.log_negativity(jcm.jcm_mixed_evolution(x, b, model)) for x in t]
                    )
                )
        return np.column_stack(cols)

    for m in sc.measures:
        if m == "abs_u":
            cols.append(multimode.pure_series(t, 0.0, model, "abs_u"))
        elif b.is_pure:
            cols.append(multimode.pure_series(t, b.theta, model, m))
        else:
            cols.append(multimode.mixed_ln_series(t, b, model))
    return np.column_stack(cols)


def oracle_decay_check(sc: Scenario) -> tuple[float, float]:
    """Decay rate fitted to the discretized continuum versus the pole's ``gamma``.

    The fit uses the grid points with ``gamma t >= window_start``.
    """
    if sc.model != "cavity-longtime":
        raise ValidationError("the oracle check applies to cavity-longtime scenarios")
    cp = build_model(sc)
    pole = dominant_cavity_pole(cp)
    t = sc.times[sc.times >= sc.params["window_start"]]
    if t.size < 2:
        raise ValidationError("fewer than two grid points at or after window_start")
    ms = oracle.discretize_continuum(cp, int(sc.params["n_per_branch"]))
    phys = t / pole.gamma
    rate = oracle.fit_decay_rate(phys, np.abs(oracle.continuum_u(ms, phys)))
    return rate, pole.gamma


def pole_rows(sc: Scenario) -> tuple[list[str], list[list], list[str]]:
    """Rows for the pole report: header, rows and warnings."""
    model = build_model(sc)
    notes: list[str] = []
    if sc.model in ("multimode", "ladder"):
        ps = multimode.poles(model)
        res = multimode.secular_residual(ps.secular_roots, model)
        header = ["re_z", "im_z", "weight_re", "weight_im", "method", "secular_residual"]
        rows = [
            [z.real, z.imag, w.real, w.imag, "spectral", r]
            for z, w, r in zip(ps.roots, ps.weights, res)
        ]
        return header, rows, notes
    if sc.model != "cavity-poles":
        raise ValidationError("poles report needs model multimode, ladder or cavity-poles")
    header = ["re_z", "im_z", "weight_re", "weight_im", "method"]
    n, off = cavity.resonance_offset(model)
    if abs(off) < cavity.RESONANCE_GUARD:
        try:
            found = cavity.near_resonance_poles(model)
        except SinglePoleError as exc:
            found = [exc.pole]
            notes.append(str(exc))
    else:
        found = [cavity.dominant_pole_numeric(model), cavity.dominant_pole_perturbative(model)]
    rows = [[p.z_p.real, p.z_p.imag, p.residue.real, p.residue.imag, p.method] for p in found]
    return header, rows, notes
