"""Scenario configuration files (JSON, versioned).

A config has four top-level keys::

    {
      "schema_version": 1,
      "problem": {"states": [...], "actions": [...], "utility": [[...]],
                  "prior": [...], "kappa": 2, "chi": 1, "rho": 1,
                  "entropy": "shannon"},
      "command": {"name": "sweep", "params": {"priors": {"start": 0, "stop": 1, "count": 101}}},
      "output": {"directory": "out", "prefix": ""}
    }

Structure is checked with JSON Schema; unknown keys are rejected with the
JSON path of the offending object.  Parsed configs serialize back to the same
structure with every default filled in.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .beliefs import SHANNON, DecisionProblem, quadratic_entropy
from .errors import InputError

SCHEMA_VERSION = 1

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_count = {"type": "integer", "minimum": 1}
_seed = {"type": "integer", "minimum": 0}
_labels = {"type": "array", "items": {"type": "string"}, "minItems": 2}
_vector = {"type": "array", "items": _num, "minItems": 1}

_grid = {
    "oneOf": [
        _vector,
        {"type": "object", "additionalProperties": False, "required": ["start", "stop", "count"],
         "properties": {"start": _num, "stop": _num, "count": _count}},
    ]
}


def _params(**props):
    return {"type": "object", "additionalProperties": False, "properties": props}


COMMAND_PARAMS = {
    "solve": _params(),
    "benchmark": _params(),
    "sweep": _params(priors=_grid),
    "simulate": _params(policy={"enum": ["principal", "agent"]}, samples=_count, seed=_seed),
    "audit": _params(policy={"enum": ["principal", "agent"]}, samples=_count, seed=_seed,
                     garbles=_count, deadline=_pos, probe_times={"type": "array", "items": _pos}),
    "increasing": _params(schedule={"type": "object", "additionalProperties": False,
                                    "required": ["times", "values"],
                                    "properties": {"times": _vector, "values": _vector}},
                          ode_step=_pos, nodes=_count, grid_stride=_count),
    "bounded": _params(d=_grid),
    "unlimited": _params(),
    "teacher": _params(trials=_count, seed=_seed),
    "example-1-1": _params(),
}

DEFAULT_PARAMS = {
    "solve": {},
    "benchmark": {},
    "sweep": {"priors": {"start": 0.0, "stop": 1.0, "count": 101}},
    "simulate": {"policy": "principal", "samples": 100_000, "seed": 0},
    "audit": {"policy": "principal", "samples": 100_000, "seed": 0, "garbles": 200, "deadline": 0.5},
    "increasing": {"nodes": 24, "grid_stride": 100},
    "bounded": {"d": [0.0, 0.1, 0.2, 0.3, 0.5, 1.0, 1.5]},
    "unlimited": {},
    "teacher": {"trials": 200, "seed": 0},
    "example-1-1": {},
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "problem": {
            "type": "object",
            "additionalProperties": False,
            "required": ["utility", "prior"],
            "properties": {
                "states": _labels,
                "actions": _labels,
                "utility": {"type": "array", "items": _vector, "minItems": 2},
                "prior": _vector,
                "kappa": _pos,
                "chi": _pos,
                "rho": _pos,
                "entropy": {"enum": ["shannon", "quadratic"]},
            },
        },
        "command": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {"name": {"enum": sorted(COMMAND_PARAMS)}, "params": {"type": "object"}},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"directory": {"type": "string"}, "prefix": {"type": "string"}},
        },
    },
}

ENTROPIES = {"shannon": lambda: SHANNON, "quadratic": quadratic_entropy}


def _location(path) -> str:
    loc = "$"
    for p in path:
        loc += f"[{p}]" if isinstance(p, int) else f".{p}"
    return loc


def _validate(instance, schema, prefix=()):
    v = jsonschema.Draft202012Validator(schema)
    errors = sorted(v.iter_errors(instance), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if not errors:
        return
    e = errors[0]
    while e.validator in ("oneOf", "anyOf") and e.context:
        # report from the branch whose type matches the instance
        kind = "object" if isinstance(e.instance, dict) else "array" if isinstance(e.instance, list) else None
        branches = e.schema[e.validator]
        same = [c for c in e.context if branches[c.relative_schema_path[0]].get("type") == kind]
        if not same:
            break
        e = same[0]
    path = (*prefix, *e.absolute_path)
    if e.validator == "additionalProperties":
        known = set(e.schema.get("properties", {}))
        extra = sorted(k for k in e.instance if k not in known)
        raise InputError(f"{_location((*path, extra[0]))}: unknown key {extra[0]!r}")
    raise InputError(f"{_location(path)}: {e.message}")


@dataclass(frozen=True)
class ScenarioConfig:
    problem: dict | None
    command: str | None
    params: dict = field(default_factory=dict)
    directory: str | None = None
    prefix: str = ""

    @classmethod
    def from_dict(cls, data) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise InputError("$: config must be a JSON object")
        _validate(data, SCHEMA)
        cmd = data.get("command")
        name = cmd["name"] if cmd else None
        params = {}
        if name is not None:
            raw = cmd.get("params", {})
            _validate(raw, COMMAND_PARAMS[name], ("command", "params"))
            params = copy.deepcopy(DEFAULT_PARAMS[name])
            params.update(copy.deepcopy(raw))
        problem = copy.deepcopy(data.get("problem"))
        if problem is not None:
            problem = _problem_defaults(problem)
        out = data.get("output", {})
        cfg = cls(problem, name, params, out.get("directory"), out.get("prefix", ""))
        if problem is not None:
            cfg.decision_problem()
        return cfg

    def to_dict(self) -> dict:
        d = {"schema_version": SCHEMA_VERSION}
        if self.problem is not None:
            d["problem"] = copy.deepcopy(self.problem)
        if self.command is not None:
            d["command"] = {"name": self.command, "params": copy.deepcopy(self.params)}
        out = {"prefix": self.prefix}
        if self.directory is not None:
            out["directory"] = self.directory
        d["output"] = out
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def with_command(self, name: str) -> "ScenarioConfig":
        """Bind to subcommand ``name``; a config naming a different command is rejected."""
        if self.command is not None and self.command != name:
            raise InputError(f"$.command.name: config is for {self.command!r}, not {name!r}")
        if self.command == name:
            return self
        return ScenarioConfig(self.problem, name, copy.deepcopy(DEFAULT_PARAMS[name]), self.directory, self.prefix)

    def decision_problem(self) -> DecisionProblem:
        if self.problem is None:
            raise InputError("$.problem: this command needs a problem block")
        p = self.problem
        try:
            return DecisionProblem(
                utility=p["utility"], prior=p["prior"], kappa=p["kappa"], chi=p["chi"], rho=p["rho"],
                states=tuple(p.get("states", ())), actions=tuple(p.get("actions", ())),
                entropy=ENTROPIES[p["entropy"]](),
            )
        except InputError as exc:
            raise InputError(f"$.problem.{exc}") from None
        except ValueError as exc:
            raise InputError(f"$.problem.utility: {exc}") from None


def _problem_defaults(p: dict) -> dict:
    out = {"kappa": 2.0, "chi": 1.0, "rho": 1.0, "entropy": "shannon"}
    out.update(p)
    return out


def loads(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return ScenarioConfig.from_dict(data)
    except InputError as exc:
        raise InputError(f"{source}: {exc}") from None


def load(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read config ({exc.strerror})") from None
    return loads(text, str(path))


def grid_values(grid) -> list[float]:
    """Expand a grid given as a list or as ``{start, stop, count}``."""
    if isinstance(grid, dict):
        n = int(grid["count"])
        a, b = float(grid["start"]), float(grid["stop"])
        if n == 1:
            return [a]
        return [a + (b - a) * i / (n - 1) for i in range(n)]
    return [float(x) for x in grid]
