"""Run configuration: a small TOML file validated before any computation.

Example::

    [group]
    family = "SL"
    n = 3

    [support]
    elements = ["1", "e", "f", "g", "f g"]   # or: radius = 2

    [problem]
    mode = "class"              # or "epsilon"
    level = "point+distance"
    objective = { "e f" = 1, "e g" = 1 }
    target = 4
    pins = { }                  # element -> pinned squared distance
    extra = [ { "e" = 1, "ebar" = -1 } ]

    [solver]
    max_iter = 200000
    seed = 0

    [certify]
    denominator = 4294967296
    strategy = "weighted"

Unknown sections or keys are errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import tomli

from .groups import FAMILIES
from .symmetry import normalize_level


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "group": {"family": str, "n": int},
    "support": {"radius": int, "elements": list, "complete": bool},
    "problem": {"mode": str, "level": str, "objective": dict, "target": (int, float, str),
                "pins": dict, "extra": list},
    "solver": {"max_iter": int, "tol_residual": float, "tol_gap": float, "rho": float,
               "alpha": float, "seed": int, "check_every": int, "verbose": bool},
    "certify": {"denominator": int, "strategy": str, "max_shift_fraction": float},
    "harper": {"theta_min": float, "theta_max": float, "steps": int, "window": int},
    "output": {"dir": str},
}


def _number(v, where: str) -> Fraction:
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a number")
    if isinstance(v, (int, str)):
        try:
            return Fraction(v)
        except ValueError:
            raise ConfigError(f"{where}: cannot read {v!r} as a rational") from None
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12)
    raise ConfigError(f"{where}: expected a number")


@dataclass
class RunConfig:
    family: str
    n: int | None = None
    radius: int | None = None
    elements: list | None = None
    complete: bool = False
    mode: str = "epsilon"
    level: str = "point+distance"
    objective: dict = field(default_factory=dict)
    target: Fraction | None = None
    pins: dict = field(default_factory=dict)
    extra: list = field(default_factory=list)
    solver: dict = field(default_factory=dict)
    certify: dict = field(default_factory=dict)
    harper: dict = field(default_factory=dict)
    out: str = "out"


def parse_config(data: dict) -> RunConfig:
    for section, body in data.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, val in body.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            want = _SCHEMA[section][key]
            if want is float and isinstance(val, int) and not isinstance(val, bool):
                continue
            if not isinstance(val, want) or (want is int and isinstance(val, bool)):
                raise ConfigError(f"{section}.{key} has the wrong type")
    grp = data.get("group")
    if not grp or "family" not in grp:
        raise ConfigError("[group] needs a family")
    if grp["family"] not in FAMILIES:
        raise ConfigError(f"unknown group family {grp['family']!r}; known: {', '.join(sorted(FAMILIES))}")
    cfg = RunConfig(family=grp["family"], n=grp.get("n"))

    sup = data.get("support", {})
    if ("radius" in sup) == ("elements" in sup) and "support" in data:
        raise ConfigError("[support] needs exactly one of radius or elements")
    cfg.radius = sup.get("radius")
    cfg.elements = [str(x) for x in sup["elements"]] if "elements" in sup else None
    cfg.complete = bool(sup.get("complete", False))

    cfg.solver = dict(data.get("solver", {}))
    cfg.certify = dict(data.get("certify", {}))
    prob = data.get("problem", {})
    cfg.mode = prob.get("mode", "epsilon")
    if cfg.mode not in ("epsilon", "class"):
        raise ConfigError("problem.mode must be epsilon or class")
    try:
        cfg.level = normalize_level(prob.get("level", "point+distance"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg.objective = {str(k): _number(v, f"objective[{k}]") for k, v in prob.get("objective", {}).items()}
    cfg.pins = {str(k): _number(v, f"pins[{k}]") for k, v in prob.get("pins", {}).items()}
    if "target" in prob:
        cfg.target = _number(prob["target"], "problem.target")
    extra = []
    for i, q in enumerate(prob.get("extra", [])):
        if not isinstance(q, dict):
            raise ConfigError("problem.extra entries must be tables element -> coefficient")
        extra.append({str(k): _number(v, f"extra[{i}]") for k, v in q.items()})
    cfg.extra = extra
    if cfg.certify.get("strategy", "weighted") not in ("weighted", "classic"):
        raise ConfigError("certify.strategy must be weighted or classic")
    if cfg.mode == "class" and not cfg.objective:
        raise ConfigError("class mode needs problem.objective")

    cfg.harper = dict(data.get("harper", {}))
    cfg.out = data.get("output", {}).get("dir", "out")
    return cfg


def load_config(path) -> RunConfig:
    try:
        data = tomli.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    return parse_config(data)
